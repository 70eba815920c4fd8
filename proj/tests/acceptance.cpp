// Acceptance gate: one self-contained check per shipped guarantee, each
// printing a single PASS/FAIL line. The process exits with the number of
// failed checks.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "critical.hpp"
#include "density.hpp"
#include "helpers.hpp"
#include "numkit.hpp"
#include "riccati.hpp"
#include "simulate.hpp"

using namespace yaglom;
using Eigen::MatrixXd;

namespace {

int g_failures = 0;

struct Criterion {
  std::string detail;
  bool ok = true;

  void check(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
  void close(double got, double want, double tol, const std::string& what) {
    if (!(std::abs(got - want) <= tol)) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      char buf[160];
      std::snprintf(buf, sizeof(buf), "%s: got %.8g, want %.8g (tol %.1g)", what.c_str(), got,
                    want, tol);
      detail += buf;
    }
  }
};

void run(int number, const std::string& title, double time_budget_s,
         const std::function<void(Criterion&)>& body) {
  Criterion c;
  auto start = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.ok = false;
    c.detail = std::string("exception: ") + e.what();
  }
  double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (time_budget_s > 0 && elapsed >= time_budget_s) {
    c.ok = false;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "runtime %.2f s exceeds budget %.0f s", elapsed,
                  time_budget_s);
    if (!c.detail.empty()) c.detail += "; ";
    c.detail += buf;
  }
  std::printf("[%s] criterion %d: %s (%.2f s)%s%s\n", c.ok ? "PASS" : "FAIL", number,
              title.c_str(), elapsed, c.detail.empty() ? "" : " -- ", c.detail.c_str());
  std::fflush(stdout);
  if (!c.ok) ++g_failures;
}

double l1_between_rows(const DensityGrid& a, int row_a, const DensityGrid& b, int row_b) {
  double acc = 0.0;
  for (size_t p = 1; p < a.y.size(); ++p) {
    double dy = a.y[p] - a.y[p - 1];
    acc += 0.5 * dy *
           ((a.values[p].row(row_a) - b.values[p].row(row_b)).cwiseAbs().sum() +
            (a.values[p - 1].row(row_a) - b.values[p - 1].row(row_b)).cwiseAbs().sum());
  }
  return acc;
}

}  // namespace

int main() {
  // 1. Three-phase reference point. The B, Y and H~ targets below are the
  // published reference values; the pipeline lands on [1.71430, 2.30465],
  // [0.63678, -0.94771] and 3.59531 instead, which is where the model's own
  // defining cubic puts them when evaluated at 40-digit precision (three
  // independent routes agree: the sqrt-slope of the exact cubic root, the
  // extrapolated solver samples, and the derivative-transform limit). Those
  // sub-checks therefore fail and are expected to.
  run(1, "three-phase critical data reproduces the reference values", 5.0, [](Criterion& c) {
    FluidModel m = testing::three_phase(2.5);
    CriticalPoint cp = critical_point(m);
    c.close(cp.s_star, -1.1178, 1e-3, "s*");
    c.close(cp.psi_star(0, 0), 1.7878, 1e-3, "psi1");
    c.close(cp.psi_star(0, 1), 1.5016, 1e-3, "psi2");
    c.close(cp.K_star(0, 0), -2.0944, 1e-3, "K");
    c.close(cp.U(0, 0), 3.5756, 1e-3, "U1");
    c.close(cp.U(0, 1), 3.0031, 1e-3, "U2");
    c.close(cp.B(0, 0), 1.6416, 2e-3, "B1");
    c.close(cp.B(0, 1), 2.2069, 2e-3, "B2");
    c.close(cp.Y(0, 0), 0.8808, 5e-3, "Y1");
    c.close(cp.Y(0, 1), -0.6197, 5e-3, "Y2");
    c.check(cp.diagnostics.eq2_residual <= 1e-6, "||K B + B D|| > 1e-6");
    ExpansionKernels k = kernels(m, cp, 0.0);
    c.close(k.H_tilde(0), 3.4428, 1e-3, "H~");
    std::printf(
        "[INFO] criterion 1 measured: B = [%.7f, %.7f], Y = [%.7f, %.7f], H~ = %.7f\n"
        "[INFO] 40-digit cubic slope: B = [1.7142963, 2.3046503], Y = [0.6367836, "
        "-0.9477058], H~ = 3.5953072\n",
        cp.B(0, 0), cp.B(0, 1), cp.Y(0, 0), cp.Y(0, 1), k.H_tilde(0));
  });

  // 2. Two-phase closed-form sweep.
  run(2, "two-phase sweep matches every closed form to 1e-6", 5.0, [](Criterion& c) {
    for (double a : {2.0, 3.0, 4.0}) {
      testing::TwoPhase tp{a, 1};
      FluidModel m = testing::two_phase(a, 1);
      CriticalPoint cp = critical_point(m);
      std::string tag = "a=" + std::to_string(int(a)) + " ";
      c.close(cp.s_star, tp.s_star(), 1e-6, tag + "s*");
      c.close(cp.psi_star(0, 0), tp.psi_star(), 1e-6, tag + "psi*");
      c.close(cp.K_star(0, 0), tp.K_star(), 1e-6, tag + "K*");
      c.close(cp.D_star(0, 0), tp.D_star(), 1e-6, tag + "D*");
      c.close(cp.B(0, 0), tp.B(), 1e-6, tag + "B");
      c.close(cp.U(0, 0), tp.U_star(), 1e-6, tag + "U");
      c.close(cp.Y(0, 0), 0.0, 1e-6, tag + "Y");
    }
  });

  // 3. Density curves and row masses.
  run(3, "two-phase density curves and unit row masses", 0.0, [](Criterion& c) {
    FluidModel m = testing::two_phase(3, 1);
    CriticalPoint cp = critical_point(m);
    const double root3 = std::sqrt(3.0);
    ExpansionKernels k0 = kernels(m, cp, 0.0);
    DensityGrid g = mu0_density(m, cp, k0, make_y_grid(0.0, 12.0, 240));
    double worst11 = 0, worst12 = 0;
    for (size_t p = 0; p < g.y.size(); ++p) {
      double y = g.y[p];
      worst11 = std::max(worst11,
                         std::abs(g.values[p](0, 0) - y * std::exp(-y) / (2 + root3)));
      worst12 = std::max(worst12, std::abs(g.values[p](0, 1) -
                                           (1 + root3 * y) * std::exp(-y) / (2 + root3)));
    }
    c.check(worst11 <= 1e-8, "density to phase 1 off by " + std::to_string(worst11));
    c.check(worst12 <= 1e-8, "density to phase 2 off by " + std::to_string(worst12));

    double y_max = default_y_max(cp);
    {
      DensityGrid g0 = mu0_density(m, cp, k0, make_y_grid(0.0, y_max, 64));
      for (int r = 0; r < g0.row_mass.size(); ++r)
        c.close(g0.row_mass(r), 1.0, 1e-6, "x=0 row mass");
    }
    for (double x : {0.5, 1.0, 3.0}) {
      ExpansionKernels k = kernels(m, cp, x);
      DensityGrid gx = mux_density(m, cp, k, x, make_y_grid(x, y_max, 64));
      for (int r = 0; r < gx.row_mass.size(); ++r)
        c.close(gx.row_mass(r), 1.0, 1e-6, "x=" + std::to_string(x) + " row mass");
    }
  });

  // 4. Property suite.
  run(4, "property suite (residuals, derivatives, oracles)", 60.0, [](Criterion& c) {
    std::mt19937 gen(2024);
    std::vector<FluidModel> corpus{testing::two_phase(2, 1), testing::two_phase(3, 1),
                                   testing::two_phase(4, 1), testing::three_phase(2.5),
                                   testing::zero_rate_model()};
    for (const FluidModel& m : corpus) {
      double s_star = find_s_star(m);
      GeneratorBlocks g = q_blocks(m, 0.0);
      double qn = std::max(g.Q11.cwiseAbs().rowwise().sum().maxCoeff() +
                               g.Q12.cwiseAbs().rowwise().sum().maxCoeff(),
                           g.Q21.cwiseAbs().rowwise().sum().maxCoeff() +
                               g.Q22.cwiseAbs().rowwise().sum().maxCoeff());
      (void)qn;
      std::uniform_real_distribution<double> span(s_star + 1e-3, 1.0);
      for (int k = 0; k < 20; ++k) {
        RiccatiSolution sol = solve_psi(m, span(gen));
        c.check(sol.converged, "no convergence inside the existence region");
        c.check(sol.residual <= 1e-10, "riccati residual above 1e-10");
      }
      // Derivative against central differences at a safe point.
      double s = std::max(s_star + 0.1, 0.25);
      PhiMatrix p = phi(m, solve_psi(m, s));
      double h = 1e-6;
      MatrixXd fd = (solve_psi(m, s + h).psi - solve_psi(m, s - h).psi) / (2 * h);
      double rel = (p.phi - fd).cwiseAbs().maxCoeff() / p.phi.cwiseAbs().maxCoeff();
      c.check(rel <= 1e-5, "derivative vs finite differences off by " + std::to_string(rel));
    }

    // Independent vectorized solver agreement.
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int done = 0;
    while (done < 50) {
      int mm = 2 + (gen() % 3), kk = 2 + (gen() % 2);
      MatrixXd A(mm, mm), B(kk, kk), C(mm, kk);
      for (int i = 0; i < mm; ++i)
        for (int j = 0; j < mm; ++j) A(i, j) = u(gen);
      for (int i = 0; i < kk; ++i)
        for (int j = 0; j < kk; ++j) B(i, j) = u(gen);
      for (int i = 0; i < mm; ++i)
        for (int j = 0; j < kk; ++j) C(i, j) = u(gen);
      A -= 3.0 * MatrixXd::Identity(mm, mm);
      B -= 3.0 * MatrixXd::Identity(kk, kk);
      MatrixXd X;
      try {
        X = numkit::sylvester_solve(A, B, C);
      } catch (const SingularSylvesterError&) {
        continue;
      }
      // Dense reference through the explicitly assembled operator.
      MatrixXd M = MatrixXd::Zero(mm * kk, mm * kk);
      Eigen::VectorXd rhs(mm * kk);
      for (int i = 0; i < mm; ++i)
        for (int j = 0; j < kk; ++j) {
          for (int pcol = 0; pcol < mm; ++pcol) M(i * kk + j, pcol * kk + j) += A(i, pcol);
          for (int q = 0; q < kk; ++q) M(i * kk + j, i * kk + q) += B(q, j);
          rhs(i * kk + j) = C(i, j);
        }
      Eigen::VectorXd xv = M.fullPivLu().solve(rhs);
      double worst = 0;
      for (int i = 0; i < mm; ++i)
        for (int j = 0; j < kk; ++j) worst = std::max(worst, std::abs(X(i, j) - xv(i * kk + j)));
      c.check(worst <= 1e-9, "vectorized solver mismatch " + std::to_string(worst));
      ++done;
    }

    // Series form of the level kernel vs the augmented exponential, and the
    // aggregates vs quadrature.
    for (const FluidModel& m : corpus) {
      CriticalPoint cp = critical_point(m);
      ExpansionKernels k0 = kernels(m, cp, 0.0);
      const MatrixXd E = cp.B * cp.q_star.Q21;
      const int n1 = m.n1;
      for (double y : {0.5, 2.0, 5.0}) {
        MatrixXd acc = MatrixXd::Zero(n1, n1);
        std::vector<MatrixXd> pow{MatrixXd::Identity(n1, n1)};
        const int terms = 120;
        for (int q = 1; q <= terms; ++q) pow.push_back(pow.back() * cp.K_star);
        double fact = 1.0;
        for (int q = 1; q <= terms; ++q) {
          fact *= y / q;
          MatrixXd inner = MatrixXd::Zero(n1, n1);
          for (int i = 0; i <= q - 1; ++i) inner += pow[i] * E * pow[q - 1 - i];
          acc += fact * inner;
          if (fact * inner.cwiseAbs().maxCoeff() < 1e-16 && q > 5) break;
        }
        c.check((k0.H_y(y) - acc).cwiseAbs().maxCoeff() <= 1e-9,
                "series vs augmented-exponential kernel");
      }
      double y_max = default_y_max(cp);
      MatrixXd hq = numkit::quad([&](double y) { return k0.H_y(y); }, 0.0, y_max, 1e-11);
      c.check((k0.H_bar - hq).cwiseAbs().maxCoeff() <= 1e-8, "H aggregate vs quadrature");
      ExpansionKernels kx = kernels(m, cp, 1.0);
      MatrixXd e21q = numkit::quad([&](double y) { return kx.E21_y(y); }, 0.0, y_max, 1e-10);
      c.check((kx.E21_bar - e21q).cwiseAbs().maxCoeff() <= 1e-8,
              "occupation aggregate vs quadrature");
      MatrixXd zq = numkit::quad([&](double y) { return kx.Z_xy(y); }, 0.0, y_max, 1e-9);
      c.check((kx.Z_bar - zq).cwiseAbs().maxCoeff() <= 1e-6, "Z aggregate vs quadrature");
    }
  });

  // 5. Conditioned Monte Carlo vs the analytic density.
  run(5, "conditioned Monte Carlo matches the analytic level distribution", 600.0,
      [](Criterion& c) {
        FluidModel m = testing::two_phase(3, 1);
        CriticalPoint cp = critical_point(m);
        SimConfig cfg;
        cfg.x0 = 0.0;
        cfg.phase0 = 0;
        cfg.t = 12.0;
        cfg.paths = 2000000;
        cfg.seed = 20240601;
        cfg.bins = 80;
        EmpiricalDensity emp = simulate_conditional(m, cfg);
        c.check(emp.survivors >= 500,
                "only " + std::to_string(emp.survivors) + " survivors");
        double y_max = std::max(default_y_max(cp), cfg.t * m.c.maxCoeff());
        ExpansionKernels k = kernels(m, cp, 0.0);
        DensityGrid g = mu0_density(m, cp, k, make_y_grid(0.0, y_max, 400));
        CompareResult r = compare_densities(table_from_grid(g, 0), emp);
        c.check(r.ks < 0.1, "KS distance " + std::to_string(r.ks));
      });

  // 6. Busy-period tail.
  run(6, "busy-period tail matches the predicted decay", 600.0, [](Criterion& c) {
    FluidModel m = testing::two_phase(3, 1);
    double s_star = std::sqrt(3.0) - 2.0;
    TailFit fit = return_time_tail(m, 5000000, 987654321, 0, 8.0, 25.0, 24);
    double rel = std::abs(fit.slope - s_star) / std::abs(s_star);
    c.check(rel <= 0.15, "slope " + std::to_string(fit.slope) + " rel err " +
                             std::to_string(rel));
    c.check(std::abs(fit.exponent + 1.5) <= 0.3,
            "power " + std::to_string(fit.exponent) + " outside -1.5 +/- 0.3");
  });

  // 7. The limit is required here to depend on the initial level. It does
  // not: with a single ascending and a single descending phase the
  // coalescence forces D(s*) = -K(s*), every kernel shares the one
  // exponential mode, and each normalized row collapses onto the level-0
  // profile (the same collapse shows up at the transform level, in the
  // three-phase model, and in conditioned Monte Carlo runs from positive
  // levels). The check is kept as stated and fails by construction.
  run(7, "positive and zero initial levels give different limits", 0.0, [](Criterion& c) {
    FluidModel m = testing::two_phase(3, 1);
    CriticalPoint cp = critical_point(m);
    double y_max = default_y_max(cp);
    auto grid = make_y_grid(1.0, y_max, 400);
    ExpansionKernels k1 = kernels(m, cp, 1.0);
    DensityGrid g1 = mux_density(m, cp, k1, 1.0, grid);
    ExpansionKernels k0 = kernels(m, cp, 0.0);
    DensityGrid g0 = mu0_density(m, cp, k0, grid);
    double l1 = l1_between_rows(g1, 0, g0, 0);
    std::printf("[INFO] criterion 7 measured L1 = %.3e (the normalized limits coincide)\n", l1);
    c.check(l1 > 1e-3, "L1 distance only " + std::to_string(l1));
  });

  if (g_failures == 0) std::printf("all criteria passed\n");
  return g_failures;
}
