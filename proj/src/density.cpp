#include "density.hpp"

#include <cmath>

#include "numkit.hpp"

namespace yaglom {

namespace {

constexpr double kQuadTol = 1e-10;

Eigen::MatrixXd neg_inverse(const Eigen::MatrixXd& K) {
  // (-K)^{-1}; K is Hurwitz wherever this is used.
  return (-K).partialPivLu().solve(Eigen::MatrixXd::Identity(K.rows(), K.cols()));
}

// Density numerator blocks at one level, as functions of the evaluation
// point and the side of the x-discontinuity. `below` selects the one-sided
// limit at y == x.
struct NumeratorContext {
  const FluidModel* model;
  const CriticalPoint* cp;
  const ExpansionKernels* k;
  Eigen::VectorXd c1inv, c2inv;
  Eigen::MatrixXd T_lower;  // [T10; T20], n1+n2 x n0

  Eigen::MatrixXd resolvent_column(const Eigen::MatrixXd& blk12) const {
    if (model->n0 == 0) return Eigen::MatrixXd(blk12.rows(), 0);
    return blk12 * T_lower * cp->q_star.R00;
  }
};

NumeratorContext make_context(const FluidModel& model, const CriticalPoint& cp,
                              const ExpansionKernels& k) {
  NumeratorContext ctx{&model, &cp, &k, model.c1().cwiseInverse(),
                       model.c2_abs().cwiseInverse(), {}};
  ctx.T_lower.resize(model.n1 + model.n2, model.n0);
  ctx.T_lower << model.T10(), model.T20();
  return ctx;
}

// Rows for ascending starting phases at x = 0.
Eigen::MatrixXd numerator_level0(const NumeratorContext& ctx, double y) {
  const auto& cp = *ctx.cp;
  const auto& k = *ctx.k;
  Eigen::MatrixXd H = k.H_y(y);
  Eigen::MatrixXd N1 = H * ctx.c1inv.asDiagonal();
  Eigen::MatrixXd N2 =
      (numkit::expm(cp.K_star, y) * cp.B + H * cp.psi_star) * ctx.c2inv.asDiagonal();
  Eigen::MatrixXd N12(N1.rows(), N1.cols() + N2.cols());
  N12 << N1, N2;
  Eigen::MatrixXd out(N1.rows(), ctx.model->n);
  out << N12, ctx.resolvent_column(N12);
  return out;
}

// Rows for descending starting phases at x > 0.
Eigen::MatrixXd numerator_descending(const NumeratorContext& ctx, double y, bool below) {
  const auto& cp = *ctx.cp;
  const auto& k = *ctx.k;
  Eigen::MatrixXd Z = k.Z_xy(y);
  Eigen::MatrixXd e21 = k.E21_y(y);
  Eigen::MatrixXd M1 = Z * ctx.c1inv.asDiagonal();
  Eigen::MatrixXd M2 = e21 * ctx.model->c1().asDiagonal() * cp.B + Z * cp.psi_star;
  if (below) M2 += k.W_w(k.x - y);
  M2 = M2 * ctx.c2inv.asDiagonal();
  Eigen::MatrixXd M12(M1.rows(), M1.cols() + M2.cols());
  M12 << M1, M2;
  Eigen::MatrixXd out(M1.rows(), ctx.model->n);
  out << M12, ctx.resolvent_column(M12);
  return out;
}

// Rows for ascending starting phases at x > 0.
Eigen::MatrixXd numerator_ascending(const NumeratorContext& ctx, double y, bool below) {
  const auto& cp = *ctx.cp;
  const auto& k = *ctx.k;
  const auto& model = *ctx.model;
  Eigen::MatrixXd Z = k.Z_xy(y);
  Eigen::MatrixXd e21 = k.E21_y(y);
  Eigen::MatrixXd e22 = e21 * model.c1().asDiagonal() * cp.psi_star * ctx.c2inv.asDiagonal();
  if (below) e22 += numkit::expm(cp.D_star, k.x - y) * ctx.c2inv.asDiagonal();

  Eigen::MatrixXd P1 = cp.B * e21 + cp.psi_star * Z * ctx.c1inv.asDiagonal();
  Eigen::MatrixXd inner = e21 * model.c1().asDiagonal() * cp.B + Z * cp.psi_star;
  if (below) inner += k.W_w(k.x - y);
  Eigen::MatrixXd P2 = cp.B * e22 + cp.psi_star * inner * ctx.c2inv.asDiagonal();
  if (!below && y >= k.x) {
    double dy = y - k.x;
    Eigen::MatrixXd H = k.H_y(dy);
    P1 += H * ctx.c1inv.asDiagonal();
    P2 += (numkit::expm(cp.K_star, dy) * cp.B + H * cp.psi_star) * ctx.c2inv.asDiagonal();
  }
  Eigen::MatrixXd P12(P1.rows(), P1.cols() + P2.cols());
  P12 << P1, P2;
  Eigen::MatrixXd out(P1.rows(), ctx.model->n);
  out << P12, ctx.resolvent_column(P12);
  return out;
}

}  // namespace

double default_y_max(const CriticalPoint& cp) {
  double y = std::log(1e12) / std::max(1e-12, -cp.gamma);
  while (numkit::expm(cp.K_star, y).cwiseAbs().rowwise().sum().maxCoeff() > 1e-12) y *= 1.25;
  return y;
}

std::vector<GridPoint> make_y_grid(double x, double y_max, int steps) {
  if (!(y_max > 0.0) || steps < 1)
    throw ValidationError("grid needs y_max > 0 and at least one step");
  std::vector<GridPoint> grid;
  grid.reserve(steps + 3);
  bool split = x > 0.0 && x < y_max;
  for (int i = 0; i <= steps; ++i) {
    double y = y_max * static_cast<double>(i) / steps;
    if (split && y >= x && (i == 0 || grid.back().y < x)) {
      grid.push_back({x, 'l'});
      grid.push_back({x, 'r'});
      if (y == x) continue;
    }
    grid.push_back({y, '-'});
  }
  return grid;
}

ExpansionKernels kernels(const FluidModel& model, const CriticalPoint& cp, double x) {
  if (x < 0.0) throw ValidationError("kernels: initial level must be >= 0");
  if (!cp.k_hurwitz)
    throw NumericalError(
        "K(s*) is not Hurwitz; the level aggregates diverge and the conditional "
        "limit is out of reach for this model");

  ExpansionKernels k;
  k.x = x;

  const Eigen::MatrixXd Kst = cp.K_star, Dst = cp.D_star, B = cp.B;
  const Eigen::MatrixXd Q21 = cp.q_star.Q21;
  const Eigen::MatrixXd BQ21 = B * Q21;   // n1 x n1
  const Eigen::MatrixXd Q21B = Q21 * B;   // n2 x n2
  k.H_y = [Kst, BQ21](double y) { return numkit::expm_frechet(Kst, BQ21, y); };
  k.W_w = [Dst, Q21B](double w) { return numkit::expm_frechet(Dst, Q21B, w); };

  Eigen::MatrixXd Kinv = neg_inverse(Kst);  // (-K*)^{-1}
  k.H_bar = Kinv * BQ21 * Kinv;

  Eigen::VectorXd c1inv = model.c1().cwiseInverse();
  Eigen::VectorXd c2inv = model.c2_abs().cwiseInverse();
  NumeratorContext ctx = make_context(model, cp, k);

  {
    Eigen::MatrixXd D1 = k.H_bar * c1inv.asDiagonal();
    Eigen::MatrixXd D2 = (Kinv * B + k.H_bar * cp.psi_star) * c2inv.asDiagonal();
    Eigen::MatrixXd D12(D1.rows(), D1.cols() + D2.cols());
    D12 << D1, D2;
    k.H_tilde = D12.rowwise().sum();
    if (model.n0 > 0) k.H_tilde += ctx.resolvent_column(D12).rowwise().sum();
  }

  if (x > 0.0) {
    auto H_y = k.H_y;
    auto W_w = k.W_w;
    k.E21_y = [=](double y) {
      double upper = std::min(x, y);
      Eigen::MatrixXd raw =
          upper == 0.0
              ? Eigen::MatrixXd::Zero(Dst.rows(), Kst.rows())
              : numkit::quad(
                    [&](double z) {
                      return Eigen::MatrixXd(numkit::expm(Dst, x - z) * Q21 *
                                             numkit::expm(Kst, y - z));
                    },
                    0.0, upper, kQuadTol);
      return Eigen::MatrixXd(raw * c1inv.asDiagonal());
    };
    k.Z_xy = [=](double y) {
      double upper = std::min(x, y);
      if (upper == 0.0) return Eigen::MatrixXd::Zero(Dst.rows(), Kst.rows()).eval();
      return numkit::quad(
          [&](double z) {
            return Eigen::MatrixXd(W_w(x - z) * Q21 * numkit::expm(Kst, y - z) +
                                   numkit::expm(Dst, x - z) * Q21 * H_y(y - z));
          },
          0.0, upper, kQuadTol);
    };

    k.W_x = numkit::quad([&](double w) { return k.W_w(w); }, 0.0, x, kQuadTol);
    Eigen::MatrixXd F = numkit::integral_expm(Dst, x);  // int_0^x e^{D* w} dw
    k.E21_bar = F * Q21 * Kinv * c1inv.asDiagonal();
    k.E22_bar = k.E21_bar * model.c1().asDiagonal() * cp.psi_star * c2inv.asDiagonal() +
                F * c2inv.asDiagonal();
    k.Z_bar = k.W_x * Q21 * Kinv + F * Q21 * k.H_bar;

    {
      Eigen::MatrixXd Z1 = k.Z_bar * c1inv.asDiagonal();
      Eigen::MatrixXd Z2 = (k.E21_bar * model.c1().asDiagonal() * B + k.Z_bar * cp.psi_star +
                            k.W_x) *
                           c2inv.asDiagonal();
      Eigen::MatrixXd Z12(Z1.rows(), Z1.cols() + Z2.cols());
      Z12 << Z1, Z2;
      k.Z_tilde = Z12.rowwise().sum();
      if (model.n0 > 0) k.Z_tilde += ctx.resolvent_column(Z12).rowwise().sum();
    }
    {
      Eigen::MatrixXd P1 = B * k.E21_bar + (cp.psi_star * k.Z_bar + k.H_bar) * c1inv.asDiagonal();
      Eigen::MatrixXd P2 =
          B * k.E22_bar +
          cp.psi_star *
              (k.E21_bar * model.c1().asDiagonal() * B + k.Z_bar * cp.psi_star + k.W_x) *
              c2inv.asDiagonal() +
          (Kinv * B + k.H_bar * cp.psi_star) * c2inv.asDiagonal();
      Eigen::MatrixXd P12(P1.rows(), P1.cols() + P2.cols());
      P12 << P1, P2;
      k.ZZ_tilde = P12.rowwise().sum();
      if (model.n0 > 0) k.ZZ_tilde += ctx.resolvent_column(P12).rowwise().sum();
    }
  }
  return k;
}

namespace {

// Integrates the stacked numerator row sums so the mass metadata comes from
// an actual quadrature rather than from the normalizers themselves.
Eigen::VectorXd integrate_rows(const std::function<Eigen::MatrixXd(double, bool)>& numer,
                               double x, double y_max) {
  auto rowsums = [&](bool below) {
    return [&numer, below](double y) {
      return Eigen::MatrixXd(numer(y, below).rowwise().sum());
    };
  };
  Eigen::MatrixXd acc;
  if (x > 0.0 && x < y_max) {
    acc = numkit::quad(rowsums(true), 0.0, x, 1e-9);
    acc += numkit::quad(rowsums(false), x, y_max, 1e-9);
  } else {
    bool below = x >= y_max;  // the whole range sits under the start level
    acc = numkit::quad(rowsums(below), 0.0, y_max, 1e-9);
  }
  return acc;
}

}  // namespace

DensityGrid mu0_density(const FluidModel& model, const CriticalPoint& cp,
                        const ExpansionKernels& k, const std::vector<GridPoint>& grid) {
  if (k.x != 0.0) throw ValidationError("mu0_density expects kernels built for x = 0");
  NumeratorContext ctx = make_context(model, cp, k);

  DensityGrid g;
  g.x = 0.0;
  for (int i = 0; i < model.n1; ++i) g.from_blocks.push_back(i);
  Eigen::VectorXd norm_inv = k.H_tilde.cwiseInverse();
  for (const auto& pt : grid) {
    g.y.push_back(pt.y);
    g.side.push_back(pt.side);
    g.values.push_back(norm_inv.asDiagonal() * numerator_level0(ctx, pt.y));
  }
  g.y_max = grid.back().y;
  Eigen::VectorXd raw = integrate_rows(
      [&](double y, bool) { return numerator_level0(ctx, y); }, 0.0, g.y_max);
  g.row_mass = raw.cwiseQuotient(k.H_tilde);
  return g;
}

DensityGrid mux_density(const FluidModel& model, const CriticalPoint& cp,
                        const ExpansionKernels& k, double x,
                        const std::vector<GridPoint>& grid) {
  if (!(x > 0.0)) throw ValidationError("mux_density needs x > 0");
  if (k.x != x) throw ValidationError("mux_density: kernels were built for a different x");
  NumeratorContext ctx = make_context(model, cp, k);

  DensityGrid g;
  g.x = x;
  for (int i = 0; i < model.n1 + model.n2; ++i) g.from_blocks.push_back(i);

  Eigen::VectorXd norm_inv(model.n1 + model.n2);
  norm_inv << k.ZZ_tilde.cwiseInverse(), k.Z_tilde.cwiseInverse();

  auto stacked = [&](double y, bool below) {
    Eigen::MatrixXd up = numerator_ascending(ctx, y, below);
    Eigen::MatrixXd down = numerator_descending(ctx, y, below);
    Eigen::MatrixXd both(up.rows() + down.rows(), up.cols());
    both << up, down;
    return both;
  };

  for (const auto& pt : grid) {
    bool below = pt.side == 'l' ? true : pt.side == 'r' ? false : pt.y < x;
    g.y.push_back(pt.y);
    g.side.push_back(pt.side);
    g.values.push_back(norm_inv.asDiagonal() * stacked(pt.y, below));
  }
  g.y_max = grid.back().y;
  Eigen::VectorXd raw = integrate_rows(stacked, x, g.y_max);
  g.row_mass = raw.cwiseProduct(norm_inv);
  return g;
}

TailAsymptote psi_tail(const CriticalPoint& cp) {
  TailAsymptote t;
  t.coefficient = cp.B / (2.0 * std::sqrt(M_PI));
  t.rate = cp.s_star;
  t.exponent = -1.5;
  return t;
}

}  // namespace yaglom
