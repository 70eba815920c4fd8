#include "riccati.hpp"

#include <cmath>

#include "numkit.hpp"

namespace yaglom {

namespace {

constexpr double kNonnegTol = 1e-10;
constexpr int kStallWindow = 500;

double q_norm(const GeneratorBlocks& g) {
  double top = g.Q11.cwiseAbs().rowwise().sum().maxCoeff() +
               g.Q12.cwiseAbs().rowwise().sum().maxCoeff();
  double bottom = g.Q21.cwiseAbs().rowwise().sum().maxCoeff() +
                  g.Q22.cwiseAbs().rowwise().sum().maxCoeff();
  return std::max(top, bottom);
}

Eigen::MatrixXd riccati_residual(const GeneratorBlocks& g, const Eigen::MatrixXd& X) {
  return g.Q12 + g.Q11 * X + X * g.Q22 + X * g.Q21 * X;
}

}  // namespace

Eigen::MatrixXd u_matrix(const DerivativeBlocks& a, const Eigen::MatrixXd& psi) {
  return a.A12 + a.A11 * psi + psi * a.A22 + psi * a.A21 * psi;
}

RiccatiSolution solve_psi(const FluidModel& model, double s, const RiccatiOptions& opt) {
  GeneratorBlocks g = q_blocks(model, s);
  const int n1 = model.n1, n2 = model.n2;

  RiccatiSolution sol;
  sol.s = s;
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n1, n2);

  const double scale = 1.0 + q_norm(g);
  const double target = opt.tol * scale;
  // Any legitimate minimal solution is far below this; blowing past it means
  // the nonnegative solution has ceased to exist.
  const double cap = 10.0 * (g.Q12.cwiseAbs().maxCoeff() + 1.0) *
                     std::max(1.0, g.Q11.cwiseAbs().maxCoeff());

  double res = riccati_residual(g, X).cwiseAbs().maxCoeff();
  double window_best = res, prev_window_best = std::numeric_limits<double>::infinity();
  bool diverged = false;

  int k = 0;
  for (; k < opt.max_iter && res > target; ++k) {
    Eigen::MatrixXd R = riccati_residual(g, X);
    Eigen::MatrixXd Kk = g.Q11 + X * g.Q21;
    Eigen::MatrixXd Dk = g.Q22 + g.Q21 * X;
    try {
      X += numkit::sylvester_solve(Kk, Dk, -R);
    } catch (const SingularSylvesterError&) {
      try {
        X = numkit::sylvester_solve(g.Q11, g.Q22, -g.Q12 - X * g.Q21 * X);
      } catch (const SingularSylvesterError&) {
        diverged = true;
        break;
      }
    }
    if (!X.allFinite() || X.cwiseAbs().maxCoeff() > cap) {
      diverged = true;
      break;
    }
    res = riccati_residual(g, X).cwiseAbs().maxCoeff();
    window_best = std::min(window_best, res);
    if ((k + 1) % kStallWindow == 0) {
      if (window_best >= 0.9 * prev_window_best) {
        // Oscillating without progress: no solution at this s.
        diverged = true;
        break;
      }
      prev_window_best = window_best;
      window_best = res;
    }
  }

  sol.psi = X;
  sol.K = g.Q11 + X * g.Q21;
  sol.D = g.Q22 + g.Q21 * X;
  sol.residual = res;
  sol.iterations = k;
  sol.converged = !diverged && res <= target && X.minCoeff() >= -kNonnegTol;
  return sol;
}

PhiMatrix phi(const FluidModel& model, const RiccatiSolution& solution) {
  if (!solution.converged)
    throw NumericalError("phi: the Riccati solution at s = " + std::to_string(solution.s) +
                         " did not converge");
  DerivativeBlocks a = a_blocks(model, solution.s);
  Eigen::MatrixXd U = u_matrix(a, solution.psi);
  Eigen::MatrixXd X;
  try {
    X = numkit::sylvester_solve(solution.K, solution.D, U);
  } catch (const SingularSylvesterError&) {
    throw SingularSylvesterError(
        "phi: derivative operator singular at s = " + std::to_string(solution.s) +
        "; the point is at or below the transform singularity");
  }
  if (X.maxCoeff() >= 0.0)
    throw NumericalError("phi: derivative has a nonnegative entry at s = " +
                         std::to_string(solution.s) + "; expected strictly negative values");
  PhiMatrix p;
  p.s = solution.s;
  p.phi = X;
  p.sylvester_residual = (solution.K * X + X * solution.D - U).cwiseAbs().maxCoeff();
  return p;
}

bool existence_probe(const FluidModel& model, double s, const RiccatiOptions& opt) {
  try {
    return solve_psi(model, s, opt).converged;
  } catch (...) {
    return false;
  }
}

}  // namespace yaglom
