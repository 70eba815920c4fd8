#pragma once

#include <Eigen/Dense>

#include "generator.hpp"
#include "model.hpp"

namespace yaglom {

// Minimal nonnegative solution of
//   Q12(s) + Q11(s) X + X Q22(s) + X Q21(s) X = 0
// together with the upward/downward crossing generators assembled from it.
struct RiccatiSolution {
  double s = 0.0;
  Eigen::MatrixXd psi;  // n1 x n2, first-return transform values
  Eigen::MatrixXd K;    // Q11 + psi Q21
  Eigen::MatrixXd D;    // Q22 + Q21 psi
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct PhiMatrix {
  double s = 0.0;
  Eigen::MatrixXd phi;  // d psi / ds, entrywise negative
  double sylvester_residual = 0.0;
};

struct RiccatiOptions {
  double tol = 1e-12;
  int max_iter = 20000;
};

// Newton iteration from X = 0; each step solves
//   (Q11 + X Q21) Delta + Delta (Q22 + Q21 X) = -residual(X),
// with a fixed-point fallback step X <- solve(Q11, Q22, -Q12 - X Q21 X)
// whenever the Newton operator is singular. Non-convergence (divergence cap,
// residual stall, or a limit with negative entries) is reported through
// `converged = false`, not an exception.
RiccatiSolution solve_psi(const FluidModel& model, double s, const RiccatiOptions& opt = {});

// Derivative of psi in s: the unique solution of K(s) X + X D(s) = U(s) for
// s above the transform singularity. Throws SingularSylvesterError at or
// below it (where the derivative blows up).
PhiMatrix phi(const FluidModel& model, const RiccatiSolution& solution);

// True iff the minimal nonnegative solution exists at s (bounded, convergent
// iterates). Never throws; any failure mode maps to false.
bool existence_probe(const FluidModel& model, double s, const RiccatiOptions& opt = {});

// U(s) = A12 + A11 psi + psi A22 + psi A21 psi, the inhomogeneity of the
// derivative equation.
Eigen::MatrixXd u_matrix(const DerivativeBlocks& a, const Eigen::MatrixXd& psi);

}  // namespace yaglom
