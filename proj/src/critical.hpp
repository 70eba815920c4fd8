#pragma once

#include <Eigen/Dense>

#include "generator.hpp"
#include "model.hpp"

namespace yaglom {

// Expansion data of the first-return transform at its convergence abscissa
// s*: the square-root coefficient B, the coalescing eigenvalue gamma of
// K(s*) and -D(s*) with its eigenvector pair, and the limit matrices U, Y.
struct CriticalPoint {
  double s_star = 0.0;
  double gamma = 0.0;
  Eigen::VectorXd u;  // right eigenvector of K(s*) for gamma, unit norm
  Eigen::VectorXd v;  // left eigenvector of D(s*) for -gamma, unit norm
  Eigen::MatrixXd psi_star;  // n1 x n2
  Eigen::MatrixXd B;         // n1 x n2, > 0
  Eigen::MatrixXd U;         // n1 x n2
  Eigen::MatrixXd Y;         // n1 x n2, U - B Q21 B
  Eigen::MatrixXd K_star;    // n1 x n1
  Eigen::MatrixXd D_star;    // n2 x n2
  GeneratorBlocks q_star;    // generator blocks at s*, R00 cached
  bool k_hurwitz = false;    // max Re sp(K(s*)) < 0

  struct Diagnostics {
    double gap_at_star = 0.0;       // residual eigenvalue gap at s*
    double eq2_residual = 0.0;      // ||K B + B D||_inf
    double eq1_residual_rel = 0.0;  // ||B Q21 B - (U - Y_hat)|| / ||U||, Y_hat independent
    double y_check_rel = 0.0;       // ||Y_hat - Y|| / ||U||
    double fit_residual = 0.0;      // extrapolation-order disagreement on B
    double rank1_rel = 0.0;         // distance of B from the u v^T direction
    double h_used = 0.0;
  } diagnostics;
};

struct CriticalOptions {
  double h = 0.0;     // expansion step; <= 0 picks the default
  double tol = 1e-10; // abscissa location tolerance
};

// Minimal distance between the spectra of K(s) and -D(s).
double spectral_gap(const FluidModel& model, double s);

// Locates the convergence abscissa of the first-return transform: bracketing
// bisection on the existence probe, polished by secant iteration on the
// squared spectral gap (locally linear in s).
double find_s_star(const FluidModel& model, double tol = 1e-10);

// Square-root Richardson extrapolation of psi around s*, plus the eigen
// structure of the coalescence. `s_star` comes from find_s_star.
CriticalPoint critical_expansion(const FluidModel& model, double s_star,
                                 const CriticalOptions& opt = {});

// Convenience: find_s_star followed by critical_expansion.
CriticalPoint critical_point(const FluidModel& model, const CriticalOptions& opt = {});

}  // namespace yaglom
