#pragma once

#include <Eigen/Dense>

#include "model.hpp"

namespace yaglom {

// Blocks of the fluid generator at a real evaluation point s. When zero-rate
// phases exist they are censored out through the resolvent R00 = -(T00 - sI)^{-1},
// which exists for s above the spectral abscissa of T00.
struct GeneratorBlocks {
  double s = 0.0;
  Eigen::MatrixXd Q11, Q12, Q21, Q22;
  Eigen::MatrixXd R00;  // n0 x n0; empty when there are no zero-rate phases
};

// Negated s-derivatives of the generator blocks: Akl(s) = -d/ds Qkl(s).
struct DerivativeBlocks {
  double s = 0.0;
  Eigen::MatrixXd A11, A12, A21, A22;
};

// Largest admissible lower bound for s (spectral abscissa of T00; -inf when
// S0 is empty).
double s_admissible_floor(const FluidModel& model);

GeneratorBlocks q_blocks(const FluidModel& model, double s);
DerivativeBlocks a_blocks(const FluidModel& model, double s);

}  // namespace yaglom
