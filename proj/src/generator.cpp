#include "generator.hpp"

#include <limits>

#include "numkit.hpp"

namespace yaglom {

namespace {

constexpr double kAdmissibleMargin = 1e-10;

Eigen::MatrixXd resolvent(const FluidModel& m, double s) {
  // R00 = (sI - T00)^{-1} = int_0^inf e^{-st} e^{T00 t} dt, entrywise >= 0.
  Eigen::MatrixXd A = s * Eigen::MatrixXd::Identity(m.n0, m.n0) - m.T00();
  return A.partialPivLu().solve(Eigen::MatrixXd::Identity(m.n0, m.n0));
}

void check_admissible(const FluidModel& m, double s) {
  if (m.n0 == 0) return;
  double floor = s_admissible_floor(m);
  if (s <= floor + kAdmissibleMargin)
    throw NumericalError("s = " + std::to_string(s) +
                         " is below the T00 abscissa (" + std::to_string(floor) +
                         "); the zero-phase resolvent does not exist");
}

}  // namespace

double s_admissible_floor(const FluidModel& model) {
  if (model.n0 == 0) return -std::numeric_limits<double>::infinity();
  return numkit::eigenvalues(model.T00()).dominant.real();
}

GeneratorBlocks q_blocks(const FluidModel& model, double s) {
  check_admissible(model, s);
  const int n1 = model.n1, n2 = model.n2;
  Eigen::VectorXd c1inv = model.c1().cwiseInverse();
  Eigen::VectorXd c2inv = model.c2_abs().cwiseInverse();

  GeneratorBlocks g;
  g.s = s;
  Eigen::MatrixXd I1 = Eigen::MatrixXd::Identity(n1, n1);
  Eigen::MatrixXd I2 = Eigen::MatrixXd::Identity(n2, n2);
  if (model.n0 == 0) {
    g.Q11 = c1inv.asDiagonal() * (model.T11() - s * I1);
    g.Q12 = c1inv.asDiagonal() * model.T12();
    g.Q21 = c2inv.asDiagonal() * model.T21();
    g.Q22 = c2inv.asDiagonal() * (model.T22() - s * I2);
    g.R00.resize(0, 0);
  } else {
    g.R00 = resolvent(model, s);
    // (T00 - sI)^{-1} = -R00, so each censored block gains +Tk0 R00 T0l.
    g.Q11 = c1inv.asDiagonal() * (model.T11() - s * I1 + model.T10() * g.R00 * model.T01());
    g.Q12 = c1inv.asDiagonal() * (model.T12() + model.T10() * g.R00 * model.T02());
    g.Q21 = c2inv.asDiagonal() * (model.T21() + model.T20() * g.R00 * model.T01());
    g.Q22 = c2inv.asDiagonal() * (model.T22() - s * I2 + model.T20() * g.R00 * model.T02());
  }
  return g;
}

DerivativeBlocks a_blocks(const FluidModel& model, double s) {
  check_admissible(model, s);
  const int n1 = model.n1, n2 = model.n2;
  Eigen::VectorXd c1inv = model.c1().cwiseInverse();
  Eigen::VectorXd c2inv = model.c2_abs().cwiseInverse();

  DerivativeBlocks d;
  d.s = s;
  Eigen::MatrixXd I1 = Eigen::MatrixXd::Identity(n1, n1);
  Eigen::MatrixXd I2 = Eigen::MatrixXd::Identity(n2, n2);
  if (model.n0 == 0) {
    d.A11 = c1inv.asDiagonal() * I1;
    d.A22 = c2inv.asDiagonal() * I2;
    d.A12 = Eigen::MatrixXd::Zero(n1, n2);
    d.A21 = Eigen::MatrixXd::Zero(n2, n1);
  } else {
    Eigen::MatrixXd R2 = resolvent(model, s);
    R2 = R2 * R2;  // (T00 - sI)^{-2}
    d.A11 = c1inv.asDiagonal() * (I1 + model.T10() * R2 * model.T01());
    d.A22 = c2inv.asDiagonal() * (I2 + model.T20() * R2 * model.T02());
    d.A12 = c1inv.asDiagonal() * (model.T10() * R2 * model.T02());
    d.A21 = c2inv.asDiagonal() * (model.T20() * R2 * model.T01());
  }
  return d;
}

}  // namespace yaglom
