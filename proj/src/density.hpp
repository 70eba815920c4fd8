#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "critical.hpp"
#include "model.hpp"

namespace yaglom {

// Building blocks of the limiting conditional densities: H drives the
// level-0 start, W/Z and the occupation aggregates E21/E22 drive positive
// starts. Pointwise evaluators capture everything by value and are pure.
struct ExpansionKernels {
  double x = 0.0;

  std::function<Eigen::MatrixXd(double)> H_y;    // n1 x n1
  std::function<Eigen::MatrixXd(double)> W_w;    // n2 x n2
  std::function<Eigen::MatrixXd(double)> E21_y;  // n2 x n1 (density; includes C1^{-1})
  std::function<Eigen::MatrixXd(double)> Z_xy;   // n2 x n1

  Eigen::MatrixXd H_bar;     // int_0^inf H(y) dy
  Eigen::VectorXd H_tilde;   // level-0 row normalizer, > 0
  Eigen::MatrixXd W_x;       // int_0^x W(w) dw        (x > 0)
  Eigen::MatrixXd E21_bar;   // int_0^inf E21_y dy      (x > 0)
  Eigen::MatrixXd E22_bar;   //                          (x > 0)
  Eigen::MatrixXd Z_bar;     // int_0^inf Z_xy dy        (x > 0)
  Eigen::VectorXd Z_tilde;   // descending-start row normalizer (x > 0)
  Eigen::VectorXd ZZ_tilde;  // ascending-start row normalizer  (x > 0)
};

struct GridPoint {
  double y = 0.0;
  char side = '-';  // 'l'/'r' disambiguate the one-sided limits at y == x
};

// Tabulated conditional density; `values[p]` holds the (#from x n) density
// matrix at grid point p, phases in block order.
struct DensityGrid {
  double x = 0.0;
  std::vector<int> from_blocks;
  std::vector<double> y;
  std::vector<char> side;
  std::vector<Eigen::MatrixXd> values;
  Eigen::VectorXd row_mass;  // numerically integrated over [0, y_max] per from-row
  double y_max = 0.0;
};

// Tail of the busy-period density: coefficient * t^exponent * e^{rate t}.
struct TailAsymptote {
  Eigen::MatrixXd coefficient;  // B / (2 sqrt(pi)), > 0
  double rate = 0.0;            // s* < 0
  double exponent = -1.5;
};

// y_max such that ||e^{K* y_max}||_inf <= 1e-12.
double default_y_max(const CriticalPoint& cp);

// Uniform grid on [0, y_max] with `steps` intervals; when 0 < x < y_max the
// point y = x appears twice, tagged 'l' and 'r'.
std::vector<GridPoint> make_y_grid(double x, double y_max, int steps);

ExpansionKernels kernels(const FluidModel& model, const CriticalPoint& cp, double x);

// Conditional density for a start at level 0 (rows = ascending phases).
DensityGrid mu0_density(const FluidModel& model, const CriticalPoint& cp,
                        const ExpansionKernels& k, const std::vector<GridPoint>& grid);

// Conditional density for a start at level x > 0 (rows = ascending then
// descending phases; zero-rate starting phases are unsupported).
DensityGrid mux_density(const FluidModel& model, const CriticalPoint& cp,
                        const ExpansionKernels& k, double x,
                        const std::vector<GridPoint>& grid);

TailAsymptote psi_tail(const CriticalPoint& cp);

}  // namespace yaglom
