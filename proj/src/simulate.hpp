#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "density.hpp"
#include "model.hpp"

namespace yaglom {

struct SimConfig {
  double x0 = 0.0;
  int phase0 = 0;  // block index
  double t = 1.0;  // horizon
  std::uint64_t paths = 1;
  std::uint64_t seed = 0;
  int bins = 80;
  double y_max = 0.0;  // <= 0: x0 + t * max(c), the reachable ceiling
};

// Histogram of survivors at the horizon, conditioned on the level not having
// hit 0. Bin `bins` is the overflow [y_max, inf). Masses are per to-phase in
// block order and sum to 1 across everything when there are survivors.
struct EmpiricalDensity {
  Eigen::VectorXd edges;  // bins + 1 edges spanning [0, y_max]
  Eigen::MatrixXd mass;   // (bins + 1) x n
  std::uint64_t survivors = 0;
  std::uint64_t paths = 0;
  double survival = 0.0;
  double ci_halfwidth = 0.0;  // 95% normal-approximation binomial half-width
};

// First-return times to level 0 from an ascending start, sorted, with the
// phase in which the return happened.
struct ReturnTimeSample {
  std::vector<double> times;
  std::vector<int> phases;       // block indices
  std::uint64_t censored = 0;    // paths still running at the horizon cap
};

struct TailFit {
  double slope = 0.0;  // of log(f t^{3/2}) against t; estimates the decay rate
  double slope_stderr = 0.0;
  double exponent = 0.0;  // power from the unconstrained two-parameter fit
  double exponent_stderr = 0.0;
  std::uint64_t in_window = 0;
  int bins_used = 0;
};

struct CompareResult {
  double l1 = 0.0;
  double ks = 0.0;
};

// Sampled analytic density restricted to one starting phase: level grid with
// side tags and one column per to-phase (block order). This is the exchange
// format between the density tables and the comparison below.
struct AnalyticTable {
  std::vector<double> y;
  std::vector<char> side;
  Eigen::MatrixXd density;  // points x n
};

// Exact event-driven simulation: exponential holding times, linear level
// motion between jumps, zero crossings solved in closed form. Deterministic
// for a given (seed, paths) regardless of worker count.
EmpiricalDensity simulate_conditional(const FluidModel& model, const SimConfig& cfg);

ReturnTimeSample sample_return_times(const FluidModel& model, std::uint64_t paths,
                                     std::uint64_t seed, int phase0, double horizon);

// Histogram estimate of the busy-period density on a log grid over
// [t_lo, t_hi] and the least-squares fits described above.
TailFit return_time_tail(const FluidModel& model, std::uint64_t paths, std::uint64_t seed,
                         int phase0, double t_lo, double t_hi, int bins = 24);

AnalyticTable table_from_grid(const DensityGrid& grid, int from_row);

CompareResult compare_densities(const AnalyticTable& analytic, const EmpiricalDensity& empirical);

}  // namespace yaglom
