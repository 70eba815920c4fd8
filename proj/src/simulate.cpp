#include "simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>
#include <thread>

namespace yaglom {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Per-path generator: the stream depends only on (seed, path index), so the
// aggregate is independent of how paths are sheared across workers.
class PathRng {
 public:
  PathRng(std::uint64_t seed, std::uint64_t path)
      : gen_(splitmix64(seed ^ (0x9E3779B97F4A7C15ULL * (path + 1)))) {}
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

 private:
  std::mt19937_64 gen_;
};

int pick_jump(const FluidModel& m, int phase, double u) {
  double total = -m.T(phase, phase);
  double target = u * total;
  double acc = 0.0;
  int last = -1;
  for (int j = 0; j < m.n; ++j) {
    if (j == phase) continue;
    double w = m.T(phase, j);
    if (w <= 0.0) continue;
    acc += w;
    last = j;
    if (acc >= target) return j;
  }
  return last;
}

struct PathOutcome {
  bool survived = false;
  double level = 0.0;   // X(t) when survived
  int phase = 0;        // phi(t) when survived, or the return phase
  double theta = 0.0;   // first return time when it died
};

PathOutcome run_path(const FluidModel& m, double x0, int phase0, double horizon, PathRng& rng) {
  double t_now = 0.0, x = x0;
  int ph = phase0;
  for (;;) {
    double rate = -m.T(ph, ph);
    double dt = rng.exponential(rate);
    double c = m.c(ph);
    double t_end = t_now + dt;
    if (c < 0.0) {
      double t_hit = t_now + x / (-c);
      if (t_hit <= t_end && t_hit <= horizon) {
        return {false, 0.0, ph, t_hit};
      }
    }
    if (horizon <= t_end) {
      return {true, x + c * (horizon - t_now), ph, 0.0};
    }
    x += c * dt;
    t_now = t_end;
    ph = pick_jump(m, ph, rng.uniform());
  }
}

int worker_count(std::uint64_t paths) {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("YAGLOM_THREADS")) {
    long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1 && static_cast<unsigned>(cap) < hw) hw = static_cast<unsigned>(cap);
  }
  std::uint64_t per = std::max<std::uint64_t>(1, paths / 64);
  return static_cast<int>(std::min<std::uint64_t>(hw, per));
}

template <typename Body>
void parallel_paths(std::uint64_t paths, const Body& body) {
  int workers = worker_count(paths);
  if (workers <= 1) {
    body(0, 0, paths);
    return;
  }
  std::vector<std::thread> pool;
  std::uint64_t chunk = (paths + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    std::uint64_t begin = w * chunk, end = std::min(paths, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, w, begin, end] { body(w, begin, end); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

EmpiricalDensity simulate_conditional(const FluidModel& model, const SimConfig& cfg) {
  if (cfg.paths < 1) throw ValidationError("simulation needs at least one path");
  if (!(cfg.t > 0.0)) throw ValidationError("simulation horizon must be positive");
  if (cfg.bins < 1) throw ValidationError("simulation needs at least one bin");
  if (cfg.phase0 < 0 || cfg.phase0 >= model.n) throw ValidationError("initial phase out of range");
  if (cfg.x0 < 0.0) throw ValidationError("initial level must be >= 0");
  if (cfg.x0 == 0.0 && cfg.phase0 >= model.n1)
    throw ValidationError("a start at level 0 must use an ascending phase");
  if (!stability(model).stable)
    throw ValidationError("conditional simulation requires a stable model");

  double y_max = cfg.y_max > 0.0 ? cfg.y_max : cfg.x0 + cfg.t * model.c.maxCoeff();
  const int bins = cfg.bins;
  const double width = y_max / bins;

  int workers = worker_count(cfg.paths);
  std::vector<Eigen::Matrix<std::uint64_t, Eigen::Dynamic, Eigen::Dynamic>> counts(
      std::max(workers, 1),
      Eigen::Matrix<std::uint64_t, Eigen::Dynamic, Eigen::Dynamic>::Zero(bins + 1, model.n));

  parallel_paths(cfg.paths, [&](int w, std::uint64_t begin, std::uint64_t end) {
    auto& local = counts[w];
    for (std::uint64_t p = begin; p < end; ++p) {
      PathRng rng(cfg.seed, p);
      PathOutcome out = run_path(model, cfg.x0, cfg.phase0, cfg.t, rng);
      if (!out.survived) continue;
      int b = out.level >= y_max ? bins : static_cast<int>(out.level / width);
      if (b > bins) b = bins;
      local(b, out.phase) += 1;
    }
  });

  Eigen::Matrix<std::uint64_t, Eigen::Dynamic, Eigen::Dynamic> total = counts[0];
  for (size_t w = 1; w < counts.size(); ++w) total += counts[w];

  EmpiricalDensity emp;
  emp.paths = cfg.paths;
  emp.survivors = total.sum();
  emp.survival = static_cast<double>(emp.survivors) / static_cast<double>(cfg.paths);
  emp.ci_halfwidth =
      1.959963984540054 * std::sqrt(emp.survival * (1.0 - emp.survival) / cfg.paths);
  emp.edges.resize(bins + 1);
  for (int k = 0; k <= bins; ++k) emp.edges(k) = width * k;
  emp.mass = Eigen::MatrixXd::Zero(bins + 1, model.n);
  if (emp.survivors > 0)
    emp.mass = total.cast<double>() / static_cast<double>(emp.survivors);
  return emp;
}

ReturnTimeSample sample_return_times(const FluidModel& model, std::uint64_t paths,
                                     std::uint64_t seed, int phase0, double horizon) {
  if (phase0 < 0 || phase0 >= model.n1)
    throw ValidationError("return-time sampling must start in an ascending phase at level 0");
  int workers = worker_count(paths);
  std::vector<std::vector<std::pair<double, int>>> parts(std::max(workers, 1));
  std::vector<std::uint64_t> censored(std::max(workers, 1), 0);

  parallel_paths(paths, [&](int w, std::uint64_t begin, std::uint64_t end) {
    auto& local = parts[w];
    local.reserve(end - begin);
    for (std::uint64_t p = begin; p < end; ++p) {
      PathRng rng(seed, p);
      PathOutcome out = run_path(model, 0.0, phase0, horizon, rng);
      if (out.survived)
        ++censored[w];
      else
        local.emplace_back(out.theta, out.phase);
    }
  });

  std::vector<std::pair<double, int>> all;
  for (auto& part : parts) all.insert(all.end(), part.begin(), part.end());
  std::sort(all.begin(), all.end());

  ReturnTimeSample sample;
  sample.times.reserve(all.size());
  sample.phases.reserve(all.size());
  for (const auto& [t, ph] : all) {
    sample.times.push_back(t);
    sample.phases.push_back(ph);
  }
  for (auto c : censored) sample.censored += c;
  return sample;
}

TailFit return_time_tail(const FluidModel& model, std::uint64_t paths, std::uint64_t seed,
                         int phase0, double t_lo, double t_hi, int bins) {
  if (!(t_lo > 0.0) || !(t_hi > t_lo)) throw ValidationError("tail window must satisfy 0 < t_lo < t_hi");
  if (bins < 3) throw ValidationError("tail fit needs at least 3 bins");
  ReturnTimeSample sample = sample_return_times(model, paths, seed, phase0, 10.0 * t_hi);

  // Log-spaced histogram over the window; geometric bin centers.
  std::vector<double> edges(bins + 1);
  double ratio = std::pow(t_hi / t_lo, 1.0 / bins);
  for (int k = 0; k <= bins; ++k) edges[k] = t_lo * std::pow(ratio, k);

  std::vector<double> tc, logf;
  std::uint64_t in_window = 0;
  for (int k = 0; k < bins; ++k) {
    auto lo = std::lower_bound(sample.times.begin(), sample.times.end(), edges[k]);
    auto hi = std::lower_bound(sample.times.begin(), sample.times.end(), edges[k + 1]);
    std::uint64_t cnt = static_cast<std::uint64_t>(hi - lo);
    in_window += cnt;
    if (cnt < 5) continue;  // too noisy for the log fit
    double f = static_cast<double>(cnt) / (static_cast<double>(paths) * (edges[k + 1] - edges[k]));
    tc.push_back(std::sqrt(edges[k] * edges[k + 1]));
    logf.push_back(std::log(f));
  }
  const int m = static_cast<int>(tc.size());
  if (m < 3)
    throw NumericalError("insufficient tail samples in the window [" + std::to_string(t_lo) +
                         ", " + std::to_string(t_hi) + "]: only " + std::to_string(m) +
                         " usable bins");

  TailFit fit;
  fit.in_window = in_window;
  fit.bins_used = m;

  {
    // log(f t^{3/2}) = a + slope * t
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < m; ++i) {
      double yv = logf[i] + 1.5 * std::log(tc[i]);
      sx += tc[i];
      sy += yv;
      sxx += tc[i] * tc[i];
      sxy += tc[i] * yv;
    }
    double det = m * sxx - sx * sx;
    fit.slope = (m * sxy - sx * sy) / det;
    double a = (sy - fit.slope * sx) / m;
    double rss = 0;
    for (int i = 0; i < m; ++i) {
      double yv = logf[i] + 1.5 * std::log(tc[i]);
      double r = yv - a - fit.slope * tc[i];
      rss += r * r;
    }
    double sigma2 = m > 2 ? rss / (m - 2) : 0.0;
    fit.slope_stderr = std::sqrt(sigma2 * m / det);
  }

  {
    // log f = const + exponent * log t + beta * t
    Eigen::MatrixXd X(m, 3);
    Eigen::VectorXd yv(m);
    for (int i = 0; i < m; ++i) {
      X(i, 0) = 1.0;
      X(i, 1) = std::log(tc[i]);
      X(i, 2) = tc[i];
      yv(i) = logf[i];
    }
    Eigen::MatrixXd XtX = X.transpose() * X;
    Eigen::VectorXd beta = XtX.ldlt().solve(X.transpose() * yv);
    fit.exponent = beta(1);
    double rss = (yv - X * beta).squaredNorm();
    double sigma2 = m > 3 ? rss / (m - 3) : 0.0;
    Eigen::MatrixXd cov = sigma2 * XtX.inverse();
    fit.exponent_stderr = std::sqrt(std::max(0.0, cov(1, 1)));
  }
  return fit;
}

AnalyticTable table_from_grid(const DensityGrid& grid, int from_row) {
  if (from_row < 0 || from_row >= static_cast<int>(grid.from_blocks.size()))
    throw ValidationError("table_from_grid: starting-phase row out of range");
  AnalyticTable t;
  t.y = grid.y;
  t.side = grid.side;
  t.density.resize(static_cast<Eigen::Index>(grid.y.size()), grid.values[0].cols());
  for (size_t p = 0; p < grid.y.size(); ++p) t.density.row(p) = grid.values[p].row(from_row);
  return t;
}

namespace {

// Piecewise-linear CDF per to-phase from the sampled densities. Duplicated
// grid points (the one-sided limits at y = x) contribute zero width, which
// realizes the jump.
struct SampledCdf {
  std::vector<double> y;
  Eigen::MatrixXd cum;  // points x n, unnormalized

  double total(int col) const { return cum(cum.rows() - 1, col); }
  double grand_total() const { return cum.row(cum.rows() - 1).sum(); }

  double at(double q, int col) const {
    if (q <= y.front()) return 0.0;
    if (q >= y.back()) return cum(cum.rows() - 1, col);
    auto it = std::upper_bound(y.begin(), y.end(), q);
    size_t i = static_cast<size_t>(it - y.begin()) - 1;
    while (i + 1 < y.size() && y[i + 1] == y[i]) ++i;  // land on the right limit
    if (i + 1 >= y.size()) return cum(cum.rows() - 1, col);
    double t = (q - y[i]) / (y[i + 1] - y[i]);
    return cum(i, col) + t * (cum(i + 1, col) - cum(i, col));
  }

  double at_marginal(double q) const {
    double acc = 0.0;
    for (int c = 0; c < cum.cols(); ++c) acc += at(q, c);
    return acc;
  }
};

SampledCdf build_cdf(const AnalyticTable& a) {
  SampledCdf cdf;
  cdf.y = a.y;
  const Eigen::Index pts = a.density.rows(), n = a.density.cols();
  cdf.cum = Eigen::MatrixXd::Zero(pts, n);
  for (Eigen::Index i = 1; i < pts; ++i) {
    double dy = a.y[i] - a.y[i - 1];
    cdf.cum.row(i) =
        cdf.cum.row(i - 1) + 0.5 * dy * (a.density.row(i) + a.density.row(i - 1));
  }
  return cdf;
}

}  // namespace

CompareResult compare_densities(const AnalyticTable& analytic, const EmpiricalDensity& empirical) {
  if (analytic.y.size() < 2) throw ValidationError("analytic table needs at least two points");
  if (analytic.density.cols() != empirical.mass.cols())
    throw ValidationError("compare: phase counts differ between analytic and empirical inputs");
  double emp_top = empirical.edges(empirical.edges.size() - 1);
  if (analytic.y.back() < emp_top - 1e-9)
    throw ValidationError("compare: analytic grid stops at " + std::to_string(analytic.y.back()) +
                          " but the empirical bins reach " + std::to_string(emp_top) +
                          "; regenerate the density with a larger y range");

  SampledCdf cdf = build_cdf(analytic);
  double total = cdf.grand_total();
  if (!(total > 0.0)) throw NumericalError("compare: analytic table integrates to zero");

  const int bins = static_cast<int>(empirical.edges.size()) - 1;
  const int n = static_cast<int>(empirical.mass.cols());

  CompareResult r;
  // Joint L1 over the finite bins plus the overflow row.
  for (int c = 0; c < n; ++c) {
    double prev = 0.0;
    for (int k = 0; k < bins; ++k) {
      double cur = cdf.at(empirical.edges(k + 1), c) / total;
      r.l1 += std::abs((cur - prev) - empirical.mass(k, c));
      prev = cur;
    }
    double overflow_a = cdf.total(c) / total - prev;
    r.l1 += std::abs(overflow_a - empirical.mass(bins, c));
  }
  // Marginal KS over the bin edges.
  double emp_cum = 0.0;
  for (int k = 1; k <= bins; ++k) {
    emp_cum += empirical.mass.row(k - 1).sum();
    double ana_cum = cdf.at_marginal(empirical.edges(k)) / total;
    r.ks = std::max(r.ks, std::abs(ana_cum - emp_cum));
  }
  return r;
}

}  // namespace yaglom
