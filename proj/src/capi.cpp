#include "yaglom/yaglom.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>

#include "critical.hpp"
#include "density.hpp"
#include "model.hpp"
#include "riccati.hpp"
#include "simulate.hpp"

using namespace yaglom;

namespace {

thread_local std::string g_last_error;

yg_status fail(yg_status code, const std::string& message) {
  g_last_error = message;
  return code;
}

template <typename Fn>
yg_status guarded(Fn&& fn) {
  try {
    fn();
    return YG_OK;
  } catch (const ValidationError& e) {
    return fail(YG_ERR_VALIDATION, e.what());
  } catch (const IoError& e) {
    return fail(YG_ERR_IO, e.what());
  } catch (const UnsupportedError& e) {
    return fail(YG_ERR_UNSUPPORTED, e.what());
  } catch (const NumericalError& e) {
    return fail(YG_ERR_NUMERIC, e.what());
  } catch (const std::exception& e) {
    return fail(YG_ERR_NUMERIC, std::string("unexpected failure: ") + e.what());
  }
}

void copy_row_major(const Eigen::MatrixXd& M, double* out) {
  if (!out) return;
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j) out[i * M.cols() + j] = M(i, j);
}

int block_of(const FluidModel& m, int phase_1based) {
  if (phase_1based < 1 || phase_1based > m.n)
    throw ValidationError("phase index " + std::to_string(phase_1based) + " out of range 1.." +
                          std::to_string(m.n));
  return m.to_block[phase_1based - 1];
}

}  // namespace

struct yg_model {
  FluidModel m;
};
struct yg_critical {
  CriticalPoint cp;
};
struct yg_grid {
  FluidModel model;  // phase mapping for the accessors
  DensityGrid grid;
};
struct yg_empirical {
  FluidModel model;
  EmpiricalDensity emp;
};

extern "C" {

const char* yg_version(void) { return "0.1.0"; }
const char* yg_last_error(void) { return g_last_error.c_str(); }

yg_status yg_model_load_file(const char* path, yg_model** out) {
  if (!path || !out) return fail(YG_ERR_VALIDATION, "null argument");
  return guarded([&] { *out = new yg_model{load_model_file(path)}; });
}

yg_status yg_model_load_json(const char* json_text, yg_model** out) {
  if (!json_text || !out) return fail(YG_ERR_VALIDATION, "null argument");
  return guarded([&] { *out = new yg_model{load_model(json_text)}; });
}

void yg_model_free(yg_model* m) { delete m; }

int yg_model_phase_count(const yg_model* m) { return m->m.n; }
int yg_model_ascending_count(const yg_model* m) { return m->m.n1; }
int yg_model_descending_count(const yg_model* m) { return m->m.n2; }
int yg_model_zero_count(const yg_model* m) { return m->m.n0; }

int yg_model_original_phase(const yg_model* m, int block_index) {
  if (block_index < 0 || block_index >= m->m.n) return 0;
  return m->m.to_original[block_index] + 1;
}

const char* yg_model_label(const yg_model* m, int phase) {
  if (m->m.labels.empty() || phase < 1 || phase > m->m.n) return nullptr;
  return m->m.labels[phase - 1].c_str();
}

double yg_model_rate(const yg_model* m, int phase) {
  if (phase < 1 || phase > m->m.n) return 0.0;
  return m->m.c_input(phase - 1);
}

yg_status yg_model_stability(const yg_model* m, double* xi, double* drift, int* stable) {
  return guarded([&] {
    StabilityReport rep = stability(m->m);
    if (xi)
      for (int i = 0; i < m->m.n; ++i) xi[i] = rep.xi_input(i);
    if (drift) *drift = rep.drift;
    if (stable) *stable = rep.stable ? 1 : 0;
  });
}

yg_status yg_psi(const yg_model* m, double s, double tol, int max_iter, double* psi, double* K,
                 double* D, double* residual, int* iterations) {
  return guarded([&] {
    RiccatiOptions opt;
    if (tol > 0.0) opt.tol = tol;
    if (max_iter > 0) opt.max_iter = max_iter;
    RiccatiSolution sol = solve_psi(m->m, s, opt);
    if (residual) *residual = sol.residual;
    if (iterations) *iterations = sol.iterations;
    if (!sol.converged)
      throw NumericalError("first-return solve did not converge at s = " + std::to_string(s) +
                           " (residual " + std::to_string(sol.residual) +
                           "); s may be below the singularity");
    copy_row_major(sol.psi, psi);
    copy_row_major(sol.K, K);
    copy_row_major(sol.D, D);
  });
}

yg_status yg_phi(const yg_model* m, double s, double tol, int max_iter, double* out) {
  return guarded([&] {
    RiccatiOptions opt;
    if (tol > 0.0) opt.tol = tol;
    if (max_iter > 0) opt.max_iter = max_iter;
    RiccatiSolution sol = solve_psi(m->m, s, opt);
    PhiMatrix p = phi(m->m, sol);
    copy_row_major(p.phi, out);
  });
}

yg_status yg_existence_probe(const yg_model* m, double s, int* exists) {
  if (!exists) return fail(YG_ERR_VALIDATION, "null argument");
  return guarded([&] { *exists = existence_probe(m->m, s) ? 1 : 0; });
}

yg_status yg_find_s_star(const yg_model* m, double tol, double* s_star) {
  if (!s_star) return fail(YG_ERR_VALIDATION, "null argument");
  return guarded([&] { *s_star = find_s_star(m->m, tol > 0.0 ? tol : 1e-10); });
}

yg_status yg_critical_solve(const yg_model* m, double h, double tol, yg_critical** out) {
  if (!out) return fail(YG_ERR_VALIDATION, "null argument");
  return guarded([&] {
    CriticalOptions opt;
    opt.h = h;
    if (tol > 0.0) opt.tol = tol;
    *out = new yg_critical{critical_point(m->m, opt)};
  });
}

void yg_critical_free(yg_critical* c) { delete c; }

double yg_critical_s_star(const yg_critical* c) { return c->cp.s_star; }
double yg_critical_gamma(const yg_critical* c) { return c->cp.gamma; }

yg_status yg_critical_get(const yg_critical* c, yg_crit_matrix which, double* out, size_t cap) {
  if (!out) return fail(YG_ERR_VALIDATION, "null argument");
  return guarded([&] {
    const CriticalPoint& cp = c->cp;
    Eigen::MatrixXd M;
    switch (which) {
      case YG_CRIT_PSI: M = cp.psi_star; break;
      case YG_CRIT_B: M = cp.B; break;
      case YG_CRIT_U: M = cp.U; break;
      case YG_CRIT_Y: M = cp.Y; break;
      case YG_CRIT_K: M = cp.K_star; break;
      case YG_CRIT_D: M = cp.D_star; break;
      case YG_CRIT_VEC_UP: M = cp.u; break;
      case YG_CRIT_VEC_DOWN: M = cp.v; break;
      default: throw ValidationError("unknown critical-point field");
    }
    if (cap < static_cast<size_t>(M.size()))
      throw ValidationError("output buffer too small: need " + std::to_string(M.size()) +
                            " doubles");
    copy_row_major(M, out);
  });
}

void yg_critical_diagnostics(const yg_critical* c, yg_crit_diagnostics* out) {
  if (!out) return;
  const auto& d = c->cp.diagnostics;
  out->gap_at_star = d.gap_at_star;
  out->eq2_residual = d.eq2_residual;
  out->eq1_residual_rel = d.eq1_residual_rel;
  out->y_check_rel = d.y_check_rel;
  out->fit_residual = d.fit_residual;
  out->rank1_rel = d.rank1_rel;
  out->h_used = d.h_used;
}

yg_status yg_tail_asymptote(const yg_critical* c, double* coefficient, double* rate,
                            double* exponent) {
  return guarded([&] {
    TailAsymptote t = psi_tail(c->cp);
    copy_row_major(t.coefficient, coefficient);
    if (rate) *rate = t.rate;
    if (exponent) *exponent = t.exponent;
  });
}

yg_status yg_level0_normalizer(const yg_model* m, const yg_critical* c, double* out) {
  if (!out) return fail(YG_ERR_VALIDATION, "null argument");
  return guarded([&] {
    ExpansionKernels k = kernels(m->m, c->cp, 0.0);
    for (int i = 0; i < m->m.n1; ++i) out[i] = k.H_tilde(i);
  });
}

yg_status yg_density(const yg_model* m, const yg_critical* c, double x, int from_phase,
                     double y_max, int steps, yg_grid** out) {
  if (!out) return fail(YG_ERR_VALIDATION, "null argument");
  return guarded([&] {
    const FluidModel& model = m->m;
    if (steps < 1) throw ValidationError("density grid needs steps >= 1");
    double ym = y_max > 0.0 ? y_max : default_y_max(c->cp);
    ExpansionKernels k = kernels(model, c->cp, x);
    std::vector<GridPoint> grid = make_y_grid(x, ym, steps);
    DensityGrid g = x == 0.0 ? mu0_density(model, c->cp, k, grid)
                             : mux_density(model, c->cp, k, x, grid);
    if (from_phase != 0) {
      int blk = block_of(model, from_phase);
      if (x == 0.0 && blk >= model.n1)
        throw ValidationError("a start at level 0 must use an ascending phase");
      if (x > 0.0 && blk >= model.n1 + model.n2)
        throw UnsupportedError(
            "starting phases with zero rate have no implemented conditional limit");
      int row = -1;
      for (size_t r = 0; r < g.from_blocks.size(); ++r)
        if (g.from_blocks[r] == blk) row = static_cast<int>(r);
      if (row < 0) throw ValidationError("starting phase not covered by this density");
      DensityGrid single;
      single.x = g.x;
      single.y_max = g.y_max;
      single.y = g.y;
      single.side = g.side;
      single.from_blocks = {blk};
      single.row_mass = g.row_mass.segment(row, 1);
      for (const auto& V : g.values) single.values.push_back(V.row(row));
      g = std::move(single);
    }
    *out = new yg_grid{model, std::move(g)};
  });
}

void yg_grid_free(yg_grid* g) { delete g; }

size_t yg_grid_points(const yg_grid* g) { return g->grid.y.size(); }
double yg_grid_y(const yg_grid* g, size_t point) { return g->grid.y[point]; }
char yg_grid_side(const yg_grid* g, size_t point) { return g->grid.side[point]; }
size_t yg_grid_from_count(const yg_grid* g) { return g->grid.from_blocks.size(); }

int yg_grid_from_phase(const yg_grid* g, size_t row) {
  return g->model.to_original[g->grid.from_blocks[row]] + 1;
}

double yg_grid_density(const yg_grid* g, size_t row, int to_phase, size_t point) {
  int blk = g->model.to_block[to_phase - 1];
  return g->grid.values[point](static_cast<Eigen::Index>(row), blk);
}

double yg_grid_row_mass(const yg_grid* g, size_t row) { return g->grid.row_mass(row); }
double yg_grid_y_max(const yg_grid* g) { return g->grid.y_max; }

yg_status yg_simulate(const yg_model* m, const yg_sim_config* cfg, yg_empirical** out) {
  if (!cfg || !out) return fail(YG_ERR_VALIDATION, "null argument");
  return guarded([&] {
    SimConfig c;
    c.x0 = cfg->x0;
    c.phase0 = block_of(m->m, cfg->phase0);
    c.t = cfg->t;
    c.paths = cfg->paths;
    c.seed = cfg->seed;
    c.bins = cfg->bins;
    c.y_max = cfg->y_max;
    *out = new yg_empirical{m->m, simulate_conditional(m->m, c)};
  });
}

void yg_empirical_free(yg_empirical* e) { delete e; }

int yg_empirical_bins(const yg_empirical* e) {
  return static_cast<int>(e->emp.edges.size()) - 1;
}

void yg_empirical_edges(const yg_empirical* e, int bin, double* lo, double* hi) {
  int finite = static_cast<int>(e->emp.edges.size()) - 1;
  if (bin < finite) {
    if (lo) *lo = e->emp.edges(bin);
    if (hi) *hi = e->emp.edges(bin + 1);
  } else {
    if (lo) *lo = e->emp.edges(finite);
    if (hi) *hi = std::numeric_limits<double>::infinity();
  }
}

double yg_empirical_mass(const yg_empirical* e, int bin, int to_phase) {
  int blk = e->model.to_block[to_phase - 1];
  return e->emp.mass(bin, blk);
}

uint64_t yg_empirical_survivors(const yg_empirical* e) { return e->emp.survivors; }
uint64_t yg_empirical_paths(const yg_empirical* e) { return e->emp.paths; }
double yg_empirical_survival(const yg_empirical* e) { return e->emp.survival; }
double yg_empirical_ci_halfwidth(const yg_empirical* e) { return e->emp.ci_halfwidth; }

yg_status yg_compare_tables(const double* a_y, const char* a_side, const double* a_density,
                            const int* a_to, size_t a_points, size_t a_phases,
                            const double* e_lo, const double* e_hi, const int* e_to,
                            const double* e_mass, size_t e_rows, double* l1, double* ks) {
  if (!a_y || !a_density || !a_to || !e_lo || !e_hi || !e_to || !e_mass)
    return fail(YG_ERR_VALIDATION, "null argument");
  return guarded([&] {
    // Column space: the union of the phase labels seen on either side.
    std::vector<int> labels(a_to, a_to + a_phases);
    for (size_t r = 0; r < e_rows; ++r) labels.push_back(e_to[r]);
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    auto column = [&](int label) {
      return static_cast<int>(std::lower_bound(labels.begin(), labels.end(), label) -
                              labels.begin());
    };
    const int n = static_cast<int>(labels.size());

    AnalyticTable table;
    table.y.assign(a_y, a_y + a_points);
    table.side.assign(a_points, '-');
    if (a_side) table.side.assign(a_side, a_side + a_points);
    table.density = Eigen::MatrixXd::Zero(a_points, n);
    for (size_t c = 0; c < a_phases; ++c) {
      int col = column(a_to[c]);
      for (size_t p = 0; p < a_points; ++p)
        table.density(p, col) = a_density[p * a_phases + c];
    }

    // Reassemble the empirical histogram; rows arrive (lo, hi, phase, mass).
    std::vector<double> edges;
    for (size_t r = 0; r < e_rows; ++r) {
      if (std::isinf(e_hi[r])) continue;
      edges.push_back(e_lo[r]);
      edges.push_back(e_hi[r]);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end(),
                            [](double a, double b) {
                              return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b));
                            }),
                edges.end());
    if (edges.size() < 2) throw ValidationError("empirical table has no finite bins");
    EmpiricalDensity emp;
    emp.edges = Eigen::Map<Eigen::VectorXd>(edges.data(), edges.size());
    int bins = static_cast<int>(edges.size()) - 1;
    emp.mass = Eigen::MatrixXd::Zero(bins + 1, n);
    auto find_edge = [&](double v) {
      for (int q = 0; q <= bins; ++q)
        if (std::abs(emp.edges(q) - v) <= 1e-12 * std::max(1.0, std::abs(v))) return q;
      throw ValidationError("empirical bins are not aligned on a common edge set");
    };
    for (size_t r = 0; r < e_rows; ++r) {
      int k = std::isinf(e_hi[r]) ? bins : find_edge(e_lo[r]);
      emp.mass(k, column(e_to[r])) += e_mass[r];
    }
    CompareResult res = compare_densities(table, emp);
    if (l1) *l1 = res.l1;
    if (ks) *ks = res.ks;
  });
}

yg_status yg_compare(const yg_grid* g, size_t from_row, const yg_empirical* e, double* l1,
                     double* ks) {
  return guarded([&] {
    CompareResult res =
        compare_densities(table_from_grid(g->grid, static_cast<int>(from_row)), e->emp);
    if (l1) *l1 = res.l1;
    if (ks) *ks = res.ks;
  });
}

yg_status yg_compare_histograms(const double* a_lo, const double* a_hi, const int* a_to,
                                const double* a_mass, size_t a_rows, const double* e_lo,
                                const double* e_hi, const int* e_to, const double* e_mass,
                                size_t e_rows, double* l1, double* ks) {
  if (!a_lo || !a_hi || !a_to || !a_mass || !e_lo || !e_hi || !e_to || !e_mass)
    return fail(YG_ERR_VALIDATION, "null argument");
  return guarded([&] {
    auto edge_key = [](double lo, double hi) { return std::make_pair(lo, hi); };
    std::vector<std::pair<double, double>> bins;
    for (size_t r = 0; r < a_rows; ++r) bins.push_back(edge_key(a_lo[r], a_hi[r]));
    std::sort(bins.begin(), bins.end());
    bins.erase(std::unique(bins.begin(), bins.end()), bins.end());
    for (size_t r = 0; r < e_rows; ++r) {
      if (!std::binary_search(bins.begin(), bins.end(), edge_key(e_lo[r], e_hi[r])))
        throw ValidationError("histograms do not share a common edge set");
    }
    auto bin_of = [&](double lo, double hi) {
      return static_cast<size_t>(
          std::lower_bound(bins.begin(), bins.end(), edge_key(lo, hi)) - bins.begin());
    };
    std::vector<int> labels(a_to, a_to + a_rows);
    labels.insert(labels.end(), e_to, e_to + e_rows);
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    auto column = [&](int label) {
      return static_cast<size_t>(std::lower_bound(labels.begin(), labels.end(), label) -
                                 labels.begin());
    };
    Eigen::MatrixXd am = Eigen::MatrixXd::Zero(bins.size(), labels.size());
    Eigen::MatrixXd em = Eigen::MatrixXd::Zero(bins.size(), labels.size());
    for (size_t r = 0; r < a_rows; ++r)
      am(bin_of(a_lo[r], a_hi[r]), column(a_to[r])) += a_mass[r];
    for (size_t r = 0; r < e_rows; ++r)
      em(bin_of(e_lo[r], e_hi[r]), column(e_to[r])) += e_mass[r];
    double l1v = (am - em).cwiseAbs().sum();
    double ksv = 0.0, cum = 0.0;
    for (Eigen::Index b = 0; b < am.rows(); ++b) {
      cum += am.row(b).sum() - em.row(b).sum();
      ksv = std::max(ksv, std::abs(cum));
    }
    if (l1) *l1 = l1v;
    if (ks) *ks = ksv;
  });
}

yg_status yg_return_time_tail(const yg_model* m, uint64_t paths, uint64_t seed, int phase0,
                              double t_lo, double t_hi, int bins, yg_tail_fit* out) {
  if (!out) return fail(YG_ERR_VALIDATION, "null argument");
  return guarded([&] {
    TailFit fit = return_time_tail(m->m, paths, seed, block_of(m->m, phase0), t_lo, t_hi,
                                   bins > 0 ? bins : 24);
    out->slope = fit.slope;
    out->slope_stderr = fit.slope_stderr;
    out->exponent = fit.exponent;
    out->exponent_stderr = fit.exponent_stderr;
    out->in_window = fit.in_window;
    out->bins_used = fit.bins_used;
  });
}

}  // extern "C"
