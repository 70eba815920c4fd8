// Command-line front end; talks to the solver library exclusively through
// the public C interface.
#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "yaglom/yaglom.h"

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitNumeric = 2;
constexpr int kExitIo = 3;

int exit_code_for(yg_status st) {
  switch (st) {
    case YG_OK: return 0;
    case YG_ERR_NUMERIC: return kExitNumeric;
    case YG_ERR_IO: return kExitIo;
    default: return kExitValidation;
  }
}

struct CliFailure {
  int code;
  std::string message;
};

void require_ok(yg_status st) {
  if (st != YG_OK) throw CliFailure{exit_code_for(st), yg_last_error()};
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt10(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string matrix_str(const std::vector<double>& v, int rows, int cols) {
  std::string out = "[";
  for (int i = 0; i < rows; ++i) {
    if (i) out += "; ";
    for (int j = 0; j < cols; ++j) {
      if (j) out += ", ";
      out += fmt10(v[i * cols + j]);
    }
  }
  return out + "]";
}

using ModelPtr = std::unique_ptr<yg_model, decltype(&yg_model_free)>;
using CriticalPtr = std::unique_ptr<yg_critical, decltype(&yg_critical_free)>;
using GridPtr = std::unique_ptr<yg_grid, decltype(&yg_grid_free)>;
using EmpiricalPtr = std::unique_ptr<yg_empirical, decltype(&yg_empirical_free)>;

ModelPtr load_model(const std::string& path) {
  yg_model* raw = nullptr;
  require_ok(yg_model_load_file(path.c_str(), &raw));
  return ModelPtr(raw, &yg_model_free);
}

CriticalPtr solve_critical(const yg_model* m, double h, double tol) {
  yg_critical* raw = nullptr;
  require_ok(yg_critical_solve(m, h, tol, &raw));
  return CriticalPtr(raw, &yg_critical_free);
}

std::vector<double> crit_matrix(const yg_critical* c, yg_crit_matrix which, size_t len) {
  std::vector<double> v(len);
  require_ok(yg_critical_get(c, which, v.data(), len));
  return v;
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CliFailure{kExitIo, "cannot open output file: " + path};
  out << content;
  if (!out.good()) throw CliFailure{kExitIo, "cannot write output file: " + path};
}

void write_manifest(const std::string& csv_path, const std::string& command,
                    const std::string& model_path, const nlohmann::json& params,
                    const nlohmann::json& seeds, double wall_seconds) {
  nlohmann::json doc;
  doc["command"] = command;
  doc["model"] = model_path;
  doc["parameters"] = params;
  doc["tool_version"] = yg_version();
  doc["seeds"] = seeds;
  doc["wall_time_s"] = wall_seconds;
  doc["output"] = csv_path;
  write_file(csv_path + ".manifest.json", doc.dump(2) + "\n");
}

/* ----------------------------------------------------------- subcommands */

int cmd_validate(const std::string& model_path) {
  ModelPtr m = load_model(model_path);
  int n = yg_model_phase_count(m.get());
  std::vector<double> xi(n);
  double drift;
  int stable;
  require_ok(yg_model_stability(m.get(), xi.data(), &drift, &stable));

  std::string s1, s2, s0;
  for (int p = 1; p <= n; ++p) {
    double c = yg_model_rate(m.get(), p);
    std::string& dst = c > 0 ? s1 : c < 0 ? s2 : s0;
    if (!dst.empty()) dst += ", ";
    dst += std::to_string(p);
    if (const char* label = yg_model_label(m.get(), p)) dst += std::string(" (") + label + ")";
  }
  std::cout << "phases: " << n << " (ascending " << yg_model_ascending_count(m.get())
            << ", descending " << yg_model_descending_count(m.get()) << ", zero "
            << yg_model_zero_count(m.get()) << ")\n";
  std::cout << "S1 = {" << s1 << "}\nS2 = {" << s2 << "}\nS0 = {" << s0 << "}\n";
  std::cout << "xi = [";
  for (int p = 0; p < n; ++p) std::cout << (p ? ", " : "") << fmt10(xi[p]);
  std::cout << "]\n";
  std::cout << "drift = " << fmt10(drift) << "\n";
  std::cout << "stable: " << (stable ? "yes" : "no") << "\n";
  if (!stable) throw CliFailure{kExitValidation, "model is not stable (drift >= 0)"};
  return 0;
}

int cmd_psi(const std::string& model_path, double s, double tol, int max_iter) {
  ModelPtr m = load_model(model_path);
  int n1 = yg_model_ascending_count(m.get());
  int n2 = yg_model_descending_count(m.get());
  std::vector<double> psi(n1 * n2), K(n1 * n1), D(n2 * n2);
  double residual;
  int iterations;
  require_ok(yg_psi(m.get(), s, tol, max_iter, psi.data(), K.data(), D.data(), &residual,
                    &iterations));
  std::cout << "s = " << fmt10(s) << "\n";
  std::cout << "converged in " << iterations << " iterations, residual = " << fmt10(residual)
            << "\n";
  std::cout << "Psi = " << matrix_str(psi, n1, n2) << "\n";
  std::cout << "K = " << matrix_str(K, n1, n1) << "\n";
  std::cout << "D = " << matrix_str(D, n2, n2) << "\n";
  std::vector<double> phi(n1 * n2);
  if (yg_phi(m.get(), s, tol, max_iter, phi.data()) == YG_OK) {
    std::cout << "Phi = " << matrix_str(phi, n1, n2) << "\n";
  } else {
    std::cout << "Phi: diverges (" << yg_last_error() << ")\n";
  }
  return 0;
}

int cmd_critical(const std::string& model_path, double h, double tol) {
  ModelPtr m = load_model(model_path);
  Stopwatch watch;
  CriticalPtr cp = solve_critical(m.get(), h, tol);
  int n1 = yg_model_ascending_count(m.get());
  int n2 = yg_model_descending_count(m.get());

  std::cout << "s* = " << fmt(yg_critical_s_star(cp.get())) << "\n";
  std::cout << "gamma = " << fmt(yg_critical_gamma(cp.get())) << "\n";
  std::cout << "Psi(s*) = " << matrix_str(crit_matrix(cp.get(), YG_CRIT_PSI, n1 * n2), n1, n2)
            << "\n";
  std::cout << "B = " << matrix_str(crit_matrix(cp.get(), YG_CRIT_B, n1 * n2), n1, n2) << "\n";
  std::cout << "U = " << matrix_str(crit_matrix(cp.get(), YG_CRIT_U, n1 * n2), n1, n2) << "\n";
  std::cout << "Y = " << matrix_str(crit_matrix(cp.get(), YG_CRIT_Y, n1 * n2), n1, n2) << "\n";
  std::cout << "K(s*) = " << matrix_str(crit_matrix(cp.get(), YG_CRIT_K, n1 * n1), n1, n1)
            << "\n";
  std::cout << "D(s*) = " << matrix_str(crit_matrix(cp.get(), YG_CRIT_D, n2 * n2), n2, n2)
            << "\n";
  std::vector<double> htilde(n1);
  require_ok(yg_level0_normalizer(m.get(), cp.get(), htilde.data()));
  std::cout << "H~ = " << matrix_str(htilde, n1, 1) << "\n";

  yg_crit_diagnostics diag;
  yg_critical_diagnostics(cp.get(), &diag);
  std::cout << "residual ||K B + B D|| = " << fmt10(diag.eq2_residual) << "\n";
  std::cout << "residual of the balance equation (independent Y) = "
            << fmt10(diag.eq1_residual_rel) << " (relative)\n";
  std::cout << "diagnostics: gap = " << fmt10(diag.gap_at_star)
            << ", fit = " << fmt10(diag.fit_residual) << ", rank1 = " << fmt10(diag.rank1_rel)
            << ", h = " << fmt10(diag.h_used) << "\n";
  std::cout << "elapsed = " << fmt10(watch.seconds()) << " s\n";
  return 0;
}

int cmd_density(const std::string& model_path, double x, int phase, double y_max, int steps,
                const std::string& out_path, const std::string& gnuplot_path) {
  ModelPtr m = load_model(model_path);
  Stopwatch watch;
  CriticalPtr cp = solve_critical(m.get(), 0, 0);
  yg_grid* raw = nullptr;
  require_ok(yg_density(m.get(), cp.get(), x, phase, y_max, steps, &raw));
  GridPtr grid(raw, &yg_grid_free);

  int n = yg_model_phase_count(m.get());
  std::string csv = "y,from_phase,to_phase,density,side\n";
  size_t points = yg_grid_points(grid.get());
  size_t rows = yg_grid_from_count(grid.get());
  for (size_t p = 0; p < points; ++p) {
    for (size_t r = 0; r < rows; ++r) {
      int from = yg_grid_from_phase(grid.get(), r);
      for (int to = 1; to <= n; ++to) {
        csv += fmt(yg_grid_y(grid.get(), p));
        csv += ',';
        csv += std::to_string(from);
        csv += ',';
        csv += std::to_string(to);
        csv += ',';
        csv += fmt(yg_grid_density(grid.get(), r, to, p));
        csv += ',';
        csv += yg_grid_side(grid.get(), p);
        csv += '\n';
      }
    }
  }
  write_file(out_path, csv);

  nlohmann::json params{{"x", x},
                        {"phase", phase == 0 ? nlohmann::json(nullptr) : nlohmann::json(phase)},
                        {"ymax", y_max},
                        {"steps", steps},
                        {"s_star", yg_critical_s_star(cp.get())}};
  write_manifest(out_path, "density", model_path, params, nlohmann::json::array(),
                 watch.seconds());

  for (size_t r = 0; r < rows; ++r)
    std::cout << "from phase " << yg_grid_from_phase(grid.get(), r)
              << ": mass = " << fmt10(yg_grid_row_mass(grid.get(), r)) << "\n";
  std::cout << "wrote " << out_path << " (" << points << " points)\n";

  if (!gnuplot_path.empty()) {
    std::ostringstream gp;
    gp << "# conditional density curves\n";
    gp << "set datafile separator \",\"\n";
    gp << "set xlabel \"level y\"\n";
    gp << "set ylabel \"conditional density\"\n";
    gp << "set key outside\n";
    gp << "plot \\\n";
    bool first = true;
    for (size_t r = 0; r < rows; ++r) {
      int from = yg_grid_from_phase(grid.get(), r);
      for (int to = 1; to <= n; ++to) {
        if (!first) gp << ", \\\n";
        first = false;
        gp << "  \"" << out_path << "\" skip 1 using 1:(($2==" << from << " && $3==" << to
           << ") ? $4 : 1/0) with lines title \"from " << from << " to " << to << "\"";
      }
    }
    gp << "\n";
    write_file(gnuplot_path, gp.str());
    std::cout << "wrote " << gnuplot_path << "\n";
  }
  return 0;
}

int cmd_simulate(const std::string& model_path, double x, int phase, double t, uint64_t paths,
                 uint64_t seed, int bins, double y_max, const std::string& out_path) {
  ModelPtr m = load_model(model_path);
  Stopwatch watch;
  yg_sim_config cfg{};
  cfg.x0 = x;
  cfg.phase0 = phase;
  cfg.t = t;
  cfg.paths = paths;
  cfg.seed = seed;
  cfg.bins = bins;
  cfg.y_max = y_max;
  yg_empirical* raw = nullptr;
  require_ok(yg_simulate(m.get(), &cfg, &raw));
  EmpiricalPtr emp(raw, &yg_empirical_free);

  int n = yg_model_phase_count(m.get());
  uint64_t survivors = yg_empirical_survivors(emp.get());
  std::string csv = "y_lo,y_hi,to_phase,mass,survivors\n";
  int total_bins = yg_empirical_bins(emp.get());
  for (int b = 0; b <= total_bins; ++b) {
    double lo, hi;
    yg_empirical_edges(emp.get(), b, &lo, &hi);
    for (int to = 1; to <= n; ++to) {
      csv += fmt(lo);
      csv += ',';
      csv += fmt(hi);
      csv += ',';
      csv += std::to_string(to);
      csv += ',';
      csv += fmt(yg_empirical_mass(emp.get(), b, to));
      csv += ',';
      csv += std::to_string(survivors);
      csv += '\n';
    }
  }
  write_file(out_path, csv);
  nlohmann::json params{{"x", x},         {"phase", phase}, {"t", t},
                        {"paths", paths}, {"bins", bins},   {"ymax", y_max}};
  write_manifest(out_path, "simulate", model_path, params, nlohmann::json::array({seed}),
                 watch.seconds());

  std::cout << "paths = " << paths << ", survivors = " << survivors
            << ", survival = " << fmt10(yg_empirical_survival(emp.get())) << " +/- "
            << fmt10(yg_empirical_ci_halfwidth(emp.get())) << "\n";
  std::cout << "wrote " << out_path << "\n";
  if (survivors == 0) std::cout << "warning: zero survivors; increase paths or lower t\n";
  return 0;
}

/* CSV ingestion for compare. */

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

std::vector<std::vector<std::string>> read_csv(const std::string& path, std::string* header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliFailure{kExitIo, "cannot open CSV: " + path};
  std::string line;
  std::vector<std::vector<std::string>> rows;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first) {
      *header = line;
      first = false;
      continue;
    }
    rows.push_back(split_csv_line(line));
  }
  if (first) throw CliFailure{kExitIo, "empty CSV: " + path};
  return rows;
}

struct AnalyticCsv {
  std::vector<double> y;
  std::vector<char> side;
  std::vector<int> to_phases;
  std::vector<double> density;  // points x phases, row-major
};

AnalyticCsv parse_analytic(const std::string& path) {
  std::string header;
  auto rows = read_csv(path, &header);
  AnalyticCsv out;
  if (header == "y,from_phase,to_phase,density,side") {
    int from_seen = 0;
    std::vector<std::tuple<double, char, int, double>> entries;
    for (const auto& r : rows) {
      if (r.size() != 5) throw CliFailure{kExitValidation, "malformed analytic CSV row"};
      int from = std::stoi(r[1]);
      if (from_seen == 0) from_seen = from;
      if (from != from_seen)
        throw CliFailure{kExitValidation,
                         "analytic CSV contains several starting phases; regenerate with "
                         "--phase to select one"};
      entries.emplace_back(std::stod(r[0]), r[4].empty() ? '-' : r[4][0], std::stoi(r[2]),
                           std::stod(r[3]));
    }
    for (const auto& [yv, side, to, dens] : entries) {
      (void)yv;
      (void)side;
      (void)dens;
      if (std::find(out.to_phases.begin(), out.to_phases.end(), to) == out.to_phases.end())
        out.to_phases.push_back(to);
    }
    size_t cols = out.to_phases.size();
    if (cols == 0 || entries.size() % cols != 0)
      throw CliFailure{kExitValidation, "analytic CSV rows are not grouped per grid point"};
    for (size_t i = 0; i < entries.size(); i += cols) {
      out.y.push_back(std::get<0>(entries[i]));
      out.side.push_back(std::get<1>(entries[i]));
      for (size_t c = 0; c < cols; ++c) out.density.push_back(std::get<3>(entries[i + c]));
    }
    return out;
  }
  if (header == "y_lo,y_hi,to_phase,mass,survivors") {
    // Histogram reinterpreted as a piecewise-constant density.
    struct Bin {
      double lo, hi;
      std::vector<double> mass;
    };
    std::vector<Bin> bins;
    for (const auto& r : rows) {
      if (r.size() != 5) throw CliFailure{kExitValidation, "malformed empirical CSV row"};
      double lo = std::stod(r[0]), hi = std::stod(r[1]);
      if (std::isinf(hi)) continue;  // the overflow bin has no density representation
      int to = std::stoi(r[2]);
      if (std::find(out.to_phases.begin(), out.to_phases.end(), to) == out.to_phases.end())
        out.to_phases.push_back(to);
      if (bins.empty() || bins.back().lo != lo) bins.push_back({lo, hi, {}});
      bins.back().mass.push_back(std::stod(r[3]));
    }
    for (const auto& b : bins) {
      double w = b.hi - b.lo;
      out.y.push_back(b.lo);
      out.side.push_back('l');
      for (double mp : b.mass) out.density.push_back(mp / w);
      out.y.push_back(b.hi);
      out.side.push_back('r');
      for (double mp : b.mass) out.density.push_back(mp / w);
    }
    return out;
  }
  throw CliFailure{kExitValidation, "unrecognized CSV header: " + header};
}

struct HistogramCsv {
  std::vector<double> lo, hi, mass;
  std::vector<int> to;
};

HistogramCsv parse_histogram(const std::string& path) {
  std::string header;
  auto rows = read_csv(path, &header);
  if (header != "y_lo,y_hi,to_phase,mass,survivors")
    throw CliFailure{kExitValidation, "expected an empirical CSV: " + path};
  HistogramCsv out;
  for (const auto& r : rows) {
    if (r.size() != 5) throw CliFailure{kExitValidation, "malformed empirical CSV row"};
    out.lo.push_back(std::stod(r[0]));
    out.hi.push_back(std::stod(r[1]));
    out.to.push_back(std::stoi(r[2]));
    out.mass.push_back(std::stod(r[3]));
  }
  return out;
}

int cmd_compare(const std::string& analytic_path, const std::string& empirical_path,
                double ks_threshold) {
  std::string header;
  read_csv(analytic_path, &header);
  HistogramCsv e = parse_histogram(empirical_path);

  double l1, ks;
  if (header == "y_lo,y_hi,to_phase,mass,survivors") {
    // Histogram against histogram: exact bin-mass distances.
    HistogramCsv a = parse_histogram(analytic_path);
    require_ok(yg_compare_histograms(a.lo.data(), a.hi.data(), a.to.data(), a.mass.data(),
                                     a.lo.size(), e.lo.data(), e.hi.data(), e.to.data(),
                                     e.mass.data(), e.lo.size(), &l1, &ks));
  } else {
    AnalyticCsv a = parse_analytic(analytic_path);
    require_ok(yg_compare_tables(a.y.data(), a.side.data(), a.density.data(),
                                 a.to_phases.data(), a.y.size(), a.to_phases.size(),
                                 e.lo.data(), e.hi.data(), e.to.data(), e.mass.data(),
                                 e.lo.size(), &l1, &ks));
  }
  std::cout << "l1 = " << fmt(l1) << "\n";
  std::cout << "ks = " << fmt(ks) << "\n";
  if (!(ks < ks_threshold))
    throw CliFailure{kExitValidation,
                     "ks = " + fmt(ks) + " is not below the threshold " + fmt(ks_threshold)};
  return 0;
}

int cmd_tail(const std::string& model_path, uint64_t paths, uint64_t seed,
             const std::string& window, int bins, int phase) {
  auto colon = window.find(':');
  if (colon == std::string::npos)
    throw CliFailure{kExitValidation, "--window expects t_lo:t_hi"};
  double t_lo = std::stod(window.substr(0, colon));
  double t_hi = std::stod(window.substr(colon + 1));

  ModelPtr m = load_model(model_path);
  if (phase == 0) phase = yg_model_original_phase(m.get(), 0);  // first ascending phase
  double s_star;
  require_ok(yg_find_s_star(m.get(), 0, &s_star));
  yg_tail_fit fit{};
  require_ok(yg_return_time_tail(m.get(), paths, seed, phase, t_lo, t_hi, bins, &fit));

  double rel = std::abs(fit.slope - s_star) / std::abs(s_star);
  std::cout << "fitted slope = " << fmt(fit.slope) << " +/- " << fmt10(fit.slope_stderr) << "\n";
  std::cout << "s* = " << fmt(s_star) << "\n";
  std::cout << "relative error = " << fmt10(rel) << "\n";
  std::cout << "fitted power = " << fmt10(fit.exponent) << " +/- " << fmt10(fit.exponent_stderr)
            << " (expected -1.5)\n";
  std::cout << "samples in window = " << fit.in_window << " across " << fit.bins_used
            << " bins\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conditional limits of a Markov-modulated fluid queue given a long busy period"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(yg_version()));

  std::string model_path, out_path, gnuplot_path, window, analytic_path, empirical_path;
  double s = 0.0, tol = 0.0, h = 0.0, x = 0.0, y_max = 0.0, t = 0.0, ks_threshold = 0.1;
  int max_iter = 0, steps = 400, bins = 0, phase = 0;
  uint64_t paths = 0, seed = 0;

  auto* validate = app.add_subcommand("validate", "Check a model document and report stability");
  validate->add_option("model", model_path)->required();

  auto* psi = app.add_subcommand("psi", "First-return transform at a point s");
  psi->add_option("model", model_path)->required();
  psi->add_option("--s", s)->required();
  psi->add_option("--tol", tol)->default_val(1e-12);
  psi->add_option("--max-iter", max_iter)->default_val(20000);

  auto* critical = app.add_subcommand("critical", "Singularity and expansion data");
  critical->set_help_flag("--help", "Print help");  // frees -h for the step option
  critical->add_option("model", model_path)->required();
  critical->add_option("--h", h)->default_val(0.0);
  critical->add_option("--tol", tol)->default_val(1e-10);

  auto* density = app.add_subcommand("density", "Conditional density table");
  density->add_option("model", model_path)->required();
  density->add_option("--x", x)->required()->check(CLI::NonNegativeNumber);
  density->add_option("--phase", phase)->default_val(0);
  density->add_option("--ymax", y_max)->required();
  density->add_option("--steps", steps)->default_val(400);
  density->add_option("--out", out_path)->required();
  density->add_option("--gnuplot", gnuplot_path);

  auto* simulate = app.add_subcommand("simulate", "Conditioned Monte Carlo histogram");
  simulate->add_option("model", model_path)->required();
  simulate->add_option("--x", x)->required();
  simulate->add_option("--phase", phase)->required();
  simulate->add_option("--t", t)->required();
  simulate->add_option("--paths", paths)->required();
  simulate->add_option("--seed", seed)->required();
  simulate->add_option("--bins", bins)->default_val(80);
  simulate->add_option("--ymax", y_max)->default_val(0.0);
  simulate->add_option("--out", out_path)->required();

  auto* compare = app.add_subcommand("compare", "Distances between analytic and empirical CSVs");
  compare->add_option("analytic", analytic_path)->required();
  compare->add_option("empirical", empirical_path)->required();
  compare->add_option("--ks-threshold", ks_threshold)->default_val(0.1);

  auto* tail = app.add_subcommand("tail", "Busy-period tail fit against the decay rate");
  tail->add_option("model", model_path)->required();
  tail->add_option("--paths", paths)->required();
  tail->add_option("--seed", seed)->required();
  tail->add_option("--window", window)->required();
  tail->add_option("--bins", bins)->default_val(24);
  tail->add_option("--phase", phase)->default_val(0);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  try {
    if (validate->parsed()) return cmd_validate(model_path);
    if (psi->parsed()) return cmd_psi(model_path, s, tol, max_iter);
    if (critical->parsed()) return cmd_critical(model_path, h, tol);
    if (density->parsed())
      return cmd_density(model_path, x, phase, y_max, steps, out_path, gnuplot_path);
    if (simulate->parsed())
      return cmd_simulate(model_path, x, phase, t, paths, seed, bins, y_max, out_path);
    if (compare->parsed()) return cmd_compare(analytic_path, empirical_path, ks_threshold);
    if (tail->parsed()) return cmd_tail(model_path, paths, seed, window, bins, phase);
  } catch (const CliFailure& f) {
    std::cerr << "error: " << f.message << "\n";
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return 0;
}
