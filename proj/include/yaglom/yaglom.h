/* Public C interface to the fluid-queue conditional-limit library.
 *
 * All functions return yg_status; YG_OK means success and anything else left
 * a thread-local message retrievable through yg_last_error(). Matrix output
 * buffers are row-major; phase indices crossing this boundary are 1-based in
 * the order of the model document.
 */
#ifndef YAGLOM_YAGLOM_H
#define YAGLOM_YAGLOM_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum yg_status {
  YG_OK = 0,
  YG_ERR_VALIDATION = 1, /* bad document, bad arguments, model property violated */
  YG_ERR_NUMERIC = 2,    /* iteration failure, singular operator, out-of-tolerance */
  YG_ERR_IO = 3,         /* unreadable input */
  YG_ERR_UNSUPPORTED = 4 /* well-posed request outside the implemented theory */
} yg_status;

const char* yg_version(void);
const char* yg_last_error(void);

/* ------------------------------------------------------------------ model */

typedef struct yg_model yg_model;

yg_status yg_model_load_file(const char* path, yg_model** out);
yg_status yg_model_load_json(const char* json_text, yg_model** out);
void yg_model_free(yg_model* m);

int yg_model_phase_count(const yg_model* m);
int yg_model_ascending_count(const yg_model* m);  /* rates > 0 */
int yg_model_descending_count(const yg_model* m); /* rates < 0 */
int yg_model_zero_count(const yg_model* m);       /* rates = 0 */
/* 1-based input index of the phase at `block_index` (ascending block first,
 * then descending, then zero-rate). */
int yg_model_original_phase(const yg_model* m, int block_index);
/* Label of a phase (1-based input index); NULL when the document had none. */
const char* yg_model_label(const yg_model* m, int phase);
double yg_model_rate(const yg_model* m, int phase);

/* Stationary vector (input order, length n), mean drift, stability flag. */
yg_status yg_model_stability(const yg_model* m, double* xi, double* drift, int* stable);

/* --------------------------------------------------- first-return solve */

/* Minimal nonnegative first-return transform at s. psi is n1 x n2, K n1 x n1,
 * D n2 x n2 (block order). Any output pointer may be NULL. Fails with
 * YG_ERR_NUMERIC when the iteration does not converge (s below the
 * singularity, or inadmissible). */
yg_status yg_psi(const yg_model* m, double s, double tol, int max_iter, double* psi, double* K,
                 double* D, double* residual, int* iterations);

/* d psi / ds at s (n1 x n2, entrywise negative). */
yg_status yg_phi(const yg_model* m, double s, double tol, int max_iter, double* phi);

/* 1 iff the minimal nonnegative solution exists at s. */
yg_status yg_existence_probe(const yg_model* m, double s, int* exists);

yg_status yg_find_s_star(const yg_model* m, double tol, double* s_star);

/* --------------------------------------------------------- critical point */

typedef struct yg_critical yg_critical;

typedef enum yg_crit_matrix {
  YG_CRIT_PSI = 0,     /* n1 x n2 */
  YG_CRIT_B = 1,       /* n1 x n2 */
  YG_CRIT_U = 2,       /* n1 x n2 */
  YG_CRIT_Y = 3,       /* n1 x n2 */
  YG_CRIT_K = 4,       /* n1 x n1 */
  YG_CRIT_D = 5,       /* n2 x n2 */
  YG_CRIT_VEC_UP = 6,  /* n1, right eigenvector of K(s*) */
  YG_CRIT_VEC_DOWN = 7 /* n2, left eigenvector of D(s*) */
} yg_crit_matrix;

typedef struct yg_crit_diagnostics {
  double gap_at_star;      /* eigenvalue gap at s* */
  double eq2_residual;     /* ||K B + B D||_inf */
  double eq1_residual_rel; /* defect of B Q21 B = U - Y against the independent Y */
  double y_check_rel;      /* independent Y estimate vs U - B Q21 B */
  double fit_residual;     /* extrapolation-order disagreement on B */
  double rank1_rel;        /* distance of B from the eigenvector dyad */
  double h_used;
} yg_crit_diagnostics;

/* h <= 0 and tol <= 0 pick the defaults (1e-5 scaled and 1e-10). */
yg_status yg_critical_solve(const yg_model* m, double h, double tol, yg_critical** out);
void yg_critical_free(yg_critical* c);

double yg_critical_s_star(const yg_critical* c);
double yg_critical_gamma(const yg_critical* c);
/* Copies the requested matrix (row-major) into out; cap is the buffer length
 * in doubles. */
yg_status yg_critical_get(const yg_critical* c, yg_crit_matrix which, double* out, size_t cap);
void yg_critical_diagnostics(const yg_critical* c, yg_crit_diagnostics* out);

/* Busy-period tail psi(t) ~ coefficient * t^exponent * e^{rate t};
 * coefficient is n1 x n2 row-major. */
yg_status yg_tail_asymptote(const yg_critical* c, double* coefficient, double* rate,
                            double* exponent);

/* Normalizer of the level-0 conditional density (length n1, > 0). */
yg_status yg_level0_normalizer(const yg_model* m, const yg_critical* c, double* out);

/* ------------------------------------------------------ conditional density */

typedef struct yg_grid yg_grid;

/* Conditional density of the level/phase at a long horizon given the level
 * has not yet hit 0, starting from level x. x = 0 starts in ascending phases;
 * x > 0 in ascending or descending phases (zero-rate starts are unsupported).
 * from_phase: 1-based input index, or 0 for every supported starting phase.
 * y_max <= 0 picks the decay-based default; steps >= 1. */
yg_status yg_density(const yg_model* m, const yg_critical* c, double x, int from_phase,
                     double y_max, int steps, yg_grid** out);
void yg_grid_free(yg_grid* g);

size_t yg_grid_points(const yg_grid* g);
double yg_grid_y(const yg_grid* g, size_t point);
char yg_grid_side(const yg_grid* g, size_t point); /* 'l', 'r' or '-' */
size_t yg_grid_from_count(const yg_grid* g);
int yg_grid_from_phase(const yg_grid* g, size_t row);       /* 1-based input index */
double yg_grid_density(const yg_grid* g, size_t row, int to_phase, size_t point);
double yg_grid_row_mass(const yg_grid* g, size_t row);
double yg_grid_y_max(const yg_grid* g);

/* ------------------------------------------------------------- simulation */

typedef struct yg_empirical yg_empirical;

typedef struct yg_sim_config {
  double x0;
  int phase0;      /* 1-based input index */
  double t;        /* horizon */
  uint64_t paths;
  uint64_t seed;
  int bins;        /* histogram bins on [0, y_max); one overflow row on top */
  double y_max;    /* <= 0: x0 + t * max rate */
} yg_sim_config;

yg_status yg_simulate(const yg_model* m, const yg_sim_config* cfg, yg_empirical** out);
void yg_empirical_free(yg_empirical* e);

int yg_empirical_bins(const yg_empirical* e); /* finite bins; +1 overflow row */
void yg_empirical_edges(const yg_empirical* e, int bin, double* lo, double* hi);
double yg_empirical_mass(const yg_empirical* e, int bin, int to_phase);
uint64_t yg_empirical_survivors(const yg_empirical* e);
uint64_t yg_empirical_paths(const yg_empirical* e);
double yg_empirical_survival(const yg_empirical* e);
double yg_empirical_ci_halfwidth(const yg_empirical* e);

/* ------------------------------------------------------------- comparison */

/* Distances between a sampled analytic density (single starting phase) and an
 * empirical histogram. Analytic rows: level, density per listed to-phase.
 * Phase columns are matched between the two inputs by their integer labels.
 * Empirical rows are (lo, hi, to_phase, mass) with hi = INFINITY on the
 * overflow row. */
yg_status yg_compare_tables(const double* a_y, const char* a_side, const double* a_density,
                            const int* a_to, size_t a_points, size_t a_phases,
                            const double* e_lo, const double* e_hi, const int* e_to,
                            const double* e_mass, size_t e_rows, double* l1, double* ks);

/* Same, straight from the handles. from_row indexes the grid rows. */
yg_status yg_compare(const yg_grid* g, size_t from_row, const yg_empirical* e, double* l1,
                     double* ks);

/* Distances between two histograms on one common edge set (exact; no
 * density reconstruction). Rows as in the empirical table above. */
yg_status yg_compare_histograms(const double* a_lo, const double* a_hi, const int* a_to,
                                const double* a_mass, size_t a_rows, const double* e_lo,
                                const double* e_hi, const int* e_to, const double* e_mass,
                                size_t e_rows, double* l1, double* ks);

/* ------------------------------------------------------------ busy periods */

typedef struct yg_tail_fit {
  double slope;        /* decay-rate estimate */
  double slope_stderr;
  double exponent;     /* power from the unconstrained fit */
  double exponent_stderr;
  uint64_t in_window;
  int bins_used;
} yg_tail_fit;

/* Simulates `paths` busy periods from level 0 (1-based ascending phase0) and
 * fits the density tail on [t_lo, t_hi] with `bins` log-spaced bins. */
yg_status yg_return_time_tail(const yg_model* m, uint64_t paths, uint64_t seed, int phase0,
                              double t_lo, double t_hi, int bins, yg_tail_fit* out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* YAGLOM_YAGLOM_H */
