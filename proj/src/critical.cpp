#include "critical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "numkit.hpp"
#include "riccati.hpp"

namespace yaglom {

namespace {

double gap_between(const Eigen::MatrixXd& K, const Eigen::MatrixXd& D) {
  Eigen::VectorXcd lam = numkit::eigenvalues(K).eigenvalues;
  Eigen::VectorXcd mu = numkit::eigenvalues(-D).eigenvalues;
  double gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < lam.size(); ++i)
    for (int j = 0; j < mu.size(); ++j) gap = std::min(gap, std::abs(lam(i) - mu(j)));
  return gap;
}

Eigen::MatrixXd psi_at(const FluidModel& model, double s, double tol) {
  RiccatiOptions opt;
  opt.tol = tol;
  RiccatiSolution sol = solve_psi(model, s, opt);
  if (!sol.converged)
    throw NumericalError("no convergent Riccati solution at s = " + std::to_string(s) +
                         " (residual " + std::to_string(sol.residual) + " after " +
                         std::to_string(sol.iterations) + " iterations)");
  return sol.psi;
}

// Fits psi(s* + 4^k h) = a0 + a1 2^k + a2 4^k + a3 8^k entrywise (powers of
// sqrt(s - s*)) and returns the requested coefficient.
Eigen::MatrixXd vandermonde_coeff(const std::vector<Eigen::MatrixXd>& samples, int coeff) {
  const int p = static_cast<int>(samples.size());
  Eigen::MatrixXd V(p, p);
  for (int k = 0; k < p; ++k) {
    double x = std::pow(2.0, k);
    for (int j = 0; j < p; ++j) V(k, j) = std::pow(x, j);
  }
  Eigen::VectorXd sel = Eigen::VectorXd::Zero(p);
  sel(coeff) = 1.0;
  Eigen::VectorXd w = V.transpose().partialPivLu().solve(sel);  // weights on the samples
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(samples[0].rows(), samples[0].cols());
  for (int k = 0; k < p; ++k) acc += w(k) * samples[k];
  return acc;
}

void normalize_sign(Eigen::VectorXd& v) {
  v.normalize();
  for (int i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-12) {
      if (v(i) < 0.0) v = -v;
      return;
    }
  }
}

}  // namespace

double spectral_gap(const FluidModel& model, double s) {
  RiccatiSolution sol = solve_psi(model, s);
  if (!sol.converged)
    throw NumericalError("spectral_gap: no convergent Riccati solution at s = " +
                         std::to_string(s));
  return gap_between(sol.K, sol.D);
}

double find_s_star(const FluidModel& model, double tol) {
  StabilityReport rep = stability(model);
  if (!rep.stable)
    throw ValidationError("model is not stable (drift = " + std::to_string(rep.drift) +
                          " >= 0); the conditioned limit requires a stable model");

  double lo_false = std::numeric_limits<double>::quiet_NaN();  // known non-existence
  double hi_true = std::numeric_limits<double>::quiet_NaN();   // known existence
  auto probe = [&](double s) {
    bool ok = existence_probe(model, s);
    if (ok) {
      if (!std::isnan(lo_false) && s < lo_false) {
        std::ostringstream os;
        os << "existence probe is inconsistent: exists at s = " << s
           << " but not at the larger s = " << lo_false;
        throw NumericalError(os.str());
      }
      if (std::isnan(hi_true) || s < hi_true) hi_true = s;
    } else {
      if (!std::isnan(hi_true) && s > hi_true) {
        std::ostringstream os;
        os << "existence probe is inconsistent: no solution at s = " << s
           << " although one exists at the smaller s = " << hi_true;
        throw NumericalError(os.str());
      }
      if (std::isnan(lo_false) || s > lo_false) lo_false = s;
    }
    return ok;
  };

  double right = -1e-12;
  if (!probe(right))
    throw NumericalError("existence probe fails even at s = -1e-12; no bracket");
  double left = -model.T.diagonal().cwiseAbs().maxCoeff() - 1.0;
  int doublings = 0;
  while (probe(left)) {
    left *= 2.0;
    if (++doublings > 60)
      throw NumericalError("no sign change in bracket [" + std::to_string(left) + ", " +
                           std::to_string(right) + "]; singularity not found");
  }

  // Bisection down to a short bracket.
  const double coarse = std::max(tol, 1e-6 * std::max(1.0, std::abs(right)));
  while (right - left > coarse) {
    double mid = 0.5 * (left + right);
    if (probe(mid))
      right = mid;
    else
      left = mid;
  }

  // gap(s)^2 grows linearly in s - s*; secant iteration on it converges fast
  // and stays on the existence side.
  double s1 = right;
  double s2 = right + (right - left);
  double g1 = spectral_gap(model, s1);
  double g2 = spectral_gap(model, s2);
  for (int it = 0; it < 60 && right - left > tol; ++it) {
    double denom = g2 * g2 - g1 * g1;
    double proposal = (denom != 0.0) ? s1 - g1 * g1 * (s2 - s1) / denom : 0.5 * (left + right);
    if (!(proposal > left && proposal < right)) proposal = 0.5 * (left + right);
    if (probe(proposal)) {
      right = proposal;
      s2 = s1;
      g2 = g1;
      s1 = proposal;
      g1 = spectral_gap(model, proposal);
    } else {
      left = proposal;
    }
  }
  return right;
}

CriticalPoint critical_expansion(const FluidModel& model, double s_star,
                                 const CriticalOptions& opt) {
  const double h0 = opt.h > 0.0 ? opt.h : 1e-5 * std::max(1.0, std::abs(s_star));
  const double sample_tol = 1e-14;

  CriticalPoint cp;
  cp.s_star = s_star;

  bool accepted = false;
  std::string last_failure;
  for (double h : {h0, h0 / 4.0, h0 / 16.0}) {
    try {
      std::vector<Eigen::MatrixXd> samples;
      for (int k = 0; k < 4; ++k)
        samples.push_back(psi_at(model, s_star + std::pow(4.0, k) * h, sample_tol));
      Eigen::MatrixXd psi0 = vandermonde_coeff(samples, 0);
      Eigen::MatrixXd B4 = -vandermonde_coeff(samples, 1) / std::sqrt(h);
      std::vector<Eigen::MatrixXd> first3(samples.begin(), samples.begin() + 3);
      Eigen::MatrixXd B3 = -vandermonde_coeff(first3, 1) / std::sqrt(h);
      double fit = (B4 - B3).cwiseAbs().maxCoeff();
      if (fit > 1e-3 * B4.cwiseAbs().maxCoeff()) {
        last_failure = "extrapolation disagreement " + std::to_string(fit) + " at h = " +
                       std::to_string(h);
        continue;
      }
      cp.psi_star = psi0;
      cp.B = B4;
      cp.diagnostics.fit_residual = fit;
      cp.diagnostics.h_used = h;
      accepted = true;
      break;
    } catch (const NumericalError& e) {
      last_failure = e.what();
    }
  }
  if (!accepted)
    throw NumericalError("critical expansion failed near s* = " + std::to_string(s_star) +
                         ": " + last_failure);

  cp.q_star = q_blocks(model, s_star);
  cp.K_star = cp.q_star.Q11 + cp.psi_star * cp.q_star.Q21;
  cp.D_star = cp.q_star.Q22 + cp.q_star.Q21 * cp.psi_star;

  // Coalescing eigenvalue pair of K(s*) and -D(s*).
  Eigen::EigenSolver<Eigen::MatrixXd> esK(cp.K_star);
  Eigen::EigenSolver<Eigen::MatrixXd> esD(cp.D_star.transpose());
  if (esK.info() != Eigen::Success || esD.info() != Eigen::Success)
    throw NumericalError("eigenvalue iteration failed at s*");
  Eigen::VectorXcd lam = esK.eigenvalues();
  Eigen::VectorXcd muD = esD.eigenvalues();  // eigenvalues of D; compare with -lam
  int bi = -1, bj = -1;
  double best = std::numeric_limits<double>::infinity(), second = best;
  for (int i = 0; i < lam.size(); ++i) {
    for (int j = 0; j < muD.size(); ++j) {
      double d = std::abs(lam(i) + muD(j));  // lam in sp(K), -muD(j) in sp(-D)
      if (d < best) {
        second = best;
        best = d;
        bi = i;
        bj = j;
      } else if (d < second) {
        second = d;
      }
    }
  }
  cp.diagnostics.gap_at_star = best;
  double scale = std::max(1.0, cp.K_star.cwiseAbs().maxCoeff());
  if (second <= 1e-6 * scale)
    throw NumericalError("non-simple coalescence: multiple eigenvalue pairs meet at s* (gaps " +
                         std::to_string(best) + " and " + std::to_string(second) + ")");
  if (std::abs(lam(bi).imag()) > 1e-6 * scale)
    throw NumericalError("non-simple coalescence: the touching eigenvalue is complex");
  cp.gamma = 0.5 * (lam(bi).real() - muD(bj).real());

  cp.u = esK.eigenvectors().col(bi).real();
  cp.v = esD.eigenvectors().col(bj).real();
  normalize_sign(cp.u);
  normalize_sign(cp.v);

  cp.k_hurwitz = numkit::eigenvalues(cp.K_star).dominant.real() < 0.0;

  // The extrapolated B carries O(h)-level direction noise; snapping it onto
  // the kernel dyad u v^T keeps the scale from the expansion while making
  // K B + B D vanish to machine precision. The distance moved is recorded.
  Eigen::MatrixXd dyad = cp.u * cp.v.transpose();
  double sigma = (dyad.array() * cp.B.array()).sum() / (dyad.array() * dyad.array()).sum();
  cp.diagnostics.rank1_rel =
      (cp.B - sigma * dyad).cwiseAbs().maxCoeff() / cp.B.cwiseAbs().maxCoeff();
  cp.B = sigma * dyad;

  DerivativeBlocks a = a_blocks(model, s_star);
  cp.U = u_matrix(a, cp.psi_star);
  cp.Y = cp.U - cp.B * cp.q_star.Q21 * cp.B;

  // Independent estimate of Y through the derivative limit, Richardson in
  // sqrt(h); closes the loop on the defining pair of equations for B.
  const double h = cp.diagnostics.h_used;
  auto y_hat_at = [&](double step) {
    RiccatiOptions ro;
    ro.tol = sample_tol;
    RiccatiSolution sol = solve_psi(model, s_star + step, ro);
    PhiMatrix p = phi(model, sol);
    return Eigen::MatrixXd(cp.K_star * p.phi + p.phi * cp.D_star);
  };
  Eigen::MatrixXd y_hat = 2.0 * y_hat_at(h) - y_hat_at(4.0 * h);
  double u_norm = std::max(cp.U.cwiseAbs().maxCoeff(), 1e-300);
  cp.diagnostics.y_check_rel = (y_hat - cp.Y).cwiseAbs().maxCoeff() / u_norm;
  cp.diagnostics.eq1_residual_rel =
      (cp.B * cp.q_star.Q21 * cp.B - (cp.U - y_hat)).cwiseAbs().maxCoeff() / u_norm;
  cp.diagnostics.eq2_residual = (cp.K_star * cp.B + cp.B * cp.D_star).cwiseAbs().maxCoeff();
  return cp;
}

CriticalPoint critical_point(const FluidModel& model, const CriticalOptions& opt) {
  return critical_expansion(model, find_s_star(model, opt.tol), opt);
}

}  // namespace yaglom
