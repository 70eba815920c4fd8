#include "numkit.hpp"

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <sstream>

namespace yaglom::numkit {

namespace {

std::string shape_of(const Eigen::MatrixXd& A) {
  return std::to_string(A.rows()) + "x" + std::to_string(A.cols());
}

void require_finite(const Eigen::MatrixXd& A, const char* who) {
  if (!A.allFinite())
    throw NumericalError(std::string(who) + ": matrix has non-finite entries");
}

}  // namespace

Spectrum eigenvalues(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols()) throw NumericalError("eigenvalues: matrix must be square");
  require_finite(A, "eigenvalues");
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    std::ostringstream os;
    os << "eigenvalue iteration did not converge on " << shape_of(A) << " matrix:\n" << A;
    throw NumericalError(os.str());
  }
  Spectrum sp;
  sp.eigenvalues = es.eigenvalues();
  sp.dominant = sp.eigenvalues(0);
  for (int i = 1; i < sp.eigenvalues.size(); ++i)
    if (sp.eigenvalues(i).real() > sp.dominant.real()) sp.dominant = sp.eigenvalues(i);
  return sp;
}

namespace {

Eigen::MatrixXd sylvester_operator(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  const Eigen::Index m = A.rows(), k = B.rows();
  Eigen::MatrixXd Im = Eigen::MatrixXd::Identity(m, m);
  Eigen::MatrixXd Ik = Eigen::MatrixXd::Identity(k, k);
  return Eigen::kroneckerProduct(Ik, A) + Eigen::kroneckerProduct(B.transpose(), Im);
}

}  // namespace

double sylvester_condition(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  Eigen::MatrixXd M = sylvester_operator(A, B);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  const auto& sv = svd.singularValues();
  if (sv(0) == 0.0) return 0.0;
  return sv(sv.size() - 1) / sv(0);
}

Eigen::MatrixXd sylvester_solve(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                const Eigen::MatrixXd& C) {
  if (A.rows() != A.cols() || B.rows() != B.cols())
    throw NumericalError("sylvester_solve: A and B must be square");
  if (C.rows() != A.rows() || C.cols() != B.rows())
    throw NumericalError("sylvester_solve: C must be " + std::to_string(A.rows()) + "x" +
                         std::to_string(B.rows()) + ", got " + shape_of(C));
  require_finite(A, "sylvester_solve");
  require_finite(B, "sylvester_solve");
  require_finite(C, "sylvester_solve");

  const Eigen::Index m = A.rows(), k = B.rows();
  Eigen::MatrixXd M = sylvester_operator(A, B);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv(0) == 0.0 || sv(sv.size() - 1) <= 1e-9 * sv(0))
    throw SingularSylvesterError("singular Sylvester operator: spectra of A and -B overlap");

  Eigen::VectorXd vecC = Eigen::Map<const Eigen::VectorXd>(C.data(), m * k);
  Eigen::VectorXd vecX = svd.solve(vecC);
  Eigen::MatrixXd X = Eigen::Map<const Eigen::MatrixXd>(vecX.data(), m, k);

  double scale = (A.cwiseAbs().rowwise().sum().maxCoeff() + B.cwiseAbs().rowwise().sum().maxCoeff()) *
                 X.cwiseAbs().rowwise().sum().maxCoeff();
  double residual = (A * X + X * B - C).cwiseAbs().maxCoeff();
  if (residual > 1e-10 * scale + 1e-12)
    throw NumericalError("sylvester_solve residual " + std::to_string(residual) +
                         " out of bounds (operator nearly singular?)");
  return X;
}

Eigen::MatrixXd expm(const Eigen::MatrixXd& A, double t) {
  if (A.rows() != A.cols()) throw NumericalError("expm: matrix must be square");
  if (t < 0.0) throw NumericalError("expm: negative time " + std::to_string(t));
  require_finite(A, "expm");
  if (t == 0.0) return Eigen::MatrixXd::Identity(A.rows(), A.cols());
  Eigen::MatrixXd E = (A * t).exp();
  if (!E.allFinite()) {
    std::ostringstream os;
    os << "expm overflow: ||A t||_inf = " << (A * t).cwiseAbs().rowwise().sum().maxCoeff();
    throw NumericalError(os.str());
  }
  return E;
}

Eigen::MatrixXd expm_frechet(const Eigen::MatrixXd& A, const Eigen::MatrixXd& E, double t) {
  if (A.rows() != A.cols() || E.rows() != A.rows() || E.cols() != A.cols())
    throw NumericalError("expm_frechet: A and E must be square and of equal size");
  const Eigen::Index n = A.rows();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  M.topLeftCorner(n, n) = A;
  M.topRightCorner(n, n) = E;
  M.bottomRightCorner(n, n) = A;
  return expm(M, t).topRightCorner(n, n);
}

Eigen::MatrixXd integral_expm(const Eigen::MatrixXd& A, double x) {
  if (A.rows() != A.cols()) throw NumericalError("integral_expm: matrix must be square");
  if (x < 0.0) throw NumericalError("integral_expm: negative upper limit");
  const Eigen::Index n = A.rows();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  M.topLeftCorner(n, n) = A;
  M.topRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
  return expm(M, x).topRightCorner(n, n);
}

namespace {

// 10-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr int kGLPoints = 10;
constexpr double kGLNode[kGLPoints] = {
    -0.97390652851717172008, -0.86506336668898451073, -0.67940956829902440623,
    -0.43339539412924719080, -0.14887433898163121088, 0.14887433898163121088,
    0.43339539412924719080,  0.67940956829902440623,  0.86506336668898451073,
    0.97390652851717172008};
constexpr double kGLWeight[kGLPoints] = {
    0.06667134430868813759, 0.14945134915058059315, 0.21908636251598204400,
    0.26926671930999635509, 0.29552422471475287017, 0.29552422471475287017,
    0.26926671930999635509, 0.21908636251598204400, 0.14945134915058059315,
    0.06667134430868813759};

Eigen::MatrixXd gl_panel(const std::function<Eigen::MatrixXd(double)>& f, double a, double b) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  Eigen::MatrixXd acc = kGLWeight[0] * f(mid + half * kGLNode[0]);
  for (int i = 1; i < kGLPoints; ++i) acc += kGLWeight[i] * f(mid + half * kGLNode[i]);
  return half * acc;
}

struct QuadState {
  const std::function<Eigen::MatrixXd(double)>* f;
  double tol;
  double total_len;
  long panels = 0;
  static constexpr long kMaxPanels = 1 << 20;
};

Eigen::MatrixXd quad_recurse(QuadState& st, double a, double b, const Eigen::MatrixXd& whole) {
  if (++st.panels > QuadState::kMaxPanels)
    throw NumericalError("quad: subdivision budget exhausted (2^20 subintervals)");
  const double mid = 0.5 * (a + b);
  Eigen::MatrixXd left = gl_panel(*st.f, a, mid);
  Eigen::MatrixXd right = gl_panel(*st.f, mid, b);
  Eigen::MatrixXd refined = left + right;
  double err = (refined - whole).cwiseAbs().maxCoeff();
  double budget = st.tol * ((b - a) / st.total_len);
  if (err <= budget || (b - a) < 1e-14 * st.total_len) return refined;
  return quad_recurse(st, a, mid, left) + quad_recurse(st, mid, b, right);
}

}  // namespace

Eigen::MatrixXd quad(const std::function<Eigen::MatrixXd(double)>& f, double a, double b,
                     double tol) {
  if (!(tol > 0.0)) throw NumericalError("quad: tolerance must be positive");
  if (a == b) {
    Eigen::MatrixXd probe = f(a);
    return Eigen::MatrixXd::Zero(probe.rows(), probe.cols());
  }
  QuadState st{&f, tol, std::abs(b - a)};
  if (a > b) return -quad(f, b, a, tol);
  return quad_recurse(st, a, b, gl_panel(f, a, b));
}

}  // namespace yaglom::numkit
