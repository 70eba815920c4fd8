#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>

#include "errors.hpp"

namespace yaglom::numkit {

struct Spectrum {
  Eigen::VectorXcd eigenvalues;
  std::complex<double> dominant;  // maximal real part
};

// Full spectrum of a real square matrix.
Spectrum eigenvalues(const Eigen::MatrixXd& A);

// Solves A X + X B = C for the m x k matrix X via the vectorized dense
// system (I (x) A + B^T (x) I) vec(X) = vec(C). Throws SingularSylvesterError
// when the smallest singular value of the operator is <= 1e-9 times the
// largest (the signature of coalescing spectra), and NumericalError when the
// residual of the computed solution is out of bounds.
Eigen::MatrixXd sylvester_solve(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                const Eigen::MatrixXd& C);

// Relative singular-value gap of the Sylvester operator (smallest/largest);
// used by probes that want the signal without the exception.
double sylvester_condition(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

// e^{A t}, t >= 0, scaling-and-squaring.
Eigen::MatrixXd expm(const Eigen::MatrixXd& A, double t = 1.0);

// Directional derivative of the matrix exponential:
//   L = sum_{n>=1} (t^n/n!) sum_{i=0}^{n-1} A^i E A^{n-1-i},
// computed as the top-right block of exp([[A,E],[0,A]] t).
Eigen::MatrixXd expm_frechet(const Eigen::MatrixXd& A, const Eigen::MatrixXd& E, double t);

// int_0^x e^{A w} dw via the augmented exponential of [[A,I],[0,0]].
Eigen::MatrixXd integral_expm(const Eigen::MatrixXd& A, double x);

// Adaptive composite Gauss-Legendre quadrature of a matrix-valued integrand
// with entrywise error <= tol, estimated by interval halving. Throws
// NumericalError once the subdivision budget (2^20 subintervals) is spent.
Eigen::MatrixXd quad(const std::function<Eigen::MatrixXd(double)>& f, double a, double b,
                     double tol = 1e-10);

}  // namespace yaglom::numkit
