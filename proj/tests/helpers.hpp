#pragma once

#include <cmath>
#include <sstream>
#include <string>

#include "model.hpp"

namespace testing {

// Two-phase model: up at rate +1 with exit rate a, down at rate -1 with exit
// rate b. Stable when a > b. Everything about it has a closed form, which the
// tests below use as the independent oracle.
inline std::string two_phase_json(double a, double b) {
  std::ostringstream os;
  os.precision(17);
  os << "{\"c\":[1,-1],\"T\":[[" << -a << "," << a << "],[" << b << "," << -b << "]]}";
  return os.str();
}

inline yaglom::FluidModel two_phase(double a, double b) {
  return yaglom::load_model(two_phase_json(a, b));
}

// Three-phase on/off-source model; stable for lambda > sqrt(2) - 1.
inline std::string three_phase_json(double lambda) {
  std::ostringstream os;
  os.precision(17);
  os << "{\"c\":[1,-1,-1],\"T\":[[" << -2 * lambda << "," << 2 * lambda << ",0],"
     << "[1," << -(1 + lambda) << "," << lambda << "],"
     << "[0,2,-2]]}";
  return os.str();
}

inline yaglom::FluidModel three_phase(double lambda) {
  return yaglom::load_model(three_phase_json(lambda));
}

// Four phases with one zero rate, to exercise the censored-resolvent paths.
// Rates are kept gentle so that power-series oracles stay well conditioned.
inline yaglom::FluidModel zero_rate_model() {
  return yaglom::load_model(
      "{\"c\":[1,1,-3,0],"
      "\"T\":[[-1.2,0.4,0.4,0.4],[0.5,-1.4,0.5,0.4],[0.4,0.4,-1.2,0.4],"
      "[0.6,0.3,0.3,-1.2]]}");
}

// Closed forms for the two-phase model.
struct TwoPhase {
  double a, b;
  double disc(double s) const { return (a + b + 2 * s) * (a + b + 2 * s) - 4 * a * b; }
  double psi(double s) const { return (a + b + 2 * s - std::sqrt(disc(s))) / (2 * b); }
  double K(double s) const { return -a - s + (a + b + 2 * s - std::sqrt(disc(s))) / 2; }
  double D(double s) const { return -b - s + (a + b + 2 * s - std::sqrt(disc(s))) / 2; }
  double phi(double s) const { return (1 - (a + b + 2 * s) / std::sqrt(disc(s))) / b; }
  double s_star() const { return (-(a + b) + 2 * std::sqrt(a * b)) / 2; }
  double psi_star() const { return std::sqrt(a / b); }
  double K_star() const { return (b - a) / 2; }
  double D_star() const { return (a - b) / 2; }
  double B() const { return std::sqrt(2 * std::sqrt(a * b)) / b; }
  double U_star() const { return 2 * std::sqrt(a / b); }
  double H(double y) const {
    return std::sqrt(2 * std::sqrt(a * b)) * y * std::exp(-(a - b) / 2 * y);
  }
  double H_bar() const { return std::sqrt(2 * std::sqrt(a * b)) / ((a - b) * (a - b) / 4); }
  double H_tilde() const {
    return H_bar() * (1 + std::sqrt(a / b)) + (2 / (a - b)) * std::sqrt(2 * std::sqrt(a * b)) / b;
  }
  double mu11(double y) const { return H(y) / H_tilde(); }
  double mu12(double y) const {
    return (std::exp(K_star() * y) * B() + H(y) * psi_star()) / H_tilde();
  }
};

}  // namespace testing
