#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "errors.hpp"

namespace yaglom {

// Markov-modulated fluid model: a finite irreducible CTMC with generator T
// drives the slope of a nonnegative level process, phase i moving the level
// at rate c[i]. Phases are reordered at load time into block order
// (ascending, descending, zero-rate); all internal matrices use block order
// and `to_original` maps back to input order.
class FluidModel {
 public:
  int n = 0;
  int n1 = 0;  // |S1|, c > 0
  int n2 = 0;  // |S2|, c < 0
  int n0 = 0;  // |S0|, c = 0

  Eigen::MatrixXd T;  // generator, block order
  Eigen::VectorXd c;  // rates, block order

  std::vector<int> to_original;            // block index -> 0-based input index
  std::vector<int> to_block;               // 0-based input index -> block index
  std::vector<std::string> labels;         // input order; empty if absent

  Eigen::MatrixXd T_input;  // as loaded, input order (for round-trip)
  Eigen::VectorXd c_input;

  // Generator blocks in the (S1, S2, S0) partition.
  Eigen::MatrixXd T11() const { return T.block(0, 0, n1, n1); }
  Eigen::MatrixXd T12() const { return T.block(0, n1, n1, n2); }
  Eigen::MatrixXd T10() const { return T.block(0, n1 + n2, n1, n0); }
  Eigen::MatrixXd T21() const { return T.block(n1, 0, n2, n1); }
  Eigen::MatrixXd T22() const { return T.block(n1, n1, n2, n2); }
  Eigen::MatrixXd T20() const { return T.block(n1, n1 + n2, n2, n0); }
  Eigen::MatrixXd T01() const { return T.block(n1 + n2, 0, n0, n1); }
  Eigen::MatrixXd T02() const { return T.block(n1 + n2, n1, n0, n2); }
  Eigen::MatrixXd T00() const { return T.block(n1 + n2, n1 + n2, n0, n0); }

  Eigen::VectorXd c1() const { return c.head(n1); }                 // > 0
  Eigen::VectorXd c2_abs() const { return (-c.segment(n1, n2)); }   // |c|, > 0
};

struct StabilityReport {
  Eigen::VectorXd xi;        // stationary vector, block order
  Eigen::VectorXd xi_input;  // stationary vector, input order
  double drift = 0.0;        // sum_i c_i xi_i
  bool stable = false;       // drift < 0
};

// Parses and validates a model document (JSON text). Throws ValidationError
// with a specific message on any schema or model-property violation.
FluidModel load_model(const std::string& json_text);

// Reads a file and delegates to load_model. Throws IoError if unreadable.
FluidModel load_model_file(const std::string& path);

// Serializes back to the document format, in input phase order.
std::string serialize_model(const FluidModel& model);

// Stationary vector of T and the mean drift. Dense solve; throws
// NumericalError if the linear system degenerates (should not happen for an
// irreducible generator).
StabilityReport stability(const FluidModel& model);

}  // namespace yaglom
