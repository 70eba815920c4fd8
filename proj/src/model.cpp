#include "model.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace yaglom {

namespace {

using nlohmann::json;

constexpr double kRowSumTol = 1e-12;

// Strong connectivity of the directed graph with an edge i->j whenever
// T(i,j) > 0, i != j. Forward and backward reachability from node 0.
bool strongly_connected(const Eigen::MatrixXd& T) {
  const int n = static_cast<int>(T.rows());
  if (n == 1) return true;
  auto reach = [&](bool transpose) {
    std::vector<char> seen(n, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      int i = stack.back();
      stack.pop_back();
      for (int j = 0; j < n; ++j) {
        if (j == i || seen[j]) continue;
        double w = transpose ? T(j, i) : T(i, j);
        if (w > 0.0) {
          seen[j] = 1;
          stack.push_back(j);
        }
      }
    }
    for (char s : seen)
      if (!s) return false;
    return true;
  };
  return reach(false) && reach(true);
}

}  // namespace

FluidModel load_model(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("model document is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("model document must be a JSON object");
  if (!doc.contains("c") || !doc["c"].is_array())
    throw ValidationError("model document needs an array field \"c\"");
  if (!doc.contains("T") || !doc["T"].is_array())
    throw ValidationError("model document needs an array-of-arrays field \"T\"");

  const auto& jc = doc["c"];
  const auto& jT = doc["T"];
  const int n = static_cast<int>(jc.size());
  if (n == 0) throw ValidationError("\"c\" must not be empty");
  if (static_cast<int>(jT.size()) != n)
    throw ValidationError("\"T\" must have exactly as many rows as \"c\" has entries");

  Eigen::VectorXd c(n);
  for (int i = 0; i < n; ++i) {
    if (!jc[i].is_number()) throw ValidationError("\"c\" entries must be numbers");
    c(i) = jc[i].get<double>();
  }
  Eigen::MatrixXd T(n, n);
  for (int i = 0; i < n; ++i) {
    if (!jT[i].is_array() || static_cast<int>(jT[i].size()) != n)
      throw ValidationError("\"T\" must be a square matrix (row " + std::to_string(i + 1) +
                            " has the wrong length)");
    for (int j = 0; j < n; ++j) {
      if (!jT[i][j].is_number()) throw ValidationError("\"T\" entries must be numbers");
      T(i, j) = jT[i][j].get<double>();
    }
  }

  std::vector<std::string> labels;
  if (doc.contains("labels")) {
    if (!doc["labels"].is_array() || static_cast<int>(doc["labels"].size()) != n)
      throw ValidationError("\"labels\", when present, must list one string per phase");
    for (const auto& l : doc["labels"]) {
      if (!l.is_string()) throw ValidationError("\"labels\" entries must be strings");
      labels.push_back(l.get<std::string>());
    }
  }

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && T(i, j) < 0.0)
        throw ValidationError("T(" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                              ") is negative; off-diagonal generator entries must be >= 0");
    }
    double row = T.row(i).sum();
    if (std::abs(row) > kRowSumTol)
      throw ValidationError("row " + std::to_string(i + 1) + " of T sums to " +
                            std::to_string(row) + "; generator rows must sum to 0");
  }
  if (!strongly_connected(T))
    throw ValidationError("the driving chain is reducible; the model must be irreducible");

  FluidModel m;
  m.n = n;
  m.T_input = T;
  m.c_input = c;
  m.labels = std::move(labels);

  std::vector<int> order;
  for (int i = 0; i < n; ++i)
    if (c(i) > 0.0) order.push_back(i);
  m.n1 = static_cast<int>(order.size());
  for (int i = 0; i < n; ++i)
    if (c(i) < 0.0) order.push_back(i);
  m.n2 = static_cast<int>(order.size()) - m.n1;
  for (int i = 0; i < n; ++i)
    if (c(i) == 0.0) order.push_back(i);
  m.n0 = n - m.n1 - m.n2;

  if (m.n1 == 0) throw ValidationError("no phase has a positive rate (S1 empty); the busy period degenerates");
  if (m.n2 == 0) throw ValidationError("no phase has a negative rate (S2 empty); the level can never return to 0");

  m.to_original = order;
  m.to_block.assign(n, -1);
  for (int b = 0; b < n; ++b) m.to_block[order[b]] = b;

  m.T.resize(n, n);
  m.c.resize(n);
  for (int bi = 0; bi < n; ++bi) {
    m.c(bi) = c(order[bi]);
    for (int bj = 0; bj < n; ++bj) m.T(bi, bj) = T(order[bi], order[bj]);
  }
  return m;
}

FluidModel load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("cannot read model file: " + path);
  return load_model(ss.str());
}

std::string serialize_model(const FluidModel& model) {
  nlohmann::json doc;
  doc["c"] = nlohmann::json::array();
  for (int i = 0; i < model.n; ++i) doc["c"].push_back(model.c_input(i));
  doc["T"] = nlohmann::json::array();
  for (int i = 0; i < model.n; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < model.n; ++j) row.push_back(model.T_input(i, j));
    doc["T"].push_back(row);
  }
  if (!model.labels.empty()) doc["labels"] = model.labels;
  return doc.dump(2) + "\n";
}

StabilityReport stability(const FluidModel& model) {
  const int n = model.n;
  // xi T = 0 with xi 1 = 1: replace the last column of T by ones and solve
  // the transposed system.
  Eigen::MatrixXd M = model.T;
  M.col(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(M.transpose());
  if (!lu.isInvertible())
    throw NumericalError("stationary system is singular; the generator appears degenerate");
  Eigen::VectorXd xi = lu.solve(rhs);

  double residual = (xi.transpose() * model.T).cwiseAbs().maxCoeff();
  if (residual > 1e-10)
    throw NumericalError("stationary vector residual " + std::to_string(residual) +
                         " exceeds 1e-10; numerical breakdown");

  StabilityReport rep;
  rep.xi = xi;
  rep.xi_input.resize(n);
  for (int b = 0; b < n; ++b) rep.xi_input(model.to_original[b]) = xi(b);
  rep.drift = model.c.dot(xi);
  rep.stable = rep.drift < 0.0;
  return rep;
}

}  // namespace yaglom
