#include "pcdm/json_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "pcdm/errors.hpp"

namespace pcdm::io {

namespace {

const json& require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw InputError(std::string("JSON: missing key '") + key + "'");
  return j.at(key);
}

BlockKey parse_key(const std::string& key) {
  const auto comma = key.find(',');
  if (comma == std::string::npos) throw InputError("JSON: block key '" + key + "' must look like \"i,j\"");
  try {
    size_t used = 0;
    const long i = std::stol(key.substr(0, comma), &used);
    if (used != comma) throw InputError("JSON: bad block key '" + key + "'");
    const std::string rest = key.substr(comma + 1);
    const long jj = std::stol(rest, &used);
    if (used != rest.size()) throw InputError("JSON: bad block key '" + key + "'");
    return {i, jj};
  } catch (const std::logic_error&) {
    throw InputError("JSON: bad block key '" + key + "'");
  }
}

BlockMap block_map_from_json(const json& j) {
  if (!j.is_object()) throw InputError("JSON: block map must be an object");
  BlockMap out;
  for (const auto& [key, val] : j.items()) out[parse_key(key)] = matrix_from_json(val);
  return out;
}

json block_map_to_json(const BlockMap& blocks) {
  json out = json::object();
  for (const auto& [key, m] : blocks) out[std::to_string(key.first) + "," + std::to_string(key.second)] = matrix_to_json(m);
  return out;
}

std::vector<Index> index_list(const json& j) {
  if (!j.is_array()) throw InputError("JSON: expected an array of sizes");
  std::vector<Index> out;
  for (const auto& v : j) {
    if (!v.is_number_integer()) throw InputError("JSON: sizes must be integers");
    out.push_back(v.get<Index>());
  }
  return out;
}

double bound(const json& v, double missing) {
  if (v.is_null()) return missing;
  if (!v.is_number()) throw InputError("JSON: box bounds must be numbers or null");
  return v.get<double>();
}

json bound_to_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::vector<MatrixXd> matrix_list(const json& j) {
  if (!j.is_array()) throw InputError("JSON: expected an array of matrices");
  std::vector<MatrixXd> out;
  for (const auto& m : j) out.push_back(matrix_from_json(m));
  return out;
}

json matrix_list_to_json(const std::vector<MatrixXd>& ms) {
  json out = json::array();
  for (const auto& m : ms) out.push_back(matrix_to_json(m));
  return out;
}

}  // namespace

json matrix_to_json(const MatrixXd& m) {
  json out = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

MatrixXd matrix_from_json(const json& j) {
  if (j.is_number()) return MatrixXd::Constant(1, 1, j.get<double>());
  if (!j.is_array() || j.empty()) throw InputError("JSON: matrix must be a nonempty array of rows");
  const Index rows = static_cast<Index>(j.size());
  if (!j.front().is_array()) throw InputError("JSON: matrix rows must be arrays");
  const Index cols = static_cast<Index>(j.front().size());
  MatrixXd out(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<size_t>(r)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) throw InputError("JSON: ragged matrix");
    for (Index c = 0; c < cols; ++c) {
      if (!row[static_cast<size_t>(c)].is_number()) throw InputError("JSON: matrix entries must be numbers");
      out(r, c) = row[static_cast<size_t>(c)].get<double>();
    }
  }
  return out;
}

json vector_to_json(const VectorXd& v) {
  json out = json::array();
  for (Index k = 0; k < v.size(); ++k) out.push_back(v[k]);
  return out;
}

VectorXd vector_from_json(const json& j) {
  if (!j.is_array()) throw InputError("JSON: vector must be an array");
  VectorXd out(static_cast<Index>(j.size()));
  for (size_t k = 0; k < j.size(); ++k) {
    if (!j[k].is_number()) throw InputError("JSON: vector entries must be numbers");
    out[static_cast<Index>(k)] = j[k].get<double>();
  }
  return out;
}

json box_to_json(const BoxSet& box) {
  json lo = json::array(), hi = json::array();
  for (Index k = 0; k < box.dim(); ++k) {
    lo.push_back(bound_to_json(box.lower[k]));
    hi.push_back(bound_to_json(box.upper[k]));
  }
  return {{"lo", lo}, {"hi", hi}};
}

BoxSet box_from_json(const json& j) {
  const json& lo = require(j, "lo");
  const json& hi = require(j, "hi");
  if (!lo.is_array() || !hi.is_array() || lo.size() != hi.size()) throw InputError("JSON: box lo/hi must be equal-length arrays");
  BoxSet box{VectorXd(static_cast<Index>(lo.size())), VectorXd(static_cast<Index>(hi.size()))};
  const double inf = std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < lo.size(); ++k) {
    box.lower[static_cast<Index>(k)] = bound(lo[k], -inf);
    box.upper[static_cast<Index>(k)] = bound(hi[k], inf);
  }
  box.validate();
  return box;
}

QpDocument qp_from_json(const json& j) {
  BlockPartition part(index_list(require(j, "blocks")));
  const BlockMap q = j.contains("Q") ? block_map_from_json(j.at("Q")) : BlockMap{};
  std::vector<BoxSet> boxes;
  if (j.contains("boxes")) {
    for (const auto& b : j.at("boxes")) boxes.push_back(box_from_json(b));
  } else {
    for (Index i = 0; i < part.block_count(); ++i) boxes.push_back(BoxSet::unbounded(part.size(i)));
  }
  VectorXd w = j.contains("w") ? vector_from_json(j.at("w")) : VectorXd::Zero(part.dim());
  BlockPartition state_part;
  BlockMap wmap;
  if (j.contains("W")) {
    wmap = block_map_from_json(j.at("W"));
    if (!j.contains("state_blocks")) throw InputError("JSON: \"W\" requires \"state_blocks\"");
  }
  if (j.contains("state_blocks")) state_part = BlockPartition(index_list(j.at("state_blocks")));
  QpDocument doc{BlockedQP(part, q, std::move(boxes), std::move(w), state_part, wmap), std::nullopt};
  if (j.contains("x")) doc.state = vector_from_json(j.at("x"));
  return doc;
}

json qp_to_json(const BlockedQP& qp, const std::optional<VectorXd>& state) {
  json j;
  j["blocks"] = qp.partition().sizes();
  BlockMap q;
  for (const auto& key : qp.hessian_pattern())
    if (key.first <= key.second) q[key] = *qp.hessian_block(key.first, key.second);
  j["Q"] = block_map_to_json(q);
  j["w"] = vector_to_json(qp.linear_const());
  json boxes = json::array();
  for (const auto& b : qp.boxes()) boxes.push_back(box_to_json(b));
  j["boxes"] = boxes;
  if (qp.has_linear_map()) {
    j["state_blocks"] = qp.state_partition().sizes();
    BlockMap w;
    for (const auto& key : qp.linear_map_pattern()) w[key] = *qp.linear_map_block(key.first, key.second);
    j["W"] = block_map_to_json(w);
  }
  if (state) j["x"] = vector_to_json(*state);
  return j;
}

NetworkSystem system_from_json(const json& j) {
  NetworkSystem sys;
  sys.state_dims = index_list(require(j, "n"));
  sys.input_dims = index_list(require(j, "m"));
  if (j.contains("M") && j.at("M").get<Index>() != static_cast<Index>(sys.state_dims.size())) {
    throw InputError("JSON: \"M\" disagrees with the length of \"n\"");
  }
  if (j.contains("A")) sys.a_blocks = block_map_from_json(j.at("A"));
  if (j.contains("B")) sys.b_blocks = block_map_from_json(j.at("B"));
  sys.validate();
  return sys;
}

json system_to_json(const NetworkSystem& sys) {
  return {{"M", sys.subsystem_count()},
          {"n", sys.state_dims},
          {"m", sys.input_dims},
          {"A", block_map_to_json(sys.a_blocks)},
          {"B", block_map_to_json(sys.b_blocks)}};
}

MpcDocument mpc_from_json(const json& j) {
  MpcDocument doc;
  MPCConfig& cfg = doc.config;
  cfg.horizon = require(j, "N").get<int>();
  cfg.state_weights = matrix_list(require(j, "Q"));
  cfg.input_weights = matrix_list(require(j, "R"));
  cfg.terminal_weights = matrix_list(require(j, "P"));
  for (const auto& b : require(j, "boxes")) cfg.input_boxes.push_back(box_from_json(b));
  if (j.contains("reference")) {
    const json& r = j.at("reference");
    cfg.reference = Reference{vector_from_json(require(r, "x")), vector_from_json(require(r, "u"))};
  }
  if (j.contains("F")) doc.terminal_feedback = matrix_list(j.at("F"));
  return doc;
}

json mpc_to_json(const MPCConfig& cfg, const std::vector<MatrixXd>& feedback) {
  json j;
  j["N"] = cfg.horizon;
  j["Q"] = matrix_list_to_json(cfg.state_weights);
  j["R"] = matrix_list_to_json(cfg.input_weights);
  j["P"] = matrix_list_to_json(cfg.terminal_weights);
  json boxes = json::array();
  for (const auto& b : cfg.input_boxes) boxes.push_back(box_to_json(b));
  j["boxes"] = boxes;
  if (!feedback.empty()) j["F"] = matrix_list_to_json(feedback);
  if (cfg.reference) j["reference"] = {{"x", vector_to_json(cfg.reference->x)}, {"u", vector_to_json(cfg.reference->u)}};
  return j;
}

TerminalCandidate candidate_from_json(const json& j) {
  return {matrix_list(require(j, "P")), matrix_list(require(j, "F")), matrix_list(require(j, "W"))};
}

json candidate_to_json(const TerminalCandidate& cand) {
  return {{"P", matrix_list_to_json(cand.terminal)},
          {"F", matrix_list_to_json(cand.feedback)},
          {"W", matrix_list_to_json(cand.coupling)}};
}

json report_to_json(const SolveReport& rep, std::string_view algo) {
  json j;
  j["algo"] = std::string(algo);
  j["status"] = rep.status == SolveStatus::converged ? "converged" : "budget_exhausted";
  j["iterations"] = rep.iterations_used;
  j["objective"] = rep.final_objective;
  j["u"] = vector_to_json(rep.final_iterate);
  j["start_projected"] = rep.start_projected;
  if (!rep.objective_history.empty()) j["objective_history"] = rep.objective_history;
  if (!rep.gap_history.empty()) j["gap_history"] = rep.gap_history;
  if (rep.certificates_available) {
    j["certificates"] = {{"r0", rep.r0.value_or(0.0)},
                         {"initial_gap", rep.initial_gap.value_or(0.0)},
                         {"sublinear_violations", rep.sublinear_violations},
                         {"linear_violations", rep.linear_violations}};
  }
  return j;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

const json& section(const json& j, const char* key) {
  if (j.is_object() && j.contains(key)) return j.at(key);
  return j;
}

}  // namespace pcdm::io
