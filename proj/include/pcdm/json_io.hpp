#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"

#include "pcdm/network.hpp"
#include "pcdm/pcdm_solver.hpp"
#include "pcdm/terminal_cost.hpp"

namespace pcdm::io {

using nlohmann::json;

// Matrices are arrays of rows, vectors flat arrays. Block maps use "i,j" keys
// (0-based). Box bounds may be null, meaning -inf for "lo" and +inf for "hi".

json matrix_to_json(const MatrixXd& m);
MatrixXd matrix_from_json(const json& j);
json vector_to_json(const VectorXd& v);
VectorXd vector_from_json(const json& j);
json box_to_json(const BoxSet& box);
BoxSet box_from_json(const json& j);

struct QpDocument {
  BlockedQP qp;
  std::optional<VectorXd> state;  ///< "x": state for the linear map W
};

/// {"blocks", "Q", "W"?, "state_blocks"?, "w"?, "boxes", "x"?}
QpDocument qp_from_json(const json& j);
json qp_to_json(const BlockedQP& qp, const std::optional<VectorXd>& state = std::nullopt);

/// {"M", "n", "m", "A", "B"}
NetworkSystem system_from_json(const json& j);
json system_to_json(const NetworkSystem& sys);

struct MpcDocument {
  MPCConfig config;
  std::vector<MatrixXd> terminal_feedback;  ///< optional "F"
};

/// {"N", "Q", "R", "P", "boxes", "F"?, "reference"?: {"x", "u"}}
MpcDocument mpc_from_json(const json& j);
json mpc_to_json(const MPCConfig& cfg, const std::vector<MatrixXd>& feedback = {});

/// {"P", "F", "W"}
TerminalCandidate candidate_from_json(const json& j);
json candidate_to_json(const TerminalCandidate& cand);

json report_to_json(const SolveReport& rep, std::string_view algo);

json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// If j is an object holding `key`, returns j[key]; otherwise j itself. Lets
/// one combined file serve several command-line options.
const json& section(const json& j, const char* key);

}  // namespace pcdm::io
