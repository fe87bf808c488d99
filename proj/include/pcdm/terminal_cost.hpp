#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pcdm/network.hpp"
#include "pcdm/sdpa.hpp"

namespace pcdm {

struct StageWeights {
  std::vector<MatrixXd> state;  ///< Q^i
  std::vector<MatrixXd> input;  ///< R^i

  static StageWeights from_config(const MPCConfig& cfg) { return {cfg.state_weights, cfg.input_weights}; }
};

/// Neighbourhood ordering used for every W^{N_i}: i first, then N^i \ {i}
/// ascending.
std::vector<Index> local_neighborhood(const NetworkSystem& sys, Index i);

/// Distributed terminal ingredients: l_f^i(x) = x'P^i x, kappa^i(x) = F^i x^i,
/// and one coupling matrix W^{N_i} per subsystem over local_neighborhood(i).
struct TerminalCandidate {
  std::vector<MatrixXd> terminal;  ///< P^i
  std::vector<MatrixXd> feedback;  ///< F^i, m_i x n_i
  std::vector<MatrixXd> coupling;  ///< W^{N_i}

  /// Throws InputError on missing or misshaped blocks and when P^i is not
  /// symmetric positive definite.
  void validate(const NetworkSystem& sys) const;

  MatrixXd dense_terminal(const NetworkSystem& sys) const;
  MatrixXd dense_feedback(const NetworkSystem& sys) const;
};

/// Zero W^{N_i} of the right sizes.
std::vector<MatrixXd> zero_coupling(const NetworkSystem& sys);

struct MatrixCheck {
  double max_eigenvalue = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// M_i'P^i M_i - E'(P^i - Q^i - F^i'R^iF^i)E with M_i = A^{N_i} + B^{N_i}F^{N_i}
/// and E selecting x^i. The local condition is lhs <= W^{N_i}.
MatrixXd local_lhs(const NetworkSystem& sys, Index i, const TerminalCandidate& cand, const StageWeights& costs);

/// Pass iff lambda_max(lhs - W^{N_i}) <= 1e-8 (1 + ||M_i'P^iM_i|| + ||P^i - Q^i - F'RF||).
/// The tolerance does not depend on W, so enlarging W never breaks a pass.
MatrixCheck verify_local_mi(const NetworkSystem& sys, Index i, const TerminalCandidate& cand, const StageWeights& costs);

/// sum_i J_i' W^{N_i} J_i on the full state.
MatrixXd assemble_coupling(const NetworkSystem& sys, const TerminalCandidate& cand);

/// (A+BF)'P(A+BF) - P + Q + F'RF with block-diagonal P, F, Q, R.
MatrixXd lyapunov_residual(const NetworkSystem& sys, const TerminalCandidate& cand, const StageWeights& costs);

struct GlobalCertificate {
  MatrixCheck coupling;    ///< W <= 0
  MatrixCheck lyapunov;    ///< direct decrease condition
  std::vector<MatrixCheck> local;
  bool pass = false;       ///< coupling.pass && lyapunov.pass
  bool locals_pass = false;
};

GlobalCertificate verify_global(const NetworkSystem& sys, const TerminalCandidate& cand, const StageWeights& costs);

struct SynthesisResult {
  std::optional<TerminalCandidate> candidate;
  double scale = 0.0;  ///< beta in P^i = beta * Phat^i
  std::string message;
};

/// Local LQR gains with P^i = beta * Phat^i, beta = 1, 2, ..., 2^20, and
/// W^{N_i} set to the local residuals. Returns the first candidate that
/// passes verify_global. If no beta works and every A^{ii} is Schur stable,
/// the search is repeated with F^i = 0 and Phat^i from the local Lyapunov
/// equation. Otherwise no candidate and a reason.
SynthesisResult synth_fallback(const NetworkSystem& sys, const StageWeights& costs);

struct TerminalIngredients {
  std::vector<MatrixXd> terminal;  ///< P^i
  std::vector<MatrixXd> feedback;  ///< F^i
  bool certified = false;          ///< came from a candidate passing verify_global
  std::string message;
};

/// synth_fallback's P^i, F^i when it succeeds; otherwise the local LQR gains
/// and Riccati matrices, uncertified.
TerminalIngredients default_terminal(const NetworkSystem& sys, const StageWeights& costs);

struct RegionOptions {
  int samples = 100000;
  std::uint64_t seed = 7;
  int grid_min_exponent = -60;  ///< alpha grid is 2^k, k in [min, max]
  int grid_max_exponent = 60;
};

struct StabilityRegion {
  double alpha = 0.0;
  double d = 0.0;
  std::string method = "sampling";
  bool empty = true;
  std::string message;
};

/// Sampling estimate of Omega = {x : x'Px <= alpha} and of d = min l(x, Fx)
/// outside Omega. The minimizing boundary direction is added to the samples,
/// so d is the exact infimum of l(x, Fx) over x'Px >= alpha.
StabilityRegion estimate_region(const NetworkSystem& sys, const TerminalCandidate& cand, const std::vector<BoxSet>& boxes,
                                const StageWeights& costs, const RegionOptions& opts = {});

enum class LmiVariableKind { general, symmetric, scalar };

struct LmiVariable {
  std::string name;
  LmiVariableKind kind = LmiVariableKind::general;
  Index rows = 0;
  Index cols = 0;
  int first = 0;  ///< 1-based SDPA index of the first scalar
  int count = 0;
};

/// The min-delta SDP for distributed terminal ingredients in SDPA form.
/// Y^{i,j} = Y^j is eliminated by substitution, so the problem has M LMI
/// blocks plus delta*I - sum W~ >= 0.
struct LmiExport {
  SdpaProblem problem;
  std::vector<LmiVariable> variables;
  std::vector<int> lmi_sizes;
  int block_rows = 3;

  const LmiVariable& variable(const std::string& name) const;
};

/// Throws UnsupportedStructure unless every n_i is equal.
LmiExport export_sdpa(const NetworkSystem& sys, const StageWeights& costs);

/// Reads G, S^i, Y^i, W~^{N_i} from an SDP solution vector and maps them to
/// P^i = (S^i)^{-1}, F^i = Y^i G^{-1}, W^{N_i} = (I (x) G)^{-T} W~^{N_i} (I (x) G)^{-1}.
TerminalCandidate import_sdp_solution(const NetworkSystem& sys, const LmiExport& lmi, const VectorXd& x);

/// Inverse of import for a given G: packs a candidate into an SDP point.
/// mu_i and delta are set by the caller-supplied values.
VectorXd pack_sdp_point(const NetworkSystem& sys, const LmiExport& lmi, const MatrixXd& g, const TerminalCandidate& cand,
                        double mu, double delta);

}  // namespace pcdm
