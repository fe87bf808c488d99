#pragma once

#include <optional>
#include <vector>

#include "pcdm/qp_model.hpp"

namespace pcdm {

/// Interconnected linear subsystems
///   x^i_{t+1} = sum_j A^{ij} x^j_t + B^{ij} u^j_t.
/// Absent (i,j) keys are zero blocks.
struct NetworkSystem {
  std::vector<Index> state_dims;
  std::vector<Index> input_dims;
  BlockMap a_blocks;
  BlockMap b_blocks;

  Index subsystem_count() const { return static_cast<Index>(state_dims.size()); }
  Index state_dim() const;
  Index input_dim() const;
  BlockPartition state_partition() const { return BlockPartition(state_dims); }
  BlockPartition input_partition() const { return BlockPartition(input_dims); }

  /// Throws InputError on inconsistent dimensions or out-of-range keys.
  void validate() const;

  /// N^i = {j : A^{ij} or B^{ij} present} ∪ {i}, sorted.
  std::vector<Index> neighbors(Index i) const;

  /// A^{ij} == 0 for every i != j (only inputs couple subsystems).
  bool has_decoupled_states() const;

  MatrixXd dense_a() const;
  MatrixXd dense_b() const;

  static NetworkSystem from_dense(std::vector<Index> state_dims, std::vector<Index> input_dims, const MatrixXd& a,
                                  const MatrixXd& b);
};

/// Setpoint tracked by the stage and terminal costs.
struct Reference {
  VectorXd x;
  VectorXd u;
};

struct MPCConfig {
  int horizon = 1;
  std::vector<MatrixXd> state_weights;     ///< Q^i, PSD
  std::vector<MatrixXd> input_weights;     ///< R^i, PD
  std::vector<MatrixXd> terminal_weights;  ///< P^i, PD
  std::vector<BoxSet> input_boxes;         ///< U^i, per time step
  std::optional<Reference> reference;

  /// Throws InputError on dimension errors and ConfigError when R^i is not
  /// positive definite or P^i is not PSD.
  void validate(const NetworkSystem& sys) const;
};

struct StackedTrajectory {
  std::vector<VectorXd> states;  ///< x_0 .. x_N (global, stacked by subsystem)
  std::vector<VectorXd> inputs;  ///< u_0 .. u_{N-1}
};

/// Decision vector layout: block i = (u^i_0, ..., u^i_{N-1}).
BlockPartition decision_partition(const NetworkSystem& sys, int horizon);
VectorXd stack_inputs(const NetworkSystem& sys, const std::vector<VectorXd>& per_step);
std::vector<VectorXd> unstack_inputs(const NetworkSystem& sys, int horizon, const VectorXd& u);

struct Neighborhoods {
  std::vector<std::vector<Index>> in;       ///< N^i
  std::vector<std::vector<Index>> out;      ///< N̄^i = {j : i ∈ N^j}
  std::vector<std::vector<Index>> two_hop;  ///< N̂^i = N^i ∪ {l ∈ N^j : j ∈ N̄^i}
};

Neighborhoods sparsity_pattern(const NetworkSystem& sys);

}  // namespace pcdm
