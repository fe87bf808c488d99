#pragma once

#include <vector>

#include "pcdm/network.hpp"
#include "pcdm/qp_model.hpp"

namespace pcdm {

/// x'Hx + g'x + c: the part of V_N that depends on the initial state only.
struct StateQuadratic {
  MatrixXd quad;
  VectorXd lin;
  double offset = 0.0;

  double operator()(const VectorXd& x) const;
};

/// V_N(x, u) = eval_objective(qp, u, x) + constant(x).
struct CondensedMPC {
  BlockedQP qp;
  StateQuadratic constant;
};

StackedTrajectory simulate_linear(const NetworkSystem& sys, const VectorXd& x0, const std::vector<VectorXd>& inputs);

/// One step of the network dynamics.
VectorXd step_dynamics(const NetworkSystem& sys, const VectorXd& x, const VectorXd& u);

/// Eliminates the states of the MPC problem. Q^{ij} and W^{ij} are stored only
/// where the prediction operator is structurally nonzero, so for systems with
/// decoupled states (A^{ij} = 0, i != j) Q^{ij} is absent outside N̂^i and W^{ij}
/// outside N̄^i.
CondensedMPC condense(const NetworkSystem& sys, const MPCConfig& cfg);

/// sum_i ||x^i - xr^i||^2_{Q^i} + ||u^i - ur^i||^2_{R^i}
double stage_cost(const NetworkSystem& sys, const MPCConfig& cfg, const VectorXd& x, const VectorXd& u);

/// sum_i ||x^i - xr^i||^2_{P^i}
double terminal_cost_value(const NetworkSystem& sys, const MPCConfig& cfg, const VectorXd& x);

/// V_N(x, u) by forward simulation; u is the stacked decision vector.
double eval_VN(const NetworkSystem& sys, const MPCConfig& cfg, const VectorXd& x, const VectorXd& u);

}  // namespace pcdm
