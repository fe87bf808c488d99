#pragma once

#include <iosfwd>
#include <vector>

#include "pcdm/mpc_condenser.hpp"
#include "pcdm/pcdm_solver.hpp"

namespace pcdm {

struct ControllerState {
  VectorXd warm_start;                        ///< stacked decision vector
  std::vector<MatrixXd> terminal_feedback;    ///< F^i; empty means F = 0
  int iteration_budget = 0;
};

struct WarmStart {
  VectorXd inputs;
  bool projected = false;  ///< kappa violated a box and was clamped
};

/// (u_1, ..., u_{N-1}, kappa) with kappa^i = F^i x_N^i (+ offset^i when a
/// setpoint is tracked; x_terminal is then the deviation from it).
WarmStart warm_start_shift(const NetworkSystem& sys, int horizon, const VectorXd& u_prev,
                           const std::vector<MatrixXd>& feedback, const VectorXd& x_terminal,
                           const std::vector<BoxSet>& input_boxes, const VectorXd& kappa_offset = {});

struct StepRecord {
  int step = 0;
  VectorXd state;
  VectorXd applied;
  double value = 0.0;        ///< V_N(x, u^CD)
  double warm_value = 0.0;   ///< V_N(x, warm start)
  double stage = 0.0;        ///< l(x, u_0)
  double next_value = 0.0;   ///< V_N(x+, shifted)
  int iterations = 0;
  bool feasible = false;
  bool warm_start_projected = false;
  bool lyapunov_ok = false;  ///< next_value <= value - stage + 1e-8 (1 + value)
};

struct ClosedLoopTrace {
  std::vector<StepRecord> records;
  VectorXd final_state;
  double total_value = 0.0;  ///< sum_t V_N(x_t, u^CD_t)
  bool all_feasible = true;
};

/// Suboptimal MPC with a fixed PCDM iteration budget per step. The condensed
/// Hessian is built once; each step only refreshes the linear term.
class SuboptimalMpc {
 public:
  SuboptimalMpc(NetworkSystem sys, MPCConfig cfg, int worker_count = 1);

  const NetworkSystem& system() const { return sys_; }
  const MPCConfig& config() const { return cfg_; }
  const CondensedMPC& condensed() const { return condensed_; }

  /// Zero trajectory projected onto the boxes.
  ControllerState initial_state(int budget, std::vector<MatrixXd> feedback = {}) const;

  /// V_N(x, u) from the condensed form.
  double value(const VectorXd& x, const VectorXd& u) const;

  /// Applies exactly state.iteration_budget PCDM iterations from the warm
  /// start, records the step and advances state.warm_start.
  StepRecord step(const VectorXd& x, ControllerState& state) const;

  /// Runs `steps` closed-loop steps on the linear model.
  ClosedLoopTrace closed_loop(const VectorXd& x0, int steps, ControllerState state) const;

 private:
  NetworkSystem sys_;
  MPCConfig cfg_;
  CondensedMPC condensed_;
  int workers_;
};

/// Columns: step, x0..x{n-1}, u0..u{m-1}, V_N, iters, feasible, lyapunov_ok.
void write_trace_csv(std::ostream& os, const ClosedLoopTrace& trace);

}  // namespace pcdm
