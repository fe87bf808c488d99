#include "pcdm/mpc_controller.hpp"

#include <cstdio>
#include <ostream>

#include "pcdm/errors.hpp"

namespace pcdm {

WarmStart warm_start_shift(const NetworkSystem& sys, int horizon, const VectorXd& u_prev,
                           const std::vector<MatrixXd>& feedback, const VectorXd& x_terminal,
                           const std::vector<BoxSet>& input_boxes, const VectorXd& kappa_offset) {
  if (horizon < 1) throw InputError("warm_start_shift: horizon must be positive");
  const Index m = sys.subsystem_count();
  const BlockPartition sp = sys.state_partition();
  const BlockPartition dp = decision_partition(sys, horizon);
  if (u_prev.size() != dp.dim()) throw InputError("warm_start_shift: previous trajectory has wrong length");
  if (x_terminal.size() != sp.dim()) throw InputError("warm_start_shift: terminal state has wrong length");
  if (!feedback.empty() && static_cast<Index>(feedback.size()) != m) throw InputError("warm_start_shift: need F^i per subsystem");
  if (static_cast<Index>(input_boxes.size()) != m) throw InputError("warm_start_shift: need one box per subsystem");
  const BlockPartition ip = sys.input_partition();
  if (kappa_offset.size() != 0 && kappa_offset.size() != ip.dim()) throw InputError("warm_start_shift: bad input offset");

  WarmStart out{VectorXd(dp.dim()), false};
  for (Index i = 0; i < m; ++i) {
    const Index mi = sys.input_dims[static_cast<size_t>(i)];
    auto dst = dp.block(out.inputs, i);
    const auto src = dp.block(u_prev, i);
    dst.head((horizon - 1) * mi) = src.tail((horizon - 1) * mi);
    VectorXd kappa = VectorXd::Zero(mi);
    if (!feedback.empty()) {
      const MatrixXd& f = feedback[static_cast<size_t>(i)];
      if (f.rows() != mi || f.cols() != sp.size(i)) throw InputError("warm_start_shift: F^i has wrong shape");
      kappa = f * sp.block(x_terminal, i);
    }
    if (kappa_offset.size() != 0) kappa += ip.block(kappa_offset, i);
    const BoxSet& box = input_boxes[static_cast<size_t>(i)];
    if (!box.contains(kappa)) {
      kappa = project_box(box, kappa);
      out.projected = true;
    }
    dst.tail(mi) = kappa;
  }
  return out;
}

SuboptimalMpc::SuboptimalMpc(NetworkSystem sys, MPCConfig cfg, int worker_count)
    : sys_(std::move(sys)), cfg_(std::move(cfg)), condensed_(condense(sys_, cfg_)), workers_(worker_count) {
  if (worker_count < 1) throw ConfigError("SuboptimalMpc: worker_count must be positive");
}

ControllerState SuboptimalMpc::initial_state(int budget, std::vector<MatrixXd> feedback) const {
  if (budget < 0) throw ConfigError("iteration budget must be nonnegative");
  ControllerState st;
  st.warm_start = condensed_.qp.project(VectorXd::Zero(condensed_.qp.dim()));
  st.terminal_feedback = std::move(feedback);
  st.iteration_budget = budget;
  return st;
}

double SuboptimalMpc::value(const VectorXd& x, const VectorXd& u) const {
  return eval_objective(condensed_.qp, u, x) + condensed_.constant(x);
}

StepRecord SuboptimalMpc::step(const VectorXd& x, ControllerState& state) const {
  if (x.size() != sys_.state_dim()) throw InputError("mpc step: state has wrong length");
  if (state.iteration_budget < 0) throw ConfigError("iteration budget must be nonnegative");
  const BlockedQP& qp = condensed_.qp;
  StepRecord rec;
  rec.state = x;

  VectorXd warm = state.warm_start;
  if (warm.size() != qp.dim()) throw InputError("mpc step: warm start has wrong length");
  if (!qp.feasible(warm)) {
    warm = qp.project(warm);
    rec.warm_start_projected = true;
  }
  const QuadraticOracle oracle(qp, x);
  SolverConfig sc;
  sc.stopping_mode = StoppingMode::iteration_budget;
  sc.max_iterations = state.iteration_budget;
  sc.worker_count = workers_;
  const SolveReport rep = solve(oracle, qp.boxes(), warm, sc);
  const VectorXd& u = rep.final_iterate;
  const double constant = condensed_.constant(x);
  rec.iterations = rep.iterations_used;
  rec.value = rep.final_objective + constant;
  rec.warm_value = oracle.value(warm) + constant;

  const std::vector<VectorXd> inputs = unstack_inputs(sys_, cfg_.horizon, u);
  rec.applied = inputs.front();
  rec.feasible = qp.feasible(u);
  for (Index i = 0; i < sys_.subsystem_count(); ++i) {
    rec.feasible = rec.feasible && cfg_.input_boxes[static_cast<size_t>(i)].contains(
                                       sys_.input_partition().block(rec.applied, i));
  }
  rec.stage = stage_cost(sys_, cfg_, x, rec.applied);

  const StackedTrajectory pred = simulate_linear(sys_, x, inputs);
  VectorXd x_end = pred.states.back();
  VectorXd u_offset;
  if (cfg_.reference) {
    x_end -= cfg_.reference->x;
    u_offset = cfg_.reference->u;
  }
  WarmStart next =
      warm_start_shift(sys_, cfg_.horizon, u, state.terminal_feedback, x_end, cfg_.input_boxes, u_offset);
  rec.warm_start_projected = rec.warm_start_projected || next.projected;
  rec.next_value = value(pred.states[1], next.inputs);
  rec.lyapunov_ok = rec.next_value <= rec.value - rec.stage + 1e-8 * (1.0 + std::abs(rec.value));
  state.warm_start = std::move(next.inputs);
  return rec;
}

ClosedLoopTrace SuboptimalMpc::closed_loop(const VectorXd& x0, int steps, ControllerState state) const {
  if (steps < 0) throw ConfigError("closed_loop: steps must be nonnegative");
  ClosedLoopTrace trace;
  VectorXd x = x0;
  for (int t = 0; t < steps; ++t) {
    StepRecord rec = step(x, state);
    rec.step = t;
    x = step_dynamics(sys_, x, rec.applied);
    trace.total_value += rec.value;
    trace.all_feasible = trace.all_feasible && rec.feasible;
    trace.records.push_back(std::move(rec));
  }
  trace.final_state = x;
  return trace;
}

void write_trace_csv(std::ostream& os, const ClosedLoopTrace& trace) {
  const Index n = trace.records.empty() ? trace.final_state.size() : trace.records.front().state.size();
  const Index m = trace.records.empty() ? 0 : trace.records.front().applied.size();
  os << "step";
  for (Index k = 0; k < n; ++k) os << ",x" << k;
  for (Index k = 0; k < m; ++k) os << ",u" << k;
  os << ",V_N,iters,feasible,lyapunov_ok\n";
  char buf[40];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
  };
  for (const auto& r : trace.records) {
    os << r.step;
    for (Index k = 0; k < r.state.size(); ++k) os << ',' << num(r.state[k]);
    for (Index k = 0; k < r.applied.size(); ++k) os << ',' << num(r.applied[k]);
    os << ',' << num(r.value) << ',' << r.iterations << ',' << (r.feasible ? 1 : 0) << ',' << (r.lyapunov_ok ? 1 : 0)
       << '\n';
  }
}

}  // namespace pcdm
