#include "pcdm/mpc_condenser.hpp"

#include <string>

#include "pcdm/errors.hpp"

namespace pcdm {

double StateQuadratic::operator()(const VectorXd& x) const {
  if (x.size() != lin.size()) throw InputError("StateQuadratic: state has wrong length");
  return x.dot(quad * x) + lin.dot(x) + offset;
}

VectorXd step_dynamics(const NetworkSystem& sys, const VectorXd& x, const VectorXd& u) {
  const BlockPartition sp = sys.state_partition();
  const BlockPartition ip = sys.input_partition();
  if (x.size() != sp.dim() || u.size() != ip.dim()) throw InputError("step_dynamics: dimension mismatch");
  VectorXd next = VectorXd::Zero(sp.dim());
  for (const auto& [key, blk] : sys.a_blocks) sp.block(next, key.first).noalias() += blk * sp.block(x, key.second);
  for (const auto& [key, blk] : sys.b_blocks) sp.block(next, key.first).noalias() += blk * ip.block(u, key.second);
  return next;
}

StackedTrajectory simulate_linear(const NetworkSystem& sys, const VectorXd& x0, const std::vector<VectorXd>& inputs) {
  sys.validate();
  StackedTrajectory traj;
  traj.states.reserve(inputs.size() + 1);
  traj.states.push_back(x0);
  for (const VectorXd& u : inputs) traj.states.push_back(step_dynamics(sys, traj.states.back(), u));
  traj.inputs = inputs;
  return traj;
}

namespace {

// Structurally-zero blocks are empty matrices.
using BlockGrid = std::vector<std::vector<MatrixXd>>;

bool present(const MatrixXd& m) { return m.size() > 0; }

void accumulate(MatrixXd& target, const MatrixXd& term) {
  if (!present(target)) target = term;
  else target += term;
}

}  // namespace

CondensedMPC condense(const NetworkSystem& sys, const MPCConfig& cfg) {
  cfg.validate(sys);
  const Index m = sys.subsystem_count();
  const int horizon = cfg.horizon;
  const auto& nd = sys.state_dims;
  const auto& md = sys.input_dims;
  const BlockPartition sp = sys.state_partition();
  const BlockPartition ip = sys.input_partition();
  const BlockPartition dp = decision_partition(sys, horizon);
  const auto sz = [](Index i) { return static_cast<size_t>(i); };

  VectorXd ref_x = VectorXd::Zero(sp.dim());
  VectorXd ref_u = VectorXd::Zero(ip.dim());
  if (cfg.reference) {
    ref_x = cfg.reference->x;
    ref_u = cfg.reference->u;
  }

  // gamma[k][j]: effect of decision block j on x^k_t; phi[k][l]: effect of x^l_0.
  BlockGrid gamma(sz(m), std::vector<MatrixXd>(sz(m)));
  BlockGrid phi(sz(m), std::vector<MatrixXd>(sz(m)));
  for (Index k = 0; k < m; ++k) phi[sz(k)][sz(k)] = MatrixXd::Identity(nd[sz(k)], nd[sz(k)]);

  BlockGrid hess(sz(m), std::vector<MatrixXd>(sz(m)));  // upper triangle of Gamma' W Gamma
  BlockGrid lin_map(sz(m), std::vector<MatrixXd>(sz(m)));
  std::vector<VectorXd> lin_const(sz(m));
  for (Index i = 0; i < m; ++i) lin_const[sz(i)] = VectorXd::Zero(dp.size(i));
  StateQuadratic constant{MatrixXd::Zero(sp.dim(), sp.dim()), VectorXd::Zero(sp.dim()), 0.0};

  for (int t = 0; t <= horizon; ++t) {
    const auto& weights = t < horizon ? cfg.state_weights : cfg.terminal_weights;
    for (Index k = 0; k < m; ++k) {
      const MatrixXd& wk = weights[sz(k)];
      const VectorXd rk = sp.block(ref_x, k);
      for (Index i = 0; i < m; ++i) {
        const MatrixXd& gi = gamma[sz(k)][sz(i)];
        if (!present(gi)) continue;
        const MatrixXd gi_w = gi.transpose() * wk;
        for (Index j = i; j < m; ++j) {
          const MatrixXd& gj = gamma[sz(k)][sz(j)];
          if (present(gj)) accumulate(hess[sz(i)][sz(j)], gi_w * gj);
        }
        for (Index l = 0; l < m; ++l) {
          const MatrixXd& pl = phi[sz(k)][sz(l)];
          if (present(pl)) accumulate(lin_map[sz(i)][sz(l)], gi_w * pl);
        }
        lin_const[sz(i)] -= gi_w * rk;
      }
      for (Index l = 0; l < m; ++l) {
        const MatrixXd& pl = phi[sz(k)][sz(l)];
        if (!present(pl)) continue;
        const MatrixXd pl_w = pl.transpose() * wk;
        for (Index l2 = 0; l2 < m; ++l2) {
          const MatrixXd& pl2 = phi[sz(k)][sz(l2)];
          if (present(pl2)) {
            constant.quad.block(sp.offset(l), sp.offset(l2), nd[sz(l)], nd[sz(l2)]) += pl_w * pl2;
          }
        }
        sp.block(constant.lin, l) -= 2.0 * pl_w * rk;
      }
      constant.offset += rk.dot(wk * rk);
    }
    if (t == horizon) break;

    BlockGrid gamma_next(sz(m), std::vector<MatrixXd>(sz(m)));
    BlockGrid phi_next(sz(m), std::vector<MatrixXd>(sz(m)));
    for (const auto& [key, a] : sys.a_blocks) {
      const auto [k, l] = key;
      for (Index j = 0; j < m; ++j) {
        if (present(gamma[sz(l)][sz(j)])) accumulate(gamma_next[sz(k)][sz(j)], a * gamma[sz(l)][sz(j)]);
        if (present(phi[sz(l)][sz(j)])) accumulate(phi_next[sz(k)][sz(j)], a * phi[sz(l)][sz(j)]);
      }
    }
    for (const auto& [key, b] : sys.b_blocks) {
      const auto [k, j] = key;
      MatrixXd& g = gamma_next[sz(k)][sz(j)];
      if (!present(g)) g = MatrixXd::Zero(nd[sz(k)], dp.size(j));
      g.middleCols(t * md[sz(j)], md[sz(j)]) += b;
    }
    gamma = std::move(gamma_next);
    phi = std::move(phi_next);
  }

  BlockMap q_blocks;
  BlockMap w_blocks;
  VectorXd w(dp.dim());
  for (Index i = 0; i < m; ++i) {
    const MatrixXd& r = cfg.input_weights[sz(i)];
    const Index mi = md[sz(i)];
    MatrixXd& hii = hess[sz(i)][sz(i)];
    if (!present(hii)) hii = MatrixXd::Zero(dp.size(i), dp.size(i));
    VectorXd wi = lin_const[sz(i)];
    const VectorXd ru = ip.block(ref_u, i);
    for (int t = 0; t < horizon; ++t) {
      hii.block(t * mi, t * mi, mi, mi) += r;
      wi.segment(t * mi, mi) -= r * ru;
      constant.offset += ru.dot(r * ru);
    }
    hii = 0.5 * (hii + hii.transpose()).eval();
    for (Index j = i; j < m; ++j)
      if (present(hess[sz(i)][sz(j)])) q_blocks[{i, j}] = 2.0 * hess[sz(i)][sz(j)];
    for (Index l = 0; l < m; ++l)
      if (present(lin_map[sz(i)][sz(l)])) w_blocks[{i, l}] = 2.0 * lin_map[sz(i)][sz(l)];
    dp.block(w, i) = 2.0 * wi;
  }
  constant.quad = 0.5 * (constant.quad + constant.quad.transpose()).eval();

  std::vector<BoxSet> boxes;
  for (Index i = 0; i < m; ++i) {
    const BoxSet& u_box = cfg.input_boxes[sz(i)];
    boxes.push_back({u_box.lower.replicate(horizon, 1), u_box.upper.replicate(horizon, 1)});
  }
  return {BlockedQP(dp, q_blocks, std::move(boxes), std::move(w), sp, w_blocks), std::move(constant)};
}

double stage_cost(const NetworkSystem& sys, const MPCConfig& cfg, const VectorXd& x, const VectorXd& u) {
  const BlockPartition sp = sys.state_partition();
  const BlockPartition ip = sys.input_partition();
  if (x.size() != sp.dim() || u.size() != ip.dim()) throw InputError("stage_cost: dimension mismatch");
  double acc = 0.0;
  for (Index i = 0; i < sys.subsystem_count(); ++i) {
    VectorXd dx = sp.block(x, i);
    VectorXd du = ip.block(u, i);
    if (cfg.reference) {
      dx -= sp.block(cfg.reference->x, i);
      du -= ip.block(cfg.reference->u, i);
    }
    acc += dx.dot(cfg.state_weights[static_cast<size_t>(i)] * dx) + du.dot(cfg.input_weights[static_cast<size_t>(i)] * du);
  }
  return acc;
}

double terminal_cost_value(const NetworkSystem& sys, const MPCConfig& cfg, const VectorXd& x) {
  const BlockPartition sp = sys.state_partition();
  if (x.size() != sp.dim()) throw InputError("terminal_cost_value: dimension mismatch");
  double acc = 0.0;
  for (Index i = 0; i < sys.subsystem_count(); ++i) {
    VectorXd dx = sp.block(x, i);
    if (cfg.reference) dx -= sp.block(cfg.reference->x, i);
    acc += dx.dot(cfg.terminal_weights[static_cast<size_t>(i)] * dx);
  }
  return acc;
}

double eval_VN(const NetworkSystem& sys, const MPCConfig& cfg, const VectorXd& x, const VectorXd& u) {
  cfg.validate(sys);
  if (x.size() != sys.state_dim()) throw InputError("eval_VN: state has wrong length");
  const std::vector<VectorXd> inputs = unstack_inputs(sys, cfg.horizon, u);
  const StackedTrajectory traj = simulate_linear(sys, x, inputs);
  double v = 0.0;
  for (int t = 0; t < cfg.horizon; ++t) {
    v += stage_cost(sys, cfg, traj.states[static_cast<size_t>(t)], inputs[static_cast<size_t>(t)]);
  }
  return v + terminal_cost_value(sys, cfg, traj.states.back());
}

}  // namespace pcdm
