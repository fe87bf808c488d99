#include "pcdm/network.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "pcdm/errors.hpp"
#include "pcdm/linalg.hpp"

namespace pcdm {

Index NetworkSystem::state_dim() const {
  Index n = 0;
  for (Index d : state_dims) n += d;
  return n;
}

Index NetworkSystem::input_dim() const {
  Index m = 0;
  for (Index d : input_dims) m += d;
  return m;
}

void NetworkSystem::validate() const {
  const Index m = subsystem_count();
  if (m == 0) throw InputError("NetworkSystem: no subsystems");
  if (static_cast<Index>(input_dims.size()) != m) throw InputError("NetworkSystem: need one input dimension per subsystem");
  for (Index i = 0; i < m; ++i) {
    if (state_dims[static_cast<size_t>(i)] <= 0 || input_dims[static_cast<size_t>(i)] <= 0) {
      throw InputError("NetworkSystem: dimensions must be positive");
    }
  }
  auto check = [&](const BlockMap& blocks, const std::vector<Index>& col_dims, const char* name) {
    for (const auto& [key, blk] : blocks) {
      const auto [i, j] = key;
      if (i < 0 || j < 0 || i >= m || j >= m) {
        throw InputError(std::string("NetworkSystem: ") + name + " block index out of range");
      }
      if (blk.rows() != state_dims[static_cast<size_t>(i)] || blk.cols() != col_dims[static_cast<size_t>(j)]) {
        throw InputError(std::string("NetworkSystem: ") + name + " block (" + std::to_string(i) + "," +
                         std::to_string(j) + ") has wrong shape");
      }
      if (!blk.allFinite()) throw InputError(std::string("NetworkSystem: ") + name + " block not finite");
    }
  };
  check(a_blocks, state_dims, "A");
  check(b_blocks, input_dims, "B");
}

std::vector<Index> NetworkSystem::neighbors(Index i) const {
  std::set<Index> out{i};
  for (const auto& [key, blk] : a_blocks)
    if (key.first == i) out.insert(key.second);
  for (const auto& [key, blk] : b_blocks)
    if (key.first == i) out.insert(key.second);
  return {out.begin(), out.end()};
}

bool NetworkSystem::has_decoupled_states() const {
  return std::all_of(a_blocks.begin(), a_blocks.end(), [](const auto& kv) { return kv.first.first == kv.first.second; });
}

MatrixXd NetworkSystem::dense_a() const {
  const BlockPartition sp = state_partition();
  MatrixXd a = MatrixXd::Zero(sp.dim(), sp.dim());
  for (const auto& [key, blk] : a_blocks) a.block(sp.offset(key.first), sp.offset(key.second), blk.rows(), blk.cols()) = blk;
  return a;
}

MatrixXd NetworkSystem::dense_b() const {
  const BlockPartition sp = state_partition();
  const BlockPartition ip = input_partition();
  MatrixXd b = MatrixXd::Zero(sp.dim(), ip.dim());
  for (const auto& [key, blk] : b_blocks) b.block(sp.offset(key.first), ip.offset(key.second), blk.rows(), blk.cols()) = blk;
  return b;
}

NetworkSystem NetworkSystem::from_dense(std::vector<Index> state_dims, std::vector<Index> input_dims,
                                        const MatrixXd& a, const MatrixXd& b) {
  NetworkSystem sys;
  sys.state_dims = std::move(state_dims);
  sys.input_dims = std::move(input_dims);
  const BlockPartition sp = sys.state_partition();
  const BlockPartition ip = sys.input_partition();
  if (a.rows() != sp.dim() || a.cols() != sp.dim() || b.rows() != sp.dim() || b.cols() != ip.dim()) {
    throw InputError("NetworkSystem::from_dense: shape mismatch");
  }
  for (Index i = 0; i < sp.block_count(); ++i) {
    for (Index j = 0; j < sp.block_count(); ++j) {
      MatrixXd ab = a.block(sp.offset(i), sp.offset(j), sp.size(i), sp.size(j));
      if (!ab.isZero(0.0)) sys.a_blocks[{i, j}] = std::move(ab);
      MatrixXd bb = b.block(sp.offset(i), ip.offset(j), sp.size(i), ip.size(j));
      if (!bb.isZero(0.0)) sys.b_blocks[{i, j}] = std::move(bb);
    }
  }
  return sys;
}

void MPCConfig::validate(const NetworkSystem& sys) const {
  sys.validate();
  const size_t m = static_cast<size_t>(sys.subsystem_count());
  if (horizon < 1) throw InputError("MPCConfig: horizon must be positive");
  if (state_weights.size() != m || input_weights.size() != m || terminal_weights.size() != m ||
      input_boxes.size() != m) {
    throw InputError("MPCConfig: need one Q, R, P and box per subsystem");
  }
  for (size_t i = 0; i < m; ++i) {
    const Index n = sys.state_dims[i];
    const Index mi = sys.input_dims[i];
    const auto sq = [](const MatrixXd& w, Index d) { return w.rows() == d && w.cols() == d; };
    if (!sq(state_weights[i], n) || !sq(terminal_weights[i], n) || !sq(input_weights[i], mi)) {
      throw InputError("MPCConfig: weight of subsystem " + std::to_string(i) + " has wrong shape");
    }
    if (!linalg::is_symmetric(state_weights[i], 1e-10) || !linalg::is_symmetric(input_weights[i], 1e-10) ||
        !linalg::is_symmetric(terminal_weights[i], 1e-10)) {
      throw InputError("MPCConfig: weights of subsystem " + std::to_string(i) + " must be symmetric");
    }
    if (!(linalg::min_eigenvalue(input_weights[i]) > 0.0)) {
      throw ConfigError("MPCConfig: R^" + std::to_string(i) + " is not positive definite");
    }
    if (linalg::min_eigenvalue(state_weights[i]) < -1e-12 * std::max(1.0, state_weights[i].norm()) ||
        linalg::min_eigenvalue(terminal_weights[i]) < -1e-12 * std::max(1.0, terminal_weights[i].norm())) {
      throw ConfigError("MPCConfig: Q^" + std::to_string(i) + " and P^" + std::to_string(i) + " must be PSD");
    }
    input_boxes[i].validate();
    if (input_boxes[i].dim() != mi) throw InputError("MPCConfig: box " + std::to_string(i) + " has wrong dimension");
  }
  if (reference) {
    if (reference->x.size() != sys.state_dim() || reference->u.size() != sys.input_dim()) {
      throw InputError("MPCConfig: reference has wrong dimensions");
    }
  }
}

BlockPartition decision_partition(const NetworkSystem& sys, int horizon) {
  std::vector<Index> sizes;
  for (Index mi : sys.input_dims) sizes.push_back(horizon * mi);
  return BlockPartition(std::move(sizes));
}

VectorXd stack_inputs(const NetworkSystem& sys, const std::vector<VectorXd>& per_step) {
  const int horizon = static_cast<int>(per_step.size());
  const BlockPartition ip = sys.input_partition();
  const BlockPartition dp = decision_partition(sys, horizon);
  VectorXd u(dp.dim());
  for (int t = 0; t < horizon; ++t) {
    if (per_step[static_cast<size_t>(t)].size() != ip.dim()) throw InputError("stack_inputs: input has wrong length");
    for (Index i = 0; i < ip.block_count(); ++i) {
      u.segment(dp.offset(i) + t * ip.size(i), ip.size(i)) = ip.block(per_step[static_cast<size_t>(t)], i);
    }
  }
  return u;
}

std::vector<VectorXd> unstack_inputs(const NetworkSystem& sys, int horizon, const VectorXd& u) {
  const BlockPartition ip = sys.input_partition();
  const BlockPartition dp = decision_partition(sys, horizon);
  if (u.size() != dp.dim()) throw InputError("unstack_inputs: decision vector has wrong length");
  std::vector<VectorXd> out(static_cast<size_t>(horizon), VectorXd(ip.dim()));
  for (int t = 0; t < horizon; ++t)
    for (Index i = 0; i < ip.block_count(); ++i)
      ip.block(out[static_cast<size_t>(t)], i) = u.segment(dp.offset(i) + t * ip.size(i), ip.size(i));
  return out;
}

Neighborhoods sparsity_pattern(const NetworkSystem& sys) {
  const Index m = sys.subsystem_count();
  Neighborhoods nb;
  nb.in.resize(static_cast<size_t>(m));
  nb.out.resize(static_cast<size_t>(m));
  nb.two_hop.resize(static_cast<size_t>(m));
  std::vector<std::set<Index>> out_sets(static_cast<size_t>(m));
  for (Index i = 0; i < m; ++i) {
    nb.in[static_cast<size_t>(i)] = sys.neighbors(i);
    for (Index j : nb.in[static_cast<size_t>(i)]) out_sets[static_cast<size_t>(j)].insert(i);
  }
  for (Index i = 0; i < m; ++i) {
    nb.out[static_cast<size_t>(i)].assign(out_sets[static_cast<size_t>(i)].begin(), out_sets[static_cast<size_t>(i)].end());
    std::set<Index> hop(nb.in[static_cast<size_t>(i)].begin(), nb.in[static_cast<size_t>(i)].end());
    for (Index j : nb.out[static_cast<size_t>(i)])
      for (Index l : nb.in[static_cast<size_t>(j)]) hop.insert(l);
    nb.two_hop[static_cast<size_t>(i)].assign(hop.begin(), hop.end());
  }
  return nb;
}

}  // namespace pcdm
