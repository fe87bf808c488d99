#include "pcdm/qp_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pcdm/errors.hpp"
#include "pcdm/linalg.hpp"

namespace pcdm {

namespace {

std::string key_str(Index i, Index j) { return "(" + std::to_string(i) + "," + std::to_string(j) + ")"; }

void check_vector(const VectorXd& v, Index n, const char* what) {
  if (v.size() != n) {
    throw InputError(std::string(what) + ": expected length " + std::to_string(n) + ", got " +
                     std::to_string(v.size()));
  }
}

const MatrixXd* find_in_row(const std::vector<BlockEntry>& row, Index j) {
  auto it = std::lower_bound(row.begin(), row.end(), j,
                             [](const BlockEntry& e, Index c) { return e.col < c; });
  return (it != row.end() && it->col == j) ? &it->mat : nullptr;
}

}  // namespace

// ---------------------------------------------------------------------------
// BlockPartition / BoxSet

BlockPartition::BlockPartition(std::vector<Index> sizes) : sizes_(std::move(sizes)) {
  offsets_.assign(1, 0);
  for (Index s : sizes_) {
    if (s <= 0) throw InputError("BlockPartition: block sizes must be positive");
    offsets_.push_back(offsets_.back() + s);
  }
}

BoxSet BoxSet::unbounded(Index n) {
  const double inf = std::numeric_limits<double>::infinity();
  return {VectorXd::Constant(n, -inf), VectorXd::Constant(n, inf)};
}

BoxSet BoxSet::uniform(Index n, double lo, double hi) {
  return {VectorXd::Constant(n, lo), VectorXd::Constant(n, hi)};
}

bool BoxSet::contains(const Eigen::Ref<const VectorXd>& v, double tol) const {
  if (v.size() != lower.size()) return false;
  for (Index k = 0; k < v.size(); ++k) {
    if (!(v[k] >= lower[k] - tol && v[k] <= upper[k] + tol)) return false;
  }
  return true;
}

bool BoxSet::is_bounded() const { return lower.allFinite() && upper.allFinite(); }

void BoxSet::validate() const {
  if (lower.size() != upper.size()) throw InputError("BoxSet: lower/upper length mismatch");
  for (Index k = 0; k < lower.size(); ++k) {
    if (std::isnan(lower[k]) || std::isnan(upper[k]) || lower[k] > upper[k]) {
      throw InputError("BoxSet: lower > upper at index " + std::to_string(k));
    }
  }
}

VectorXd project_box(const BoxSet& box, const Eigen::Ref<const VectorXd>& v) {
  if (v.size() != box.dim()) throw InputError("project_box: dimension mismatch");
  return v.cwiseMax(box.lower).cwiseMin(box.upper);
}

VectorXd ObjectiveOracle::gradient(const VectorXd& u) const {
  const auto& part = partition();
  VectorXd g(part.dim());
  for (Index i = 0; i < part.block_count(); ++i) part.block(g, i) = partial_gradient(u, i);
  return g;
}

// ---------------------------------------------------------------------------
// BlockedQP

BlockedQP::BlockedQP(BlockPartition partition, const BlockMap& hessian, std::vector<BoxSet> boxes,
                     VectorXd linear_const, BlockPartition state_partition,
                     const BlockMap& linear_map)
    : partition_(std::move(partition)),
      state_partition_(std::move(state_partition)),
      boxes_(std::move(boxes)) {
  const Index m = partition_.block_count();
  if (m == 0) throw InputError("BlockedQP: empty partition");
  if (static_cast<Index>(boxes_.size()) != m) throw InputError("BlockedQP: one box per block required");
  for (Index i = 0; i < m; ++i) {
    box(i).validate();
    if (box(i).dim() != partition_.size(i)) {
      throw InputError("BlockedQP: box " + std::to_string(i) + " has wrong dimension");
    }
  }
  linear_const_ = linear_const.size() == 0 ? VectorXd::Zero(partition_.dim()) : std::move(linear_const);
  check_vector(linear_const_, partition_.dim(), "BlockedQP linear_const");

  BlockMap full;
  for (const auto& [key, blk] : hessian) {
    const auto [i, j] = key;
    if (i < 0 || j < 0 || i >= m || j >= m) throw InputError("BlockedQP: Q block index out of range " + key_str(i, j));
    if (blk.rows() != partition_.size(i) || blk.cols() != partition_.size(j)) {
      throw InputError("BlockedQP: Q block " + key_str(i, j) + " has wrong shape");
    }
    if (!blk.allFinite()) throw InputError("BlockedQP: Q block " + key_str(i, j) + " not finite");
    if (i == j && !linalg::is_symmetric(blk, 1e-10)) {
      throw InputError("BlockedQP: diagonal block " + key_str(i, i) + " not symmetric");
    }
    if (auto it = hessian.find({j, i}); it != hessian.end() && i != j) {
      const double scale = std::max(1.0, blk.cwiseAbs().maxCoeff());
      if ((it->second.transpose() - blk).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw InputError("BlockedQP: Q not symmetric at " + key_str(i, j));
      }
    }
    full[key] = blk;
    if (i != j && !hessian.contains({j, i})) full[{j, i}] = blk.transpose();
  }
  q_rows_.resize(static_cast<size_t>(m));
  for (auto& [key, blk] : full) q_rows_[static_cast<size_t>(key.first)].push_back({key.second, std::move(blk)});

  w_rows_.resize(static_cast<size_t>(m));
  if (!linear_map.empty()) {
    if (state_partition_.block_count() == 0) throw InputError("BlockedQP: linear map needs a state partition");
    for (const auto& [key, blk] : linear_map) {
      const auto [i, j] = key;
      if (i < 0 || j < 0 || i >= m || j >= state_partition_.block_count()) {
        throw InputError("BlockedQP: W block index out of range " + key_str(i, j));
      }
      if (blk.rows() != partition_.size(i) || blk.cols() != state_partition_.size(j)) {
        throw InputError("BlockedQP: W block " + key_str(i, j) + " has wrong shape");
      }
      w_rows_[static_cast<size_t>(i)].push_back({j, blk});
    }
    has_linear_map_ = true;
  }

  lipschitz_.resize(static_cast<size_t>(m));
  for (Index i = 0; i < m; ++i) {
    const MatrixXd* d = hessian_block(i, i);
    const double l = d ? linalg::max_eigenvalue(*d) : 0.0;
    if (l <= kLipschitzFloor) {
      lipschitz_[static_cast<size_t>(i)] = kLipschitzFloor;
      degenerate_.push_back(i);
    } else {
      lipschitz_[static_cast<size_t>(i)] = l;
    }
  }
}

BlockedQP BlockedQP::from_dense(BlockPartition partition, const MatrixXd& q, std::vector<BoxSet> boxes,
                                VectorXd linear_const, BlockPartition state_partition,
                                const MatrixXd& w) {
  if (q.rows() != partition.dim() || q.cols() != partition.dim()) throw InputError("from_dense: Q shape");
  BlockMap qb;
  for (Index i = 0; i < partition.block_count(); ++i) {
    for (Index j = 0; j < partition.block_count(); ++j) {
      MatrixXd blk = q.block(partition.offset(i), partition.offset(j), partition.size(i), partition.size(j));
      if (!blk.isZero(0.0)) qb[{i, j}] = std::move(blk);
    }
  }
  BlockMap wb;
  if (w.size() > 0) {
    if (w.rows() != partition.dim() || w.cols() != state_partition.dim()) throw InputError("from_dense: W shape");
    for (Index i = 0; i < partition.block_count(); ++i) {
      for (Index j = 0; j < state_partition.block_count(); ++j) {
        MatrixXd blk = w.block(partition.offset(i), state_partition.offset(j), partition.size(i),
                               state_partition.size(j));
        if (!blk.isZero(0.0)) wb[{i, j}] = std::move(blk);
      }
    }
  }
  return BlockedQP(std::move(partition), qb, std::move(boxes), std::move(linear_const),
                   std::move(state_partition), wb);
}

const MatrixXd* BlockedQP::hessian_block(Index i, Index j) const {
  return find_in_row(q_rows_[static_cast<size_t>(i)], j);
}

const MatrixXd* BlockedQP::linear_map_block(Index i, Index j) const {
  return find_in_row(w_rows_[static_cast<size_t>(i)], j);
}

std::span<const BlockEntry> BlockedQP::hessian_row(Index i) const { return q_rows_[static_cast<size_t>(i)]; }
std::span<const BlockEntry> BlockedQP::linear_map_row(Index i) const { return w_rows_[static_cast<size_t>(i)]; }

std::vector<BlockKey> BlockedQP::hessian_pattern() const {
  std::vector<BlockKey> out;
  for (Index i = 0; i < block_count(); ++i)
    for (const auto& e : hessian_row(i)) out.emplace_back(i, e.col);
  return out;
}

std::vector<BlockKey> BlockedQP::linear_map_pattern() const {
  std::vector<BlockKey> out;
  for (Index i = 0; i < block_count(); ++i)
    for (const auto& e : linear_map_row(i)) out.emplace_back(i, e.col);
  return out;
}

MatrixXd BlockedQP::dense_hessian() const {
  MatrixXd q = MatrixXd::Zero(dim(), dim());
  for (Index i = 0; i < block_count(); ++i)
    for (const auto& e : hessian_row(i))
      q.block(partition_.offset(i), partition_.offset(e.col), partition_.size(i), partition_.size(e.col)) = e.mat;
  return q;
}

MatrixXd BlockedQP::dense_linear_map() const {
  MatrixXd w = MatrixXd::Zero(dim(), state_partition_.block_count() ? state_partition_.dim() : 0);
  for (Index i = 0; i < block_count(); ++i)
    for (const auto& e : linear_map_row(i))
      w.block(partition_.offset(i), state_partition_.offset(e.col), partition_.size(i),
              state_partition_.size(e.col)) = e.mat;
  return w;
}

bool BlockedQP::feasible(const VectorXd& u, double tol) const {
  if (u.size() != dim()) return false;
  for (Index i = 0; i < block_count(); ++i)
    if (!box(i).contains(partition_.block(u, i), tol)) return false;
  return true;
}

VectorXd BlockedQP::project(const VectorXd& u) const {
  check_vector(u, dim(), "project");
  VectorXd out(dim());
  for (Index i = 0; i < block_count(); ++i) partition_.block(out, i) = project_box(box(i), partition_.block(u, i));
  return out;
}

BlockedQP BlockedQP::with_linear_const(VectorXd w) const {
  check_vector(w, dim(), "with_linear_const");
  BlockedQP copy = *this;
  copy.linear_const_ = std::move(w);
  return copy;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

void check_state(const BlockedQP& qp, const VectorXd* x) {
  if (qp.has_linear_map() && x == nullptr) throw InputError("state x required: QP has a linear map W");
  if (x != nullptr && qp.state_partition().block_count() == 0) {
    throw InputError("state x supplied but QP has no state partition");
  }
  if (x != nullptr) check_vector(*x, qp.state_partition().dim(), "state x");
}

VectorXd block_linear_term(const BlockedQP& qp, Index i, const VectorXd* x) {
  VectorXd c = qp.partition().block(qp.linear_const(), i);
  if (x != nullptr) {
    const auto& sp = qp.state_partition();
    for (const auto& e : qp.linear_map_row(i)) c.noalias() += e.mat * sp.block(*x, e.col);
  }
  return c;
}

VectorXd hessian_row_times(const BlockedQP& qp, const VectorXd& u, Index i) {
  const auto& part = qp.partition();
  VectorXd g = VectorXd::Zero(part.size(i));
  for (const auto& e : qp.hessian_row(i)) g.noalias() += e.mat * part.block(u, e.col);
  return g;
}

double eval_impl(const BlockedQP& qp, const VectorXd& u, const VectorXd* x) {
  check_vector(u, qp.dim(), "eval_objective u");
  check_state(qp, x);
  const auto& part = qp.partition();
  double val = 0.0;
  for (Index i = 0; i < qp.block_count(); ++i) {
    const auto ui = part.block(u, i);
    val += ui.dot(0.5 * hessian_row_times(qp, u, i) + block_linear_term(qp, i, x));
  }
  return val;
}

VectorXd grad_impl(const BlockedQP& qp, const VectorXd& u, Index i, const VectorXd* x) {
  check_vector(u, qp.dim(), "partial_gradient u");
  check_state(qp, x);
  if (i < 0 || i >= qp.block_count()) throw InputError("partial_gradient: block index out of range");
  return hessian_row_times(qp, u, i) + block_linear_term(qp, i, x);
}

}  // namespace

double eval_objective(const BlockedQP& qp, const VectorXd& u) { return eval_impl(qp, u, nullptr); }
double eval_objective(const BlockedQP& qp, const VectorXd& u, const VectorXd& x) { return eval_impl(qp, u, &x); }

VectorXd partial_gradient(const BlockedQP& qp, const VectorXd& u, Index i) { return grad_impl(qp, u, i, nullptr); }
VectorXd partial_gradient(const BlockedQP& qp, const VectorXd& u, Index i, const VectorXd& x) {
  return grad_impl(qp, u, i, &x);
}

std::vector<double> block_lipschitz(const BlockPartition& partition, const BlockMap& hessian) {
  std::vector<double> out;
  for (Index i = 0; i < partition.block_count(); ++i) {
    auto it = hessian.find({i, i});
    if (it == hessian.end()) {
      out.push_back(kLipschitzFloor);
      continue;
    }
    if (!linalg::is_symmetric(it->second, 1e-10)) {
      throw InputError("block_lipschitz: diagonal block " + key_str(i, i) + " not symmetric");
    }
    out.push_back(std::max(kLipschitzFloor, linalg::max_eigenvalue(it->second)));
  }
  return out;
}

std::vector<double> block_lipschitz(const BlockedQP& qp) { return qp.lipschitz(); }

double weighted_norm1(const BlockPartition& partition, std::span<const double> lipschitz, const VectorXd& u) {
  if (static_cast<Index>(lipschitz.size()) != partition.block_count()) {
    throw InputError("weighted_norm1: one weight per block required");
  }
  check_vector(u, partition.dim(), "weighted_norm1 u");
  double acc = 0.0;
  for (Index i = 0; i < partition.block_count(); ++i) {
    const double l = lipschitz[static_cast<size_t>(i)];
    if (l < 0.0) throw InputError("weighted_norm1: negative weight");
    acc += l * partition.block(u, i).squaredNorm();
  }
  return std::sqrt(acc);
}

double sigma1(const BlockedQP& qp) {
  VectorXd scale(qp.dim());
  for (Index i = 0; i < qp.block_count(); ++i)
    qp.partition().block(scale, i).setConstant(1.0 / std::sqrt(qp.lipschitz(i)));
  const MatrixXd scaled = scale.asDiagonal() * qp.dense_hessian() * scale.asDiagonal();
  const double s = linalg::min_eigenvalue(scaled);
  return std::clamp(s, 0.0, 1.0);
}

double hessian_min_eigenvalue(const BlockedQP& qp) { return linalg::min_eigenvalue(qp.dense_hessian()); }

bool is_positive_semidefinite(const BlockedQP& qp) {
  const MatrixXd q = qp.dense_hessian();
  return linalg::min_eigenvalue(q) >= -1e-8 * linalg::spectral_norm(q);
}

// ---------------------------------------------------------------------------
// QuadraticOracle

QuadraticOracle::QuadraticOracle(const BlockedQP& qp) : qp_(&qp) {
  check_state(qp, nullptr);
  linear_ = qp.linear_const();
}

QuadraticOracle::QuadraticOracle(const BlockedQP& qp, const VectorXd& x) : qp_(&qp) {
  check_state(qp, &x);
  linear_.resize(qp.dim());
  for (Index i = 0; i < qp.block_count(); ++i) qp.partition().block(linear_, i) = block_linear_term(qp, i, &x);
}

double QuadraticOracle::value(const VectorXd& u) const {
  check_vector(u, qp_->dim(), "value u");
  const auto& part = qp_->partition();
  double val = 0.0;
  for (Index i = 0; i < qp_->block_count(); ++i) {
    val += part.block(u, i).dot(0.5 * hessian_row_times(*qp_, u, i) + part.block(linear_, i));
  }
  return val;
}

VectorXd QuadraticOracle::partial_gradient(const VectorXd& u, Index i) const {
  return hessian_row_times(*qp_, u, i) + qp_->partition().block(linear_, i);
}

}  // namespace pcdm
