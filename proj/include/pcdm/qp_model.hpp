#pragma once

#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace pcdm {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// (row block, column block)
using BlockKey = std::pair<Index, Index>;
using BlockMap = std::map<BlockKey, MatrixXd>;

/// Decomposition of a stacked vector into contiguous blocks.
class BlockPartition {
 public:
  BlockPartition() = default;
  explicit BlockPartition(std::vector<Index> sizes);

  Index block_count() const { return static_cast<Index>(sizes_.size()); }
  Index size(Index i) const { return sizes_[static_cast<size_t>(i)]; }
  Index offset(Index i) const { return offsets_[static_cast<size_t>(i)]; }
  Index dim() const { return offsets_.back(); }
  const std::vector<Index>& sizes() const { return sizes_; }

  template <class Vec>
  auto block(Vec& v, Index i) const {
    return v.segment(offset(i), size(i));
  }

  bool operator==(const BlockPartition&) const = default;

 private:
  std::vector<Index> sizes_;
  std::vector<Index> offsets_{0};
};

/// Elementwise box lower <= v <= upper; entries may be infinite.
struct BoxSet {
  VectorXd lower;
  VectorXd upper;

  static BoxSet unbounded(Index n);
  static BoxSet uniform(Index n, double lo, double hi);

  Index dim() const { return lower.size(); }
  bool contains(const Eigen::Ref<const VectorXd>& v, double tol = 0.0) const;
  bool is_bounded() const;
  void validate() const;
};

/// Elementwise clamp onto the box.
VectorXd project_box(const BoxSet& box, const Eigen::Ref<const VectorXd>& v);

/// Abstract smooth objective accessed block by block.
class ObjectiveOracle {
 public:
  virtual ~ObjectiveOracle() = default;

  virtual const BlockPartition& partition() const = 0;
  virtual double value(const VectorXd& u) const = 0;
  virtual VectorXd partial_gradient(const VectorXd& u, Index i) const = 0;
  virtual double lipschitz(Index i) const = 0;

  Index block_count() const { return partition().block_count(); }
  VectorXd gradient(const VectorXd& u) const;
};

struct BlockEntry {
  Index col;
  MatrixXd mat;
};

/// f(u) = 1/2 u'Qu + (Wx + w)'u over a product of boxes, with Q and W stored
/// as sparse maps of dense blocks. Immutable once constructed.
class BlockedQP {
 public:
  /// Q blocks may be given for one triangle only; the missing transpose is
  /// filled in. Both halves given must agree. W maps (input block, state
  /// block) pairs and needs a state partition when non-empty.
  BlockedQP(BlockPartition partition, const BlockMap& hessian, std::vector<BoxSet> boxes,
            VectorXd linear_const = {}, BlockPartition state_partition = {},
            const BlockMap& linear_map = {});

  /// Splits a dense Hessian / linear map into blocks; all-zero blocks are dropped.
  static BlockedQP from_dense(BlockPartition partition, const MatrixXd& q, std::vector<BoxSet> boxes,
                              VectorXd linear_const = {}, BlockPartition state_partition = {},
                              const MatrixXd& w = {});

  const BlockPartition& partition() const { return partition_; }
  const BlockPartition& state_partition() const { return state_partition_; }
  Index block_count() const { return partition_.block_count(); }
  Index dim() const { return partition_.dim(); }

  /// Pointer to Q^{ij}, or nullptr when the block is structurally zero.
  const MatrixXd* hessian_block(Index i, Index j) const;
  const MatrixXd* linear_map_block(Index i, Index j) const;
  std::span<const BlockEntry> hessian_row(Index i) const;
  std::span<const BlockEntry> linear_map_row(Index i) const;
  bool has_linear_map() const { return has_linear_map_; }
  std::vector<BlockKey> hessian_pattern() const;
  std::vector<BlockKey> linear_map_pattern() const;

  const VectorXd& linear_const() const { return linear_const_; }
  const std::vector<BoxSet>& boxes() const { return boxes_; }
  const BoxSet& box(Index i) const { return boxes_[static_cast<size_t>(i)]; }

  double lipschitz(Index i) const { return lipschitz_[static_cast<size_t>(i)]; }
  const std::vector<double>& lipschitz() const { return lipschitz_; }
  /// Blocks whose diagonal Hessian block is zero; their L_i is floored.
  const std::vector<Index>& degenerate_blocks() const { return degenerate_; }

  MatrixXd dense_hessian() const;
  MatrixXd dense_linear_map() const;
  bool feasible(const VectorXd& u, double tol = 0.0) const;
  VectorXd project(const VectorXd& u) const;

  /// Same data, new constant linear term.
  BlockedQP with_linear_const(VectorXd w) const;

 private:
  BlockPartition partition_;
  BlockPartition state_partition_;
  std::vector<std::vector<BlockEntry>> q_rows_;
  std::vector<std::vector<BlockEntry>> w_rows_;
  bool has_linear_map_ = false;
  VectorXd linear_const_;
  std::vector<BoxSet> boxes_;
  std::vector<double> lipschitz_;
  std::vector<Index> degenerate_;
};

/// Floor used for L_i when Q^{ii} vanishes.
inline constexpr double kLipschitzFloor = 1e-12;

double eval_objective(const BlockedQP& qp, const VectorXd& u);
double eval_objective(const BlockedQP& qp, const VectorXd& u, const VectorXd& x);
VectorXd partial_gradient(const BlockedQP& qp, const VectorXd& u, Index i);
VectorXd partial_gradient(const BlockedQP& qp, const VectorXd& u, Index i, const VectorXd& x);

/// L_i = lambda_max(Q^{ii}) computed from the diagonal blocks of `hessian`.
std::vector<double> block_lipschitz(const BlockPartition& partition, const BlockMap& hessian);
std::vector<double> block_lipschitz(const BlockedQP& qp);

/// sqrt(sum_i L_i ||u^i||^2)
double weighted_norm1(const BlockPartition& partition, std::span<const double> lipschitz,
                      const VectorXd& u);

/// lambda_min(D^{-1/2} Q D^{-1/2}) with D = blockdiag(L_i I), clamped to [0, 1].
double sigma1(const BlockedQP& qp);

/// lambda_min(Q) of the assembled Hessian.
double hessian_min_eigenvalue(const BlockedQP& qp);

/// PSD test with tolerance -1e-8 * ||Q||_2.
bool is_positive_semidefinite(const BlockedQP& qp);

/// Fixes the state x (if the QP has a linear map) and exposes f through the
/// ObjectiveOracle interface. Caches c = Wx + w; holds a reference to `qp`.
class QuadraticOracle final : public ObjectiveOracle {
 public:
  explicit QuadraticOracle(const BlockedQP& qp);
  QuadraticOracle(const BlockedQP& qp, const VectorXd& x);

  const BlockPartition& partition() const override { return qp_->partition(); }
  double value(const VectorXd& u) const override;
  VectorXd partial_gradient(const VectorXd& u, Index i) const override;
  double lipschitz(Index i) const override { return qp_->lipschitz(i); }

  const BlockedQP& qp() const { return *qp_; }
  const VectorXd& linear_term() const { return linear_; }

 private:
  const BlockedQP* qp_;
  VectorXd linear_;
};

}  // namespace pcdm
