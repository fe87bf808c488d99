#include <gtest/gtest.h>

#include "pcdm/errors.hpp"
#include "pcdm/qp_model.hpp"
#include "test_support.hpp"

namespace pcdm {
namespace {

using test::Rng;

TEST(BlockPartition, OffsetsAndDim) {
  const BlockPartition p({2, 3, 1});
  EXPECT_EQ(p.block_count(), 3);
  EXPECT_EQ(p.offset(0), 0);
  EXPECT_EQ(p.offset(2), 5);
  EXPECT_EQ(p.dim(), 6);
}

TEST(BlockPartition, RejectsNonPositiveSizes) {
  EXPECT_THROW(BlockPartition({2, 0}), InputError);
}

TEST(BoxSet, ContainsAndProject) {
  const BoxSet box{VectorXd::Constant(2, -1.0), VectorXd::Constant(2, 1.0)};
  EXPECT_TRUE(box.contains(VectorXd::Zero(2)));
  EXPECT_FALSE(box.contains(VectorXd::Constant(2, 1.5)));
  const VectorXd p = project_box(box, (VectorXd(2) << 3.0, -0.5).finished());
  EXPECT_EQ(p[0], 1.0);
  EXPECT_EQ(p[1], -0.5);
}

TEST(BoxSet, RejectsInvertedBounds) {
  const BoxSet box{VectorXd::Constant(1, 1.0), VectorXd::Constant(1, 0.0)};
  EXPECT_THROW(box.validate(), InputError);
}

TEST(BlockedQP, MirrorsOneTriangle) {
  BlockMap q;
  q[{0, 0}] = MatrixXd::Identity(2, 2);
  q[{1, 1}] = MatrixXd::Identity(1, 1);
  q[{0, 1}] = (MatrixXd(2, 1) << 0.1, 0.2).finished();
  const BlockedQP qp(BlockPartition({2, 1}), q, {BoxSet::unbounded(2), BoxSet::unbounded(1)});
  ASSERT_NE(qp.hessian_block(1, 0), nullptr);
  EXPECT_EQ((*qp.hessian_block(1, 0))(0, 1), 0.2);
}

TEST(BlockedQP, RejectsInconsistentHalves) {
  BlockMap q;
  q[{0, 0}] = MatrixXd::Identity(1, 1);
  q[{1, 1}] = MatrixXd::Identity(1, 1);
  q[{0, 1}] = MatrixXd::Constant(1, 1, 0.1);
  q[{1, 0}] = MatrixXd::Constant(1, 1, 0.3);
  EXPECT_THROW(BlockedQP(BlockPartition({1, 1}), q, {BoxSet::unbounded(1), BoxSet::unbounded(1)}), InputError);
}

TEST(BlockedQP, RejectsMisshapedBlocks) {
  BlockMap q;
  q[{0, 0}] = MatrixXd::Identity(3, 3);
  EXPECT_THROW(BlockedQP(BlockPartition({2}), q, {BoxSet::unbounded(2)}), InputError);
}

TEST(BlockedQP, ZeroDiagonalBlockIsFloored) {
  BlockMap q;
  q[{0, 0}] = MatrixXd::Identity(1, 1);
  const BlockedQP qp(BlockPartition({1, 1}), q, {BoxSet::unbounded(1), BoxSet::unbounded(1)});
  EXPECT_EQ(qp.lipschitz(1), kLipschitzFloor);
  ASSERT_EQ(qp.degenerate_blocks().size(), 1u);
  EXPECT_EQ(qp.degenerate_blocks()[0], 1);
}

TEST(BlockedQP, LipschitzMatchesPowerIteration) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const test::DenseBoxQP d = test::random_box_qp(rng, {.max_blocks = 6, .max_block_size = 8, .max_dim = 40});
    const BlockedQP qp = d.blocked();
    const BlockPartition p = d.partition();
    for (Index i = 0; i < p.block_count(); ++i) {
      const MatrixXd qii = d.q.block(p.offset(i), p.offset(i), p.size(i), p.size(i));
      const double oracle = test::power_lambda_max(qii);
      EXPECT_NEAR(qp.lipschitz(i), std::max(oracle, kLipschitzFloor), 1e-9 * (1.0 + oracle));
    }
  }
}

TEST(BlockedQP, ObjectiveAndGradientMatchDense) {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const test::DenseBoxQP d = test::random_box_qp(rng, {.max_blocks = 6, .max_block_size = 6, .max_dim = 30});
    const BlockedQP qp = d.blocked();
    const VectorXd u = test::random_vector(rng, qp.dim());
    EXPECT_NEAR(eval_objective(qp, u), test::dense_objective(d.q, d.c, u), 1e-10 * (1.0 + u.squaredNorm()));
    const VectorXd fd = test::fd_gradient([&](const VectorXd& v) { return test::dense_objective(d.q, d.c, v); }, u, 1e-5);
    const BlockPartition p = d.partition();
    for (Index i = 0; i < p.block_count(); ++i) {
      EXPECT_LE((partial_gradient(qp, u, i) - p.block(fd, i)).cwiseAbs().maxCoeff(), 1e-6);
    }
  }
}

TEST(BlockedQP, StateDependentLinearTerm) {
  Rng rng(13);
  const MatrixXd h = test::random_spd(rng, 4, 1.0);
  const MatrixXd w = test::random_matrix(rng, 4, 3);
  const VectorXd c = test::random_vector(rng, 4);
  const BlockedQP qp = BlockedQP::from_dense(BlockPartition({2, 2}), h, {BoxSet::unbounded(2), BoxSet::unbounded(2)}, c,
                                             BlockPartition({1, 2}), w);
  const VectorXd x = test::random_vector(rng, 3);
  const VectorXd u = test::random_vector(rng, 4);
  const VectorXd g = h * u + w * x + c;
  EXPECT_LE((partial_gradient(qp, u, 1, x) - g.tail(2)).norm(), 1e-12);
  EXPECT_NEAR(eval_objective(qp, u, x), 0.5 * u.dot(h * u) + (w * x + c).dot(u), 1e-12);
  const QuadraticOracle oracle(qp, x);
  EXPECT_LE((oracle.gradient(u) - g).norm(), 1e-12);
}

TEST(BlockedQP, FromDenseDropsZeroBlocks) {
  MatrixXd q = MatrixXd::Identity(3, 3);
  const BlockedQP qp = BlockedQP::from_dense(BlockPartition({1, 1, 1}), q,
                                             {BoxSet::unbounded(1), BoxSet::unbounded(1), BoxSet::unbounded(1)});
  EXPECT_EQ(qp.hessian_block(0, 1), nullptr);
  EXPECT_EQ(qp.hessian_pattern().size(), 3u);
}

TEST(WeightedNorm, MatchesDefinition) {
  const BlockPartition p({1, 2});
  const std::vector<double> l{4.0, 9.0};
  const VectorXd u = (VectorXd(3) << 1.0, 1.0, 1.0).finished();
  EXPECT_DOUBLE_EQ(weighted_norm1(p, l, u), std::sqrt(4.0 + 18.0));
}

TEST(Sigma1, ScalarBlocksDiagonal) {
  // Q = diag(1, 100), scalar blocks: D^{-1/2} Q D^{-1/2} = I.
  MatrixXd q = MatrixXd::Zero(2, 2);
  q(0, 0) = 1.0;
  q(1, 1) = 100.0;
  const BlockedQP qp = BlockedQP::from_dense(BlockPartition({1, 1}), q, {BoxSet::unbounded(1), BoxSet::unbounded(1)});
  EXPECT_NEAR(sigma1(qp), 1.0, 1e-14);
  EXPECT_NEAR(hessian_min_eigenvalue(qp), 1.0, 1e-12);
}

// Property: sigma1 lies in [0, 1] and sigma1 * min L <= lambda_min(Q) <= sigma1 * max L.
TEST(Sigma1, SandwichProperty) {
  Rng rng(14);
  for (int trial = 0; trial < 100; ++trial) {
    const test::DenseBoxQP d =
        test::random_box_qp(rng, {.max_blocks = 8, .max_block_size = 6, .max_dim = 40, .shift = rng.uniform(0.0, 0.5)});
    const BlockedQP qp = d.blocked();
    const double s = sigma1(qp);
    ASSERT_GE(s, 0.0);
    ASSERT_LE(s, 1.0);
    const auto& l = qp.lipschitz();
    const double lmin = *std::min_element(l.begin(), l.end());
    const double lmax = *std::max_element(l.begin(), l.end());
    const double eig = Eigen::SelfAdjointEigenSolver<MatrixXd>(d.q).eigenvalues()[0];
    EXPECT_LE(s * lmin, eig + 1e-9 * lmax);
    EXPECT_LE(eig, s * lmax + 1e-9 * lmax);
  }
}

TEST(Sigma1, SingleBlockIsConditionInverse) {
  Rng rng(15);
  const MatrixXd q = test::random_spd(rng, 5, 0.3);
  const BlockedQP qp = BlockedQP::from_dense(BlockPartition({5}), q, {BoxSet::unbounded(5)});
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<MatrixXd>(q).eigenvalues();
  EXPECT_NEAR(sigma1(qp), ev[0] / ev[4], 1e-12);
}

TEST(PositiveSemidefinite, DetectsIndefinite) {
  MatrixXd q(2, 2);
  q << 1.0, 2.0, 2.0, 1.0;
  const BlockedQP qp = BlockedQP::from_dense(BlockPartition({1, 1}), q, {BoxSet::unbounded(1), BoxSet::unbounded(1)});
  EXPECT_FALSE(is_positive_semidefinite(qp));
}

}  // namespace
}  // namespace pcdm
