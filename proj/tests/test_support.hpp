#pragma once

// Generators and independent oracles shared by the unit and acceptance tests.
// Oracles here work on dense matrices and never call the library code they
// are used to check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <vector>

#include <Eigen/Dense>

#include "pcdm/network.hpp"
#include "pcdm/qp_model.hpp"

namespace pcdm::test {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  double normal() { return std::normal_distribution<double>()(eng_); }
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(eng_); }
  int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(eng_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(eng_); }
  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

inline MatrixXd random_matrix(Rng& rng, Index r, Index c) {
  MatrixXd m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = rng.normal();
  return m;
}

inline VectorXd random_vector(Rng& rng, Index n, double scale = 1.0) { return scale * random_matrix(rng, n, 1); }

/// G'G / n + shift * I
inline MatrixXd random_spd(Rng& rng, Index n, double shift) {
  const MatrixXd g = random_matrix(rng, n, n);
  MatrixXd s = g.transpose() * g / static_cast<double>(n) + shift * MatrixXd::Identity(n, n);
  return 0.5 * (s + s.transpose());
}

// --- oracles -----------------------------------------------------------------

inline double dense_objective(const MatrixXd& q, const VectorXd& c, const VectorXd& u) {
  return 0.5 * u.dot(q * u) + c.dot(u);
}

/// Central finite differences.
inline VectorXd fd_gradient(const std::function<double(const VectorXd&)>& f, const VectorXd& u, double h) {
  VectorXd g(u.size());
  for (Index k = 0; k < u.size(); ++k) {
    VectorXd up = u, dn = u;
    up[k] += h;
    dn[k] -= h;
    g[k] = (f(up) - f(dn)) / (2.0 * h);
  }
  return g;
}

/// Largest eigenvalue of a symmetric PSD matrix by power iteration.
inline double power_lambda_max(const MatrixXd& m, int iters = 5000) {
  VectorXd v = VectorXd::Ones(m.rows()) / std::sqrt(static_cast<double>(m.rows()));
  double lam = 0.0;
  for (int k = 0; k < iters; ++k) {
    VectorXd w = m * v;
    const double nrm = w.norm();
    if (nrm == 0.0) return 0.0;
    const double next = v.dot(w);
    v = w / nrm;
    if (std::abs(next - lam) <= 1e-15 * std::abs(next)) return next;
    lam = next;
  }
  return lam;
}

/// Positive root of p = a^2 p - (a b p)^2 / (r + b^2 p) + q.
inline double scalar_riccati(double a, double b, double q, double r) {
  if (b == 0.0) return q / (1.0 - a * a);
  const double lin = r * (1.0 - a * a) - q * b * b;
  return (-lin + std::sqrt(lin * lin + 4.0 * b * b * q * r)) / (2.0 * b * b);
}

inline double clamp_scalar(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

// --- generators --------------------------------------------------------------

struct DenseBoxQP {
  std::vector<Index> sizes;
  MatrixXd q;
  VectorXd c;
  VectorXd lo, hi;

  BlockPartition partition() const { return BlockPartition(sizes); }
  std::vector<BoxSet> boxes() const {
    std::vector<BoxSet> out;
    const BlockPartition p = partition();
    for (Index i = 0; i < p.block_count(); ++i) out.push_back({p.block(lo, i), p.block(hi, i)});
    return out;
  }
  BlockedQP blocked() const { return BlockedQP::from_dense(partition(), q, boxes(), c); }
};

struct BoxQPSpec {
  int min_blocks = 2;
  int max_blocks = 16;
  int max_block_size = 25;
  int max_dim = 400;
  double shift = 0.0;          ///< added to the diagonal (0: possibly singular)
  double coupling_prob = 0.4;  ///< chance that an off-diagonal factor block is present
  double unbounded_prob = 0.05;
};

/// Q = H'H + shift I with block-sparse H; boxes straddle 0 with some infinite
/// bounds; linear term large enough to activate bounds.
inline DenseBoxQP random_box_qp(Rng& rng, const BoxQPSpec& spec) {
  DenseBoxQP out;
  const int m = rng.integer(spec.min_blocks, spec.max_blocks);
  int budget = spec.max_dim;
  for (int i = 0; i < m; ++i) {
    const int remaining = m - i - 1;
    const int cap = std::max(1, std::min(spec.max_block_size, budget - remaining));
    const int s = rng.integer(1, cap);
    out.sizes.push_back(s);
    budget -= s;
  }
  const BlockPartition p(out.sizes);
  const Index n = p.dim();
  MatrixXd h = MatrixXd::Zero(n, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j)
      if (i == j || rng.coin(spec.coupling_prob)) h.block(p.offset(i), p.offset(j), p.size(i), p.size(j)) =
                                                     random_matrix(rng, p.size(i), p.size(j));
  out.q = h.transpose() * h / std::sqrt(static_cast<double>(n)) + spec.shift * MatrixXd::Identity(n, n);
  out.q = 0.5 * (out.q + out.q.transpose()).eval();
  out.c = random_vector(rng, n, 3.0);
  out.lo.resize(n);
  out.hi.resize(n);
  const double inf = std::numeric_limits<double>::infinity();
  for (Index k = 0; k < n; ++k) {
    out.lo[k] = rng.coin(spec.unbounded_prob) ? -inf : -rng.uniform(0.05, 1.0);
    out.hi[k] = rng.coin(spec.unbounded_prob) ? inf : rng.uniform(0.05, 1.0);
  }
  return out;
}

enum class Coupling { states_and_inputs, inputs_only };

struct NetworkSpec {
  int min_subsystems = 3;
  int max_subsystems = 6;
  int max_state = 3;
  int max_input = 2;
  bool equal_state_dims = false;
  Coupling coupling = Coupling::states_and_inputs;
  double coupling_scale = 1.0;  ///< scale of off-diagonal A/B blocks
  double spectral_radius = 0.95;
};

/// Random ring network: off-diagonal blocks for j = i +- 1 (cyclic).
inline NetworkSystem random_ring(Rng& rng, const NetworkSpec& spec) {
  NetworkSystem sys;
  const int m = rng.integer(spec.min_subsystems, spec.max_subsystems);
  const int n_common = rng.integer(1, spec.max_state);
  for (int i = 0; i < m; ++i) {
    sys.state_dims.push_back(spec.equal_state_dims ? n_common : rng.integer(1, spec.max_state));
    sys.input_dims.push_back(rng.integer(1, spec.max_input));
  }
  for (Index i = 0; i < m; ++i) {
    const std::set<Index> ring{(i + m - 1) % m, i, (i + 1) % m};
    for (Index j : ring) {
      const double s = i == j ? 1.0 : spec.coupling_scale;
      const Index ni = sys.state_dims[static_cast<size_t>(i)];
      if (i == j || spec.coupling == Coupling::states_and_inputs) {
        sys.a_blocks[{i, j}] = s * random_matrix(rng, ni, sys.state_dims[static_cast<size_t>(j)]);
      }
      sys.b_blocks[{i, j}] = s * random_matrix(rng, ni, sys.input_dims[static_cast<size_t>(j)]);
    }
  }
  // Rescale A to the requested spectral radius (eigenvalues via Eigen, not the library).
  const MatrixXd a = sys.dense_a();
  const double rho = Eigen::EigenSolver<MatrixXd>(a).eigenvalues().cwiseAbs().maxCoeff();
  if (rho > 0.0)
    for (auto& [key, blk] : sys.a_blocks) blk *= spec.spectral_radius / rho;
  return sys;
}

inline MPCConfig random_mpc(Rng& rng, const NetworkSystem& sys, int horizon, bool with_reference) {
  MPCConfig cfg;
  cfg.horizon = horizon;
  for (Index i = 0; i < sys.subsystem_count(); ++i) {
    const Index n = sys.state_dims[static_cast<size_t>(i)];
    const Index m = sys.input_dims[static_cast<size_t>(i)];
    cfg.state_weights.push_back(random_spd(rng, n, 0.1));
    cfg.input_weights.push_back(random_spd(rng, m, 0.1));
    cfg.terminal_weights.push_back(random_spd(rng, n, 0.5));
    BoxSet box{VectorXd(m), VectorXd(m)};
    for (Index k = 0; k < m; ++k) {
      box.lower[k] = -rng.uniform(0.2, 2.0);
      box.upper[k] = rng.uniform(0.2, 2.0);
    }
    cfg.input_boxes.push_back(box);
  }
  if (with_reference) cfg.reference = Reference{random_vector(rng, sys.state_dim(), 0.5), random_vector(rng, sys.input_dim(), 0.2)};
  return cfg;
}

/// Dense simulation-based V_N, written independently of the condenser.
inline double dense_vn(const NetworkSystem& sys, const MPCConfig& cfg, const VectorXd& x0, const VectorXd& u) {
  const MatrixXd a = sys.dense_a();
  const MatrixXd b = sys.dense_b();
  const BlockPartition sp = sys.state_partition();
  const BlockPartition ip = sys.input_partition();
  auto blockdiag = [](const std::vector<MatrixXd>& bl) {
    Index n = 0;
    for (const auto& x : bl) n += x.rows();
    MatrixXd out = MatrixXd::Zero(n, n);
    Index off = 0;
    for (const auto& x : bl) {
      out.block(off, off, x.rows(), x.cols()) = x;
      off += x.rows();
    }
    return out;
  };
  const MatrixXd q = blockdiag(cfg.state_weights);
  const MatrixXd r = blockdiag(cfg.input_weights);
  const MatrixXd p = blockdiag(cfg.terminal_weights);
  const VectorXd xr = cfg.reference ? cfg.reference->x : VectorXd::Zero(sp.dim());
  const VectorXd ur = cfg.reference ? cfg.reference->u : VectorXd::Zero(ip.dim());
  VectorXd x = x0;
  double v = 0.0;
  for (int t = 0; t < cfg.horizon; ++t) {
    VectorXd ut(ip.dim());
    // decision layout: block i holds (u^i_0, ..., u^i_{N-1})
    Index off = 0;
    for (Index i = 0; i < ip.block_count(); ++i) {
      ut.segment(ip.offset(i), ip.size(i)) = u.segment(off + t * ip.size(i), ip.size(i));
      off += cfg.horizon * ip.size(i);
    }
    v += (x - xr).dot(q * (x - xr)) + (ut - ur).dot(r * (ut - ur));
    x = a * x + b * ut;
  }
  return v + (x - xr).dot(p * (x - xr));
}

/// d V_N / d u from explicit prediction matrices x_t = A^t x0 + sum_s A^{t-1-s} B u_s.
inline VectorXd dense_vn_gradient(const NetworkSystem& sys, const MPCConfig& cfg, const VectorXd& x0, const VectorXd& u) {
  const MatrixXd a = sys.dense_a();
  const MatrixXd b = sys.dense_b();
  const BlockPartition ip = sys.input_partition();
  const Index n = a.rows(), m = b.cols();
  const int horizon = cfg.horizon;
  // time-major input vector and its map to the decision layout
  MatrixXd perm = MatrixXd::Zero(m * horizon, m * horizon);
  Index off = 0;
  for (Index i = 0; i < ip.block_count(); ++i) {
    for (int t = 0; t < horizon; ++t)
      for (Index k = 0; k < ip.size(i); ++k) perm(t * m + ip.offset(i) + k, off + t * ip.size(i) + k) = 1.0;
    off += horizon * ip.size(i);
  }
  MatrixXd gamma = MatrixXd::Zero(n * horizon, m * horizon);  // rows: x_1..x_N
  MatrixXd phi(n * horizon, n);
  MatrixXd apow = MatrixXd::Identity(n, n);
  for (int t = 1; t <= horizon; ++t) {
    apow = a * apow;
    phi.middleRows((t - 1) * n, n) = apow;
    MatrixXd ap = MatrixXd::Identity(n, n);
    for (int s = t - 1; s >= 0; --s) {
      gamma.block((t - 1) * n, s * m, n, m) = ap * b;
      ap = a * ap;
    }
  }
  auto blockdiag = [](const std::vector<MatrixXd>& bl) {
    Index k = 0;
    for (const auto& x : bl) k += x.rows();
    MatrixXd out = MatrixXd::Zero(k, k);
    Index o = 0;
    for (const auto& x : bl) {
      out.block(o, o, x.rows(), x.cols()) = x;
      o += x.rows();
    }
    return out;
  };
  const MatrixXd q = blockdiag(cfg.state_weights), r = blockdiag(cfg.input_weights), p = blockdiag(cfg.terminal_weights);
  MatrixXd qbar = MatrixXd::Zero(n * horizon, n * horizon);
  MatrixXd rbar = MatrixXd::Zero(m * horizon, m * horizon);
  for (int t = 0; t < horizon; ++t) {
    qbar.block(t * n, t * n, n, n) = t + 1 == horizon ? p : q;
    rbar.block(t * m, t * m, m, m) = r;
  }
  const VectorXd xr = cfg.reference ? cfg.reference->x : VectorXd::Zero(n);
  const VectorXd ur = cfg.reference ? cfg.reference->u : VectorXd::Zero(m);
  const VectorXd ut = perm * u;
  const VectorXd xs = phi * x0 + gamma * ut - xr.replicate(horizon, 1);
  const VectorXd g = 2.0 * gamma.transpose() * qbar * xs + 2.0 * rbar * (ut - ur.replicate(horizon, 1));
  return perm.transpose() * g;
}

}  // namespace pcdm::test
