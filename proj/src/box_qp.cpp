#include "pcdm/box_qp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "pcdm/errors.hpp"

namespace pcdm {

namespace {

enum class Bound : std::int8_t { free, lower, upper };

}  // namespace

double box_kkt_residual(const MatrixXd& h, const VectorXd& c, const VectorXd& lo, const VectorXd& hi,
                        const VectorXd& u) {
  const VectorXd g = h * u + c;
  const VectorXd step = (u - g).cwiseMax(lo).cwiseMin(hi);
  return (u - step).cwiseAbs().maxCoeff();
}

BoxQPResult solve_box_qp(const MatrixXd& h, const VectorXd& c, const VectorXd& lo, const VectorXd& hi,
                         const BoxQPOptions& opts, const std::optional<VectorXd>& start) {
  const Index n = c.size();
  if (h.rows() != n || h.cols() != n || lo.size() != n || hi.size() != n) {
    throw InputError("solve_box_qp: dimension mismatch");
  }
  BoxQPResult res;
  if (n == 0) {
    res.u = VectorXd(0);
    res.converged = true;
    return res;
  }

  VectorXd u;
  if (start) {
    if (start->size() != n) throw InputError("solve_box_qp: start has wrong length");
    u = *start;
  } else {
    Eigen::LDLT<MatrixXd> ldlt(h);
    u = ldlt.solve(-c);
    if (!u.allFinite()) u.setZero();
  }
  u = u.cwiseMax(lo).cwiseMin(hi);

  std::vector<Bound> state(static_cast<size_t>(n), Bound::free);
  for (Index k = 0; k < n; ++k) {
    if (std::isfinite(lo[k]) && u[k] == lo[k]) state[static_cast<size_t>(k)] = Bound::lower;
    else if (std::isfinite(hi[k]) && u[k] == hi[k]) state[static_cast<size_t>(k)] = Bound::upper;
  }

  const int max_it = opts.max_iterations > 0 ? opts.max_iterations : static_cast<int>(10 * n + 100);
  const double release_tol = 0.1 * opts.kkt_tolerance;
  int refinements = 0;
  std::vector<Index> free_idx;
  free_idx.reserve(static_cast<size_t>(n));

  for (res.iterations = 0; res.iterations < max_it; ++res.iterations) {
    free_idx.clear();
    for (Index k = 0; k < n; ++k)
      if (state[static_cast<size_t>(k)] == Bound::free) free_idx.push_back(k);
    const Index nf = static_cast<Index>(free_idx.size());

    if (nf > 0) {
      VectorXd g = h * u + c;
      MatrixXd hff(nf, nf);
      VectorXd gf(nf);
      for (Index a = 0; a < nf; ++a) {
        gf[a] = g[free_idx[static_cast<size_t>(a)]];
        for (Index b = 0; b < nf; ++b) hff(a, b) = h(free_idx[static_cast<size_t>(a)], free_idx[static_cast<size_t>(b)]);
      }
      Eigen::LLT<MatrixXd> llt(hff);
      if (llt.info() != Eigen::Success) break;
      const VectorXd d = -llt.solve(gf);
      if (!d.allFinite()) break;

      double alpha = 1.0;
      Index blocking = -1;
      Bound blocking_side = Bound::free;
      for (Index a = 0; a < nf; ++a) {
        const Index k = free_idx[static_cast<size_t>(a)];
        if (d[a] < 0.0 && std::isfinite(lo[k])) {
          const double t = (lo[k] - u[k]) / d[a];
          if (t < alpha) { alpha = t; blocking = k; blocking_side = Bound::lower; }
        } else if (d[a] > 0.0 && std::isfinite(hi[k])) {
          const double t = (hi[k] - u[k]) / d[a];
          if (t < alpha) { alpha = t; blocking = k; blocking_side = Bound::upper; }
        }
      }
      alpha = std::max(alpha, 0.0);
      for (Index a = 0; a < nf; ++a) {
        const Index k = free_idx[static_cast<size_t>(a)];
        u[k] = std::clamp(u[k] + alpha * d[a], lo[k], hi[k]);
      }
      if (blocking >= 0) {
        u[blocking] = blocking_side == Bound::lower ? lo[blocking] : hi[blocking];
        state[static_cast<size_t>(blocking)] = blocking_side;
        continue;
      }
    }

    // Minimizer on the current face: check multipliers of the working set.
    const VectorXd g = h * u + c;
    Index worst = -1;
    double worst_violation = release_tol;
    for (Index k = 0; k < n; ++k) {
      const Bound s = state[static_cast<size_t>(k)];
      const double v = s == Bound::lower ? -g[k] : s == Bound::upper ? g[k] : 0.0;
      if (v > worst_violation) { worst_violation = v; worst = k; }
    }
    if (worst >= 0) {
      state[static_cast<size_t>(worst)] = Bound::free;
      refinements = 0;
      continue;
    }
    res.kkt_residual = box_kkt_residual(h, c, lo, hi, u);
    if (res.kkt_residual <= opts.kkt_tolerance) {
      res.converged = true;
      break;
    }
    // Inaccurate face solve: take another Newton step from the current point.
    if (++refinements > 3) break;
  }

  res.u = u;
  res.value = u.dot(0.5 * (h * u) + c);
  res.kkt_residual = box_kkt_residual(h, c, lo, hi, u);
  if (!res.converged) res.converged = res.kkt_residual <= opts.kkt_tolerance;
  return res;
}

BoxQPResult reference_optimum(const BlockedQP& qp, const std::optional<VectorXd>& x, const BoxQPOptions& opts) {
  const QuadraticOracle oracle = x ? QuadraticOracle(qp, *x) : QuadraticOracle(qp);
  VectorXd lo(qp.dim()), hi(qp.dim());
  for (Index i = 0; i < qp.block_count(); ++i) {
    qp.partition().block(lo, i) = qp.box(i).lower;
    qp.partition().block(hi, i) = qp.box(i).upper;
  }
  return solve_box_qp(qp.dense_hessian(), oracle.linear_term(), lo, hi, opts);
}

}  // namespace pcdm
