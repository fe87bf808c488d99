#include "pcdm/pcdm_solver.hpp"

#include <cassert>
#include <cmath>
#include <string>

#include "pcdm/box_qp.hpp"
#include "pcdm/errors.hpp"
#include "pcdm/linalg.hpp"

namespace pcdm {

std::string_view to_string(StoppingMode mode) {
  switch (mode) {
    case StoppingMode::gap_to_reference: return "gap-to-reference";
    case StoppingMode::iterate_change: return "iterate-change";
    case StoppingMode::iteration_budget: return "iteration-budget";
  }
  return "?";
}

StoppingMode stopping_mode_from_string(std::string_view s) {
  if (s == "gap-to-reference" || s == "gap") return StoppingMode::gap_to_reference;
  if (s == "iterate-change" || s == "change") return StoppingMode::iterate_change;
  if (s == "iteration-budget" || s == "budget") return StoppingMode::iteration_budget;
  throw ConfigError("unknown stopping mode '" + std::string(s) + "'");
}

void SolverConfig::validate() const {
  if (max_iterations < 0) throw ConfigError("max_iterations must be nonnegative");
  if (!(tolerance >= 0.0)) throw ConfigError("tolerance must be nonnegative");
  if (worker_count < 1) throw ConfigError("worker_count must be positive");
  if (stopping_mode == StoppingMode::gap_to_reference && !reference_value) {
    throw ConfigError("gap-to-reference stopping requires a reference value f*");
  }
  if (sigma1 && !(*sigma1 > 0.0 && *sigma1 <= 1.0)) throw ConfigError("sigma1 must lie in (0, 1]");
}

namespace {

void check_boxes(const ObjectiveOracle& oracle, std::span<const BoxSet> boxes) {
  const auto& part = oracle.partition();
  if (static_cast<Index>(boxes.size()) != part.block_count()) throw InputError("one box per block required");
  for (Index i = 0; i < part.block_count(); ++i) {
    if (boxes[static_cast<size_t>(i)].dim() != part.size(i)) throw InputError("box dimension mismatch");
  }
}

bool feasible(const BlockPartition& part, std::span<const BoxSet> boxes, const VectorXd& u) {
  for (Index i = 0; i < part.block_count(); ++i)
    if (!boxes[static_cast<size_t>(i)].contains(part.block(u, i))) return false;
  return true;
}

void check_lipschitz(const ObjectiveOracle& oracle) {
  for (Index i = 0; i < oracle.block_count(); ++i) {
    if (!(oracle.lipschitz(i) > 0.0)) {
      throw ConfigError("Lipschitz constant of block " + std::to_string(i) + " must be positive");
    }
  }
}

std::vector<double> lipschitz_vector(const ObjectiveOracle& oracle) {
  std::vector<double> l(static_cast<size_t>(oracle.block_count()));
  for (Index i = 0; i < oracle.block_count(); ++i) l[static_cast<size_t>(i)] = oracle.lipschitz(i);
  return l;
}

// Shared driver: bookkeeping, certificates and stopping rules around `step`.
template <class Step>
SolveReport run_method(const ObjectiveOracle& oracle, std::span<const BoxSet> boxes, const VectorXd& u0,
                       const SolverConfig& cfg, Step&& step) {
  cfg.validate();
  check_boxes(oracle, boxes);
  const auto& part = oracle.partition();
  if (u0.size() != part.dim()) throw InputError("u0 has wrong length");
  const std::vector<double> lips = lipschitz_vector(oracle);
  const long m = part.block_count();

  SolveReport rep;
  VectorXd u = u0;
  if (!feasible(part, boxes, u)) {
    for (Index i = 0; i < m; ++i) part.block(u, i) = project_box(boxes[static_cast<size_t>(i)], part.block(u, i));
    rep.start_projected = true;
  }
  double f = oracle.value(u);

  const std::optional<double> fstar = cfg.reference_value;
  const double slack = fstar ? cfg.certificate_slack * (1.0 + std::abs(*fstar)) : 0.0;
  if (fstar && cfg.reference_point) {
    if (cfg.reference_point->size() != part.dim()) throw InputError("reference point has wrong length");
    rep.certificates_available = true;
    rep.r0 = weighted_norm1(part, lips, u - *cfg.reference_point);
    rep.initial_gap = f - *fstar;
  }

  auto record = [&](long k, const VectorXd& uk, double fk) {
    if (cfg.record_history) {
      rep.objective_history.push_back(fk);
      if (fstar) rep.gap_history.push_back(fk - *fstar);
    }
    if (cfg.record_iterates) rep.iterate_history.push_back(uk);
    if (rep.certificates_available) {
      const double gap = fk - *fstar;
      if (gap > sublinear_bound(k, m, *rep.r0, *rep.initial_gap) + slack) ++rep.sublinear_violations;
      if (cfg.sigma1 && gap > linear_bound(k, m, *cfg.sigma1, *rep.r0, *rep.initial_gap) + slack) {
        ++rep.linear_violations;
      }
    }
  };

  record(0, u, f);
  bool done = cfg.stopping_mode == StoppingMode::gap_to_reference && f - *fstar <= cfg.tolerance;
  while (!done && rep.iterations_used < cfg.max_iterations) {
    VectorXd next = step(u);
    assert(feasible(part, boxes, next));
    const double f_next = oracle.value(next);
    ++rep.iterations_used;
    record(rep.iterations_used, next, f_next);
    switch (cfg.stopping_mode) {
      case StoppingMode::gap_to_reference: done = f_next - *fstar <= cfg.tolerance; break;
      case StoppingMode::iterate_change: done = weighted_norm1(part, lips, next - u) <= cfg.tolerance; break;
      case StoppingMode::iteration_budget: break;
    }
    u = std::move(next);
    f = f_next;
  }
  rep.status = done ? SolveStatus::converged : SolveStatus::budget_exhausted;
  rep.final_iterate = std::move(u);
  rep.final_objective = f;
  return rep;
}

}  // namespace

VectorXd coordinate_step(const Eigen::Ref<const VectorXd>& ui, const Eigen::Ref<const VectorXd>& grad_i,
                         double lipschitz, const BoxSet& box) {
  if (!(lipschitz > 0.0)) throw ConfigError("coordinate_step: Lipschitz constant must be positive");
  if (ui.size() != box.dim() || grad_i.size() != box.dim()) throw InputError("coordinate_step: dimension mismatch");
  return (ui - grad_i / lipschitz).cwiseMax(box.lower).cwiseMin(box.upper);
}

VectorXd coordinate_step(const ObjectiveOracle& oracle, const VectorXd& u, Index i, const BoxSet& box) {
  const auto& part = oracle.partition();
  if (i < 0 || i >= part.block_count()) throw InputError("coordinate_step: block index out of range");
  if (u.size() != part.dim()) throw InputError("coordinate_step: u has wrong length");
  return coordinate_step(part.block(u, i), oracle.partial_gradient(u, i), oracle.lipschitz(i), box);
}

std::vector<VectorXd> prox_points(const ObjectiveOracle& oracle, std::span<const BoxSet> boxes, const VectorXd& u,
                                  int worker_count) {
  check_boxes(oracle, boxes);
  check_lipschitz(oracle);
  const auto& part = oracle.partition();
  if (u.size() != part.dim()) throw InputError("prox_points: u has wrong length");
  const Index m = part.block_count();
  std::vector<VectorXd> out(static_cast<size_t>(m));
#pragma omp parallel for num_threads(worker_count) schedule(static)
  for (Index i = 0; i < m; ++i) {
    out[static_cast<size_t>(i)] = coordinate_step(part.block(u, i), oracle.partial_gradient(u, i),
                                                  oracle.lipschitz(i), boxes[static_cast<size_t>(i)]);
  }
  return out;
}

VectorXd pcdm_iterate(const ObjectiveOracle& oracle, std::span<const BoxSet> boxes, const VectorXd& u,
                      int worker_count) {
  check_boxes(oracle, boxes);
  check_lipschitz(oracle);
  const auto& part = oracle.partition();
  if (u.size() != part.dim()) throw InputError("pcdm_iterate: u has wrong length");
  if (!feasible(part, boxes, u)) throw InputError("pcdm_iterate: iterate is not feasible");

  const Index m = part.block_count();
  const double inv_m = 1.0 / static_cast<double>(m);
  const double keep = static_cast<double>(m - 1) / static_cast<double>(m);
  VectorXd next(part.dim());
  // Each block reads the snapshot u and writes only its own segment of next.
#pragma omp parallel for num_threads(worker_count) schedule(static)
  for (Index i = 0; i < m; ++i) {
    const BoxSet& box = boxes[static_cast<size_t>(i)];
    const auto ui = part.block(u, i);
    const VectorXd v = coordinate_step(ui, oracle.partial_gradient(u, i), oracle.lipschitz(i), box);
    // The convex combination can land one ulp outside the box; clamp it back.
    part.block(next, i) = (inv_m * v + keep * ui).cwiseMax(box.lower).cwiseMin(box.upper);
  }
  return next;
}

SolveReport solve(const ObjectiveOracle& oracle, std::span<const BoxSet> boxes, const VectorXd& u0,
                  const SolverConfig& config) {
  check_lipschitz(oracle);
  return run_method(oracle, boxes, u0, config,
                    [&](const VectorXd& u) { return pcdm_iterate(oracle, boxes, u, config.worker_count); });
}

double sublinear_bound(long k, long block_count, double r0, double gap0) {
  if (r0 < 0.0 || gap0 < 0.0) throw InputError("sublinear_bound: r0 and gap0 must be nonnegative");
  if (k < 0 || block_count < 1) throw InputError("sublinear_bound: invalid k or M");
  const double mm = static_cast<double>(block_count);
  return mm / (mm + static_cast<double>(k)) * (0.5 * r0 * r0 + gap0);
}

double linear_bound(long k, long block_count, double sigma1, double r0, double gap0) {
  if (!(sigma1 > 0.0 && sigma1 <= 1.0)) throw InputError("linear_bound: sigma1 must lie in (0, 1]");
  if (r0 < 0.0 || gap0 < 0.0) throw InputError("linear_bound: r0 and gap0 must be nonnegative");
  if (k < 0 || block_count < 1) throw InputError("linear_bound: invalid k or M");
  const double rate = 1.0 - 2.0 * sigma1 / (static_cast<double>(block_count) * (1.0 + sigma1));
  const double base = 0.5 * r0 * r0 + gap0;
  if (k == 0) return base;
  return std::pow(std::max(rate, 0.0), static_cast<double>(k)) * base;
}

SolveReport projected_gradient_solve(const ObjectiveOracle& oracle, std::span<const BoxSet> boxes,
                                     double lipschitz, const VectorXd& u0, const SolverConfig& config) {
  if (!(lipschitz > 0.0)) throw ConfigError("projected_gradient_solve: Lipschitz constant must be positive");
  check_boxes(oracle, boxes);
  const auto& part = oracle.partition();
  VectorXd lo(part.dim()), hi(part.dim());
  for (Index i = 0; i < part.block_count(); ++i) {
    part.block(lo, i) = boxes[static_cast<size_t>(i)].lower;
    part.block(hi, i) = boxes[static_cast<size_t>(i)].upper;
  }
  return run_method(oracle, boxes, u0, config, [&](const VectorXd& u) -> VectorXd {
    return (u - oracle.gradient(u) / lipschitz).cwiseMax(lo).cwiseMin(hi);
  });
}

SolveReport projected_gradient_solve(const QuadraticOracle& oracle, const VectorXd& u0, const SolverConfig& config) {
  const double l = linalg::max_eigenvalue(oracle.qp().dense_hessian());
  return projected_gradient_solve(oracle, oracle.qp().boxes(), std::max(l, kLipschitzFloor), u0, config);
}

VectorXd jacobi_iterate(const QuadraticOracle& oracle, const VectorXd& u, int worker_count) {
  const BlockedQP& qp = oracle.qp();
  const auto& part = qp.partition();
  if (u.size() != part.dim()) throw InputError("jacobi_iterate: u has wrong length");
  if (!qp.feasible(u)) throw InputError("jacobi_iterate: iterate is not feasible");
  const Index m = part.block_count();
  const double inv_m = 1.0 / static_cast<double>(m);
  const double keep = static_cast<double>(m - 1) / static_cast<double>(m);

  BoxQPOptions inner;
  inner.kkt_tolerance = 1e-10;
  VectorXd next(part.dim());
  std::vector<int> failed(static_cast<size_t>(m), 0);
#pragma omp parallel for num_threads(worker_count) schedule(static)
  for (Index i = 0; i < m; ++i) {
    const MatrixXd* hii = qp.hessian_block(i, i);
    const BoxSet& box = qp.box(i);
    const VectorXd ui = part.block(u, i);
    if (hii == nullptr) {
      failed[static_cast<size_t>(i)] = 1;
      continue;
    }
    // Block model: 1/2 v'Q^{ii}v + (grad_i f(u) - Q^{ii} u^i)'v over the box.
    const VectorXd c = oracle.partial_gradient(u, i) - *hii * ui;
    const BoxQPResult r = solve_box_qp(*hii, c, box.lower, box.upper, inner, ui);
    if (!r.converged) {
      failed[static_cast<size_t>(i)] = 1;
      continue;
    }
    part.block(next, i) = (inv_m * r.u + keep * ui).cwiseMax(box.lower).cwiseMin(box.upper);
  }
  for (Index i = 0; i < m; ++i) {
    if (failed[static_cast<size_t>(i)]) throw IterationError(i, "exact block minimization failed");
  }
  return next;
}

SolveReport jacobi_block_solve(const QuadraticOracle& oracle, const VectorXd& u0, const SolverConfig& config) {
  return run_method(oracle, oracle.qp().boxes(), u0, config,
                    [&](const VectorXd& u) { return jacobi_iterate(oracle, u, config.worker_count); });
}

}  // namespace pcdm
