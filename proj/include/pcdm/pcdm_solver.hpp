#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "pcdm/qp_model.hpp"

namespace pcdm {

enum class StoppingMode {
  gap_to_reference,  ///< f(u_k) - f* <= tolerance
  iterate_change,    ///< ||u_{k+1} - u_k||_1 <= tolerance (weighted norm)
  iteration_budget,  ///< exactly max_iterations iterations
};

std::string_view to_string(StoppingMode mode);
StoppingMode stopping_mode_from_string(std::string_view s);

struct SolverConfig {
  int max_iterations = 1000;
  double tolerance = 1e-3;
  StoppingMode stopping_mode = StoppingMode::iteration_budget;
  /// f*; required by gap_to_reference, enables gap history and certificates.
  std::optional<double> reference_value;
  /// u*; with f* it enables the rate certificates (r0 needs u*).
  std::optional<VectorXd> reference_point;
  /// Strong-convexity modulus for the linear-rate certificate.
  std::optional<double> sigma1;
  /// Bound checks accept gap <= bound + certificate_slack * (1 + |f*|).
  double certificate_slack = 1e-11;
  bool record_history = false;
  bool record_iterates = false;
  int worker_count = 1;

  void validate() const;
};

enum class SolveStatus { converged, budget_exhausted };

struct SolveReport {
  VectorXd final_iterate;
  double final_objective = 0.0;
  int iterations_used = 0;
  SolveStatus status = SolveStatus::budget_exhausted;
  /// u0 was infeasible and has been projected onto the boxes.
  bool start_projected = false;

  std::vector<double> objective_history;  ///< f(u_0), ..., f(u_K)
  std::vector<double> gap_history;        ///< f(u_k) - f*, when f* is known
  std::vector<VectorXd> iterate_history;  ///< u_0, ..., u_K when requested

  bool certificates_available = false;
  std::optional<double> r0;               ///< ||u_0 - u*||_1
  std::optional<double> initial_gap;      ///< f(u_0) - f*
  int sublinear_violations = 0;
  int linear_violations = 0;
  int bound_violations() const { return sublinear_violations + linear_violations; }
};

/// argmin over the box of <g, v - u_i> + L_i/2 ||v - u_i||^2 = clamp(u_i - g / L_i).
VectorXd coordinate_step(const ObjectiveOracle& oracle, const VectorXd& u, Index i, const BoxSet& box);

/// Closed form of the prox step from a precomputed block gradient.
VectorXd coordinate_step(const Eigen::Ref<const VectorXd>& ui, const Eigen::Ref<const VectorXd>& grad_i,
                         double lipschitz, const BoxSet& box);

/// All v̄^i(u), evaluated against the same snapshot u.
std::vector<VectorXd> prox_points(const ObjectiveOracle& oracle, std::span<const BoxSet> boxes, const VectorXd& u,
                                  int worker_count = 1);

/// One PCDM iteration: u_{k+1}^i = v̄^i(u_k)/M + (M-1)/M u_k^i. Throws on infeasible input.
VectorXd pcdm_iterate(const ObjectiveOracle& oracle, std::span<const BoxSet> boxes, const VectorXd& u,
                      int worker_count = 1);

SolveReport solve(const ObjectiveOracle& oracle, std::span<const BoxSet> boxes, const VectorXd& u0,
                  const SolverConfig& config);

/// (M / (M + k)) (r0^2 / 2 + gap0)
double sublinear_bound(long k, long block_count, double r0, double gap0);

/// (1 - 2 sigma1 / (M (1 + sigma1)))^k (r0^2 / 2 + gap0); sigma1 must lie in (0, 1].
double linear_bound(long k, long block_count, double sigma1, double r0, double gap0);

/// Full projected gradient u <- clamp(u - grad f(u) / lipschitz).
SolveReport projected_gradient_solve(const ObjectiveOracle& oracle, std::span<const BoxSet> boxes,
                                     double lipschitz, const VectorXd& u0, const SolverConfig& config);

/// Projected gradient with step 1 / lambda_max(Q).
SolveReport projected_gradient_solve(const QuadraticOracle& oracle, const VectorXd& u0, const SolverConfig& config);

/// Gauss-Jacobi baseline: each block minimizes f exactly over its box with the
/// others frozen at u_k, then the same 1/M averaging as PCDM is applied.
SolveReport jacobi_block_solve(const QuadraticOracle& oracle, const VectorXd& u0, const SolverConfig& config);

/// One Jacobi iteration (exposed for tests).
VectorXd jacobi_iterate(const QuadraticOracle& oracle, const VectorXd& u, int worker_count = 1);

}  // namespace pcdm
