#pragma once

#include <optional>

#include <Eigen/Dense>

#include "pcdm/qp_model.hpp"

namespace pcdm {

struct BoxQPOptions {
  double kkt_tolerance = 1e-10;
  /// 0 selects 10 * n + 100.
  int max_iterations = 0;
};

struct BoxQPResult {
  VectorXd u;
  double value = 0.0;
  /// || u - clamp(u - grad f(u)) ||_inf
  double kkt_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Primal active-set method for min 1/2 u'Hu + c'u s.t. lo <= u <= hi with H
/// positive definite on every free subspace visited. Coordinates are added to
/// the working set at blocking bounds and released one at a time on the most
/// violated multiplier. Without `start` the solver begins from the clamped
/// unconstrained minimizer.
BoxQPResult solve_box_qp(const MatrixXd& h, const VectorXd& c, const VectorXd& lo, const VectorXd& hi,
                         const BoxQPOptions& opts = {}, const std::optional<VectorXd>& start = std::nullopt);

/// Natural residual || u - clamp(u - (Hu + c)) ||_inf.
double box_kkt_residual(const MatrixXd& h, const VectorXd& c, const VectorXd& lo, const VectorXd& hi,
                        const VectorXd& u);

/// Reference optimum (f*, u*) of a blocked QP at the given state.
BoxQPResult reference_optimum(const BlockedQP& qp, const std::optional<VectorXd>& x = std::nullopt,
                              const BoxQPOptions& opts = {});

}  // namespace pcdm
