#pragma once

#include <Eigen/Dense>

namespace pcdm::linalg {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Symmetric eigenvalue helpers. Inputs are symmetrized before factorization.
double min_eigenvalue(const MatrixXd& sym);
double max_eigenvalue(const MatrixXd& sym);
double spectral_norm(const MatrixXd& m);
double spectral_radius(const MatrixXd& m);

bool is_symmetric(const MatrixXd& m, double rel_tol = 1e-12);

/// Principal square root of a symmetric PSD matrix; negative eigenvalues
/// below rounding level are clamped to zero.
MatrixXd sym_sqrt(const MatrixXd& sym);

/// exp(m) by scaling and squaring with a Pade approximant.
MatrixXd expm(const MatrixXd& m);

/// Stabilizing solution of P = A'PA - A'PB (R + B'PB)^{-1} B'PA + Q.
/// Structure-preserving doubling; throws ConfigError if it does not converge.
MatrixXd solve_dare(const MatrixXd& a, const MatrixXd& b, const MatrixXd& q, const MatrixXd& r);

struct LqrGain {
  MatrixXd feedback;  ///< u = feedback * x
  MatrixXd cost;      ///< DARE solution
};

LqrGain dlqr(const MatrixXd& a, const MatrixXd& b, const MatrixXd& q, const MatrixXd& r);

}  // namespace pcdm::linalg
