#include "pcdm/linalg.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "pcdm/errors.hpp"

namespace pcdm::linalg {

namespace {

Eigen::SelfAdjointEigenSolver<MatrixXd> sym_eig(const MatrixXd& sym, bool vectors) {
  const MatrixXd s = 0.5 * (sym + sym.transpose());
  return Eigen::SelfAdjointEigenSolver<MatrixXd>(s, vectors ? Eigen::ComputeEigenvectors
                                                            : Eigen::EigenvaluesOnly);
}

}  // namespace

double min_eigenvalue(const MatrixXd& sym) {
  if (sym.size() == 0) return 0.0;
  return sym_eig(sym, false).eigenvalues().minCoeff();
}

double max_eigenvalue(const MatrixXd& sym) {
  if (sym.size() == 0) return 0.0;
  return sym_eig(sym, false).eigenvalues().maxCoeff();
}

double spectral_norm(const MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<MatrixXd> svd(m);
  return svd.singularValues()(0);
}

double spectral_radius(const MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::EigenSolver<MatrixXd> es(m, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

bool is_symmetric(const MatrixXd& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

MatrixXd sym_sqrt(const MatrixXd& sym) {
  if (sym.size() == 0) return sym;
  auto es = sym_eig(sym, true);
  const VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  MatrixXd r = es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (r + r.transpose());
}

MatrixXd expm(const MatrixXd& m) {
  if (m.size() == 0) return m;
  return m.exp();
}

MatrixXd solve_dare(const MatrixXd& a, const MatrixXd& b, const MatrixXd& q, const MatrixXd& r) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || b.rows() != n || q.rows() != n || q.cols() != n || r.rows() != b.cols() ||
      r.cols() != b.cols()) {
    throw InputError("solve_dare: dimension mismatch");
  }
  Eigen::LLT<MatrixXd> rllt(0.5 * (r + r.transpose()));
  if (rllt.info() != Eigen::Success) throw ConfigError("solve_dare: R is not positive definite");

  MatrixXd ak = a;
  MatrixXd gk = b * rllt.solve(b.transpose());
  MatrixXd hk = 0.5 * (q + q.transpose());
  const MatrixXd eye = MatrixXd::Identity(n, n);

  for (int it = 0; it < 100; ++it) {
    Eigen::PartialPivLU<MatrixXd> lu(eye + gk * hk);
    const MatrixXd w_a = lu.solve(ak);
    const MatrixXd w_g = lu.solve(gk);
    MatrixXd h_next = hk + ak.transpose() * hk * w_a;
    MatrixXd g_next = gk + ak * w_g * ak.transpose();
    MatrixXd a_next = ak * w_a;
    h_next = 0.5 * (h_next + h_next.transpose());
    g_next = 0.5 * (g_next + g_next.transpose());
    if (!h_next.allFinite()) break;
    const double change = (h_next - hk).cwiseAbs().maxCoeff();
    hk = std::move(h_next);
    gk = std::move(g_next);
    ak = std::move(a_next);
    if (change <= 1e-14 * std::max(1.0, hk.cwiseAbs().maxCoeff())) {
      const MatrixXd gain = (r + b.transpose() * hk * b).ldlt().solve(b.transpose() * hk * a);
      if (spectral_radius(a - b * gain) < 1.0) return hk;
      break;
    }
  }
  throw ConfigError("solve_dare: no stabilizing solution (pair not stabilizable?)");
}

LqrGain dlqr(const MatrixXd& a, const MatrixXd& b, const MatrixXd& q, const MatrixXd& r) {
  LqrGain out;
  out.cost = solve_dare(a, b, q, r);
  const MatrixXd lhs = r + b.transpose() * out.cost * b;
  out.feedback = -lhs.ldlt().solve(b.transpose() * out.cost * a);
  return out;
}

}  // namespace pcdm::linalg
