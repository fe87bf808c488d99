#include "pcdm/terminal_cost.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>
#include <string>

#include "pcdm/errors.hpp"
#include "pcdm/linalg.hpp"

namespace pcdm {

namespace {

size_t sz(Index i) { return static_cast<size_t>(i); }

MatrixXd block_or_zero(const BlockMap& blocks, Index i, Index j, Index rows, Index cols) {
  if (auto it = blocks.find({i, j}); it != blocks.end()) return it->second;
  return MatrixXd::Zero(rows, cols);
}

MatrixXd block_diag(const std::vector<MatrixXd>& blocks) {
  Index r = 0, c = 0;
  for (const auto& b : blocks) {
    r += b.rows();
    c += b.cols();
  }
  MatrixXd out = MatrixXd::Zero(r, c);
  r = c = 0;
  for (const auto& b : blocks) {
    out.block(r, c, b.rows(), b.cols()) = b;
    r += b.rows();
    c += b.cols();
  }
  return out;
}

double upper_bound_tol(double scale) { return 1e-8 * (1.0 + scale); }

MatrixCheck check_nsd(const MatrixXd& m, double scale) {
  MatrixCheck out;
  out.max_eigenvalue = m.size() == 0 ? 0.0 : linalg::max_eigenvalue(m);
  out.tolerance = upper_bound_tol(scale);
  out.pass = out.max_eigenvalue <= out.tolerance;
  return out;
}

// Pieces of the local condition for subsystem i.
struct LocalTerms {
  MatrixXd closed;  // M_i'P^iM_i
  MatrixXd base;    // P^i - Q^i - F^i'R^iF^i
  Index ni = 0;
};

LocalTerms local_terms(const NetworkSystem& sys, Index i, const TerminalCandidate& cand, const StageWeights& costs) {
  const auto nb = local_neighborhood(sys, i);
  const Index ni = sys.state_dims[sz(i)];
  Index nl = 0;
  for (Index j : nb) nl += sys.state_dims[sz(j)];
  MatrixXd mcl = MatrixXd::Zero(ni, nl);
  Index off = 0;
  for (Index j : nb) {
    const Index nj = sys.state_dims[sz(j)];
    const Index mj = sys.input_dims[sz(j)];
    mcl.middleCols(off, nj) = block_or_zero(sys.a_blocks, i, j, ni, nj) +
                              block_or_zero(sys.b_blocks, i, j, ni, mj) * cand.feedback[sz(j)];
    off += nj;
  }
  const MatrixXd& p = cand.terminal[sz(i)];
  const MatrixXd& f = cand.feedback[sz(i)];
  LocalTerms t;
  t.closed = mcl.transpose() * p * mcl;
  t.base = p - costs.state[sz(i)] - f.transpose() * costs.input[sz(i)] * f;
  t.ni = ni;
  return t;
}

void check_costs(const NetworkSystem& sys, const StageWeights& costs) {
  const size_t m = sz(sys.subsystem_count());
  if (costs.state.size() != m || costs.input.size() != m) throw InputError("terminal cost: need Q^i and R^i per subsystem");
  for (size_t i = 0; i < m; ++i) {
    if (costs.state[i].rows() != sys.state_dims[i] || costs.state[i].cols() != sys.state_dims[i] ||
        costs.input[i].rows() != sys.input_dims[i] || costs.input[i].cols() != sys.input_dims[i]) {
      throw InputError("terminal cost: weights of subsystem " + std::to_string(i) + " have wrong shape");
    }
  }
}

}  // namespace

std::vector<Index> local_neighborhood(const NetworkSystem& sys, Index i) {
  std::vector<Index> out{i};
  for (Index j : sys.neighbors(i))
    if (j != i) out.push_back(j);
  return out;
}

void TerminalCandidate::validate(const NetworkSystem& sys) const {
  sys.validate();
  const Index m = sys.subsystem_count();
  if (static_cast<Index>(terminal.size()) != m || static_cast<Index>(feedback.size()) != m ||
      static_cast<Index>(coupling.size()) != m) {
    throw InputError("TerminalCandidate: need P^i, F^i and W^{N_i} for every subsystem");
  }
  for (Index i = 0; i < m; ++i) {
    const Index ni = sys.state_dims[sz(i)];
    const MatrixXd& p = terminal[sz(i)];
    if (p.rows() != ni || p.cols() != ni) throw InputError("TerminalCandidate: P^" + std::to_string(i) + " has wrong shape");
    if (!linalg::is_symmetric(p, 1e-10) || !(linalg::min_eigenvalue(p) > 0.0)) {
      throw InputError("TerminalCandidate: P^" + std::to_string(i) + " is not symmetric positive definite");
    }
    if (feedback[sz(i)].rows() != sys.input_dims[sz(i)] || feedback[sz(i)].cols() != ni) {
      throw InputError("TerminalCandidate: F^" + std::to_string(i) + " has wrong shape");
    }
    Index nl = 0;
    for (Index j : local_neighborhood(sys, i)) nl += sys.state_dims[sz(j)];
    const MatrixXd& w = coupling[sz(i)];
    if (w.rows() != nl || w.cols() != nl) {
      throw InputError("TerminalCandidate: W^{N_" + std::to_string(i) + "} must be " + std::to_string(nl) + "x" +
                       std::to_string(nl));
    }
    if (!linalg::is_symmetric(w, 1e-10)) throw InputError("TerminalCandidate: W^{N_" + std::to_string(i) + "} not symmetric");
  }
}

MatrixXd TerminalCandidate::dense_terminal(const NetworkSystem&) const { return block_diag(terminal); }
MatrixXd TerminalCandidate::dense_feedback(const NetworkSystem&) const { return block_diag(feedback); }

std::vector<MatrixXd> zero_coupling(const NetworkSystem& sys) {
  std::vector<MatrixXd> out;
  for (Index i = 0; i < sys.subsystem_count(); ++i) {
    Index nl = 0;
    for (Index j : local_neighborhood(sys, i)) nl += sys.state_dims[sz(j)];
    out.push_back(MatrixXd::Zero(nl, nl));
  }
  return out;
}

MatrixXd local_lhs(const NetworkSystem& sys, Index i, const TerminalCandidate& cand, const StageWeights& costs) {
  cand.validate(sys);
  check_costs(sys, costs);
  if (i < 0 || i >= sys.subsystem_count()) throw InputError("local_lhs: subsystem index out of range");
  LocalTerms t = local_terms(sys, i, cand, costs);
  t.closed.topLeftCorner(t.ni, t.ni) -= t.base;
  return t.closed;
}

MatrixCheck verify_local_mi(const NetworkSystem& sys, Index i, const TerminalCandidate& cand, const StageWeights& costs) {
  cand.validate(sys);
  check_costs(sys, costs);
  if (i < 0 || i >= sys.subsystem_count()) throw InputError("verify_local_mi: subsystem index out of range");
  const LocalTerms t = local_terms(sys, i, cand, costs);
  MatrixXd lhs = t.closed;
  lhs.topLeftCorner(t.ni, t.ni) -= t.base;
  const MatrixXd residual = lhs - cand.coupling[sz(i)];
  return check_nsd(residual, linalg::spectral_norm(t.closed) + linalg::spectral_norm(t.base));
}

MatrixXd assemble_coupling(const NetworkSystem& sys, const TerminalCandidate& cand) {
  cand.validate(sys);
  const BlockPartition sp = sys.state_partition();
  MatrixXd w = MatrixXd::Zero(sp.dim(), sp.dim());
  for (Index i = 0; i < sys.subsystem_count(); ++i) {
    const auto nb = local_neighborhood(sys, i);
    const MatrixXd& wl = cand.coupling[sz(i)];
    Index ra = 0;
    for (Index a : nb) {
      Index cb = 0;
      for (Index b : nb) {
        w.block(sp.offset(a), sp.offset(b), sp.size(a), sp.size(b)) += wl.block(ra, cb, sp.size(a), sp.size(b));
        cb += sp.size(b);
      }
      ra += sp.size(a);
    }
  }
  return w;
}

namespace {

struct GlobalTerms {
  MatrixXd closed;  // (A+BF)'P(A+BF)
  MatrixXd base;    // P - Q - F'RF
};

GlobalTerms global_terms(const NetworkSystem& sys, const TerminalCandidate& cand, const StageWeights& costs) {
  const MatrixXd p = block_diag(cand.terminal);
  const MatrixXd f = block_diag(cand.feedback);
  const MatrixXd acl = sys.dense_a() + sys.dense_b() * f;
  return {acl.transpose() * p * acl, p - block_diag(costs.state) - f.transpose() * block_diag(costs.input) * f};
}

}  // namespace

MatrixXd lyapunov_residual(const NetworkSystem& sys, const TerminalCandidate& cand, const StageWeights& costs) {
  cand.validate(sys);
  check_costs(sys, costs);
  const GlobalTerms t = global_terms(sys, cand, costs);
  return t.closed - t.base;
}

GlobalCertificate verify_global(const NetworkSystem& sys, const TerminalCandidate& cand, const StageWeights& costs) {
  cand.validate(sys);
  check_costs(sys, costs);
  GlobalCertificate cert;
  const MatrixXd w = assemble_coupling(sys, cand);
  cert.coupling = check_nsd(w, linalg::spectral_norm(w));
  const GlobalTerms t = global_terms(sys, cand, costs);
  cert.lyapunov = check_nsd(t.closed - t.base, linalg::spectral_norm(t.closed) + linalg::spectral_norm(t.base));
  cert.locals_pass = true;
  for (Index i = 0; i < sys.subsystem_count(); ++i) {
    cert.local.push_back(verify_local_mi(sys, i, cand, costs));
    cert.locals_pass = cert.locals_pass && cert.local.back().pass;
  }
  cert.pass = cert.coupling.pass && cert.lyapunov.pass;
  return cert;
}

namespace {

// Scales P^i = beta * base^i with fixed gains until the assembled residual
// passes; W^{N_i} is the exact local residual.
std::optional<TerminalCandidate> scale_search(const NetworkSystem& sys, const StageWeights& costs,
                                              const std::vector<MatrixXd>& gains, const std::vector<MatrixXd>& base,
                                              double& beta_out) {
  TerminalCandidate cand;
  cand.feedback = gains;
  cand.terminal.resize(base.size());
  cand.coupling = zero_coupling(sys);
  double beta = 1.0;
  for (int k = 0; k <= 20; ++k, beta *= 2.0) {
    for (size_t i = 0; i < base.size(); ++i) cand.terminal[i] = beta * base[i];
    for (Index i = 0; i < sys.subsystem_count(); ++i) {
      MatrixXd lhs = local_lhs(sys, i, cand, costs);
      cand.coupling[sz(i)] = 0.5 * (lhs + lhs.transpose());
    }
    if (verify_global(sys, cand, costs).pass) {
      beta_out = beta;
      return cand;
    }
  }
  return std::nullopt;
}

// Local LQR (or, with zero_gain, the local Lyapunov equation) per subsystem.
bool local_ingredients(const NetworkSystem& sys, const StageWeights& costs, bool zero_gain, std::vector<MatrixXd>& gains,
                       std::vector<MatrixXd>& base, std::string& why) {
  for (Index i = 0; i < sys.subsystem_count(); ++i) {
    const Index ni = sys.state_dims[sz(i)];
    const Index mi = sys.input_dims[sz(i)];
    const MatrixXd a = block_or_zero(sys.a_blocks, i, i, ni, ni);
    const MatrixXd b = zero_gain ? MatrixXd::Zero(ni, mi) : block_or_zero(sys.b_blocks, i, i, ni, mi);
    if (zero_gain && !(linalg::spectral_radius(a) < 1.0)) {
      why = "A^{ii} of subsystem " + std::to_string(i) + " is not Schur stable";
      return false;
    }
    try {
      const auto lqr = linalg::dlqr(a, b, costs.state[sz(i)], costs.input[sz(i)]);
      gains.push_back(lqr.feedback);
      base.push_back(0.5 * (lqr.cost + lqr.cost.transpose()));
    } catch (const ConfigError& e) {
      why = "local Riccati equation of subsystem " + std::to_string(i) + ": " + e.what();
      return false;
    }
    if (!(linalg::min_eigenvalue(base.back()) > 0.0)) {
      why = "local terminal matrix of subsystem " + std::to_string(i) + " is not positive definite";
      return false;
    }
  }
  return true;
}

}  // namespace

SynthesisResult synth_fallback(const NetworkSystem& sys, const StageWeights& costs) {
  sys.validate();
  check_costs(sys, costs);
  SynthesisResult res;
  std::string why;
  for (const bool zero_gain : {false, true}) {
    std::vector<MatrixXd> gains, base;
    std::string reason;
    if (local_ingredients(sys, costs, zero_gain, gains, base, reason)) {
      double beta = 0.0;
      if (auto cand = scale_search(sys, costs, gains, base, beta)) {
        res.candidate = std::move(cand);
        res.scale = beta;
        res.message = zero_gain ? "ok (zero gain, local Lyapunov)" : "ok (local LQR)";
        return res;
      }
      reason = "no scaling beta <= 2^20 gives an assembled W <= 0";
    }
    why += (why.empty() ? "" : "; ") + std::string(zero_gain ? "zero gain: " : "local LQR: ") + reason;
  }
  res.message = why;
  return res;
}

TerminalIngredients default_terminal(const NetworkSystem& sys, const StageWeights& costs) {
  TerminalIngredients out;
  SynthesisResult syn = synth_fallback(sys, costs);
  out.message = syn.message;
  if (syn.candidate) {
    out.terminal = std::move(syn.candidate->terminal);
    out.feedback = std::move(syn.candidate->feedback);
    out.certified = true;
    return out;
  }
  for (Index i = 0; i < sys.subsystem_count(); ++i) {
    const Index ni = sys.state_dims[sz(i)];
    const Index mi = sys.input_dims[sz(i)];
    const auto lqr = linalg::dlqr(block_or_zero(sys.a_blocks, i, i, ni, ni), block_or_zero(sys.b_blocks, i, i, ni, mi),
                                  costs.state[sz(i)], costs.input[sz(i)]);
    out.terminal.push_back(0.5 * (lqr.cost + lqr.cost.transpose()));
    out.feedback.push_back(lqr.feedback);
  }
  return out;
}

StabilityRegion estimate_region(const NetworkSystem& sys, const TerminalCandidate& cand, const std::vector<BoxSet>& boxes,
                                const StageWeights& costs, const RegionOptions& opts) {
  cand.validate(sys);
  check_costs(sys, costs);
  if (static_cast<Index>(boxes.size()) != sys.subsystem_count()) throw InputError("estimate_region: need one box per subsystem");
  if (opts.samples < 1 || opts.grid_min_exponent > opts.grid_max_exponent) throw ConfigError("estimate_region: bad options");
  const BlockPartition ip = sys.input_partition();
  VectorXd lo(ip.dim()), hi(ip.dim());
  for (Index i = 0; i < sys.subsystem_count(); ++i) {
    boxes[sz(i)].validate();
    if (boxes[sz(i)].dim() != ip.size(i)) throw InputError("estimate_region: box dimension mismatch");
    ip.block(lo, i) = boxes[sz(i)].lower;
    ip.block(hi, i) = boxes[sz(i)].upper;
  }

  StabilityRegion out;
  const MatrixXd p = block_diag(cand.terminal);
  const MatrixXd f = block_diag(cand.feedback);
  const MatrixXd acl = sys.dense_a() + sys.dense_b() * f;
  const MatrixXd decay = acl.transpose() * p * acl;
  const MatrixXd stage = block_diag(costs.state) + f.transpose() * block_diag(costs.input) * f;
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (p + p.transpose()));
  const MatrixXd p_inv_half = eig.eigenvectors() * eig.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
                              eig.eigenvectors().transpose();
  const Index n = p.rows();

  // Directions d with d'Pd = 1; x = sqrt(alpha) d lies on the level set.
  std::vector<VectorXd> dirs;
  dirs.reserve(static_cast<size_t>(opts.samples) + 1);
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal;
  for (int s = 0; s < opts.samples; ++s) {
    VectorXd y(n);
    for (Index k = 0; k < n; ++k) y[k] = normal(rng);
    const double nrm = y.norm();
    if (nrm == 0.0) continue;
    dirs.push_back(p_inv_half * (y / nrm));
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> gen(p_inv_half * stage * p_inv_half);
  dirs.push_back(p_inv_half * gen.eigenvectors().col(0));

  double scale_cap = std::numeric_limits<double>::infinity();  // largest admissible sqrt(alpha)
  double stage_min = std::numeric_limits<double>::infinity();
  for (const VectorXd& d : dirs) {
    if (d.dot(decay * d) > 1.0 + 1e-9) {
      out.message = "terminal cost does not decrease along the closed loop";
      return out;
    }
    const VectorXd u = f * d;
    for (Index k = 0; k < u.size(); ++k) {
      double cap = std::numeric_limits<double>::infinity();
      if (u[k] > 0.0) cap = hi[k] / u[k];
      else if (u[k] < 0.0) cap = lo[k] / u[k];
      scale_cap = std::min(scale_cap, std::max(cap, 0.0));
    }
    stage_min = std::min(stage_min, d.dot(stage * d));
  }
  const double alpha_cap = scale_cap * scale_cap;
  for (int k = opts.grid_max_exponent; k >= opts.grid_min_exponent; --k) {
    const double level = std::ldexp(1.0, k);
    if (level <= alpha_cap) {
      out.alpha = level;
      out.empty = false;
      break;
    }
  }
  if (out.empty) {
    out.message = "no grid level keeps the terminal feedback inside the input boxes";
    return out;
  }
  out.d = out.alpha * std::max(stage_min, 0.0);
  out.message = out.d > 0.0 ? "ok" : "stage cost vanishes on part of the boundary; d = 0";
  if (alpha_cap >= std::ldexp(1.0, opts.grid_max_exponent)) out.message += "; alpha capped at the top of the grid";
  return out;
}

// ---------------------------------------------------------------------------
// SDP export

namespace {

// Matrix-valued affine function c + sum_k x_k T_k (k is the 1-based SDPA index).
struct Affine {
  MatrixXd c;
  std::map<int, MatrixXd> terms;

  static Affine zero(Index r, Index cols) { return {MatrixXd::Zero(r, cols), {}}; }
  static Affine constant(MatrixXd m) { return {std::move(m), {}}; }
  Index rows() const { return c.rows(); }
  Index cols() const { return c.cols(); }

  void add(const Affine& o, double sign = 1.0) {
    c += sign * o.c;
    for (const auto& [k, t] : o.terms) {
      auto [it, fresh] = terms.try_emplace(k, MatrixXd::Zero(rows(), cols()));
      it->second += sign * t;
    }
  }

  void place(const Affine& o, Index r, Index col) {
    c.block(r, col, o.rows(), o.cols()) += o.c;
    for (const auto& [k, t] : o.terms) {
      auto [it, fresh] = terms.try_emplace(k, MatrixXd::Zero(rows(), cols()));
      it->second.block(r, col, o.rows(), o.cols()) += t;
    }
  }

  Affine transpose() const {
    Affine out{c.transpose(), {}};
    for (const auto& [k, t] : terms) out.terms[k] = t.transpose();
    return out;
  }
};

Affine operator+(Affine a, const Affine& b) {
  a.add(b);
  return a;
}
Affine operator-(Affine a, const Affine& b) {
  a.add(b, -1.0);
  return a;
}
Affine operator*(const MatrixXd& l, const Affine& a) {
  Affine out{l * a.c, {}};
  for (const auto& [k, t] : a.terms) out.terms[k] = l * t;
  return out;
}
Affine operator*(const Affine& a, const MatrixXd& r) {
  Affine out{a.c * r, {}};
  for (const auto& [k, t] : a.terms) out.terms[k] = t * r;
  return out;
}

int sym_count(Index n) { return static_cast<int>(n * (n + 1) / 2); }

// Scalar index (0-based, relative to v.first) of entry (r, c).
int entry_index(const LmiVariable& v, Index r, Index c) {
  switch (v.kind) {
    case LmiVariableKind::general: return static_cast<int>(r * v.cols + c);
    case LmiVariableKind::symmetric: {
      if (r > c) std::swap(r, c);
      // row-major upper triangle
      return static_cast<int>(r * v.rows - r * (r - 1) / 2 + (c - r));
    }
    case LmiVariableKind::scalar: return 0;
  }
  return 0;
}

Affine as_affine(const LmiVariable& v) {
  Affine out = Affine::zero(v.rows, v.cols);
  for (Index r = 0; r < v.rows; ++r) {
    for (Index c = 0; c < v.cols; ++c) {
      if (v.kind == LmiVariableKind::symmetric && r > c) continue;
      MatrixXd e = MatrixXd::Zero(v.rows, v.cols);
      e(r, c) = 1.0;
      if (v.kind == LmiVariableKind::symmetric) e(c, r) = 1.0;
      out.terms[v.first + entry_index(v, r, c)] = std::move(e);
    }
  }
  return out;
}

MatrixXd read_variable(const LmiVariable& v, const VectorXd& x) {
  MatrixXd out(v.rows, v.cols);
  for (Index r = 0; r < v.rows; ++r)
    for (Index c = 0; c < v.cols; ++c) out(r, c) = x[v.first - 1 + entry_index(v, r, c)];
  return out;
}

void write_variable(const LmiVariable& v, const MatrixXd& m, VectorXd& x) {
  if (m.rows() != v.rows || m.cols() != v.cols) throw InputError("pack_sdp_point: " + v.name + " has wrong shape");
  for (Index r = 0; r < v.rows; ++r)
    for (Index c = 0; c < v.cols; ++c) {
      if (v.kind == LmiVariableKind::symmetric && r > c) continue;
      x[v.first - 1 + entry_index(v, r, c)] =
          v.kind == LmiVariableKind::symmetric ? 0.5 * (m(r, c) + m(c, r)) : m(r, c);
    }
}

void emit_block(const Affine& lmi, int block, std::vector<SdpaEntry>& entries) {
  auto emit = [&](int matrix, const MatrixXd& coeff, double sign) {
    for (Index r = 0; r < coeff.rows(); ++r) {
      for (Index c = r; c < coeff.cols(); ++c) {
        if (coeff(r, c) != coeff(c, r)) throw std::logic_error("export_sdpa: asymmetric LMI coefficient");
        if (coeff(r, c) != 0.0) {
          entries.push_back({matrix, block, static_cast<int>(r + 1), static_cast<int>(c + 1), sign * coeff(r, c)});
        }
      }
    }
  };
  emit(0, lmi.c, -1.0);  // F(x) = sum F_k x_k - F_0
  for (const auto& [k, t] : lmi.terms) emit(k, t, 1.0);
}

const char* kind_name(LmiVariableKind k) {
  switch (k) {
    case LmiVariableKind::general: return "general, row-major";
    case LmiVariableKind::symmetric: return "symmetric, row-major upper triangle";
    case LmiVariableKind::scalar: return "scalar";
  }
  return "";
}

}  // namespace

const LmiVariable& LmiExport::variable(const std::string& name) const {
  for (const auto& v : variables)
    if (v.name == name) return v;
  throw InputError("LmiExport: unknown variable " + name);
}

LmiExport export_sdpa(const NetworkSystem& sys, const StageWeights& costs) {
  sys.validate();
  check_costs(sys, costs);
  const Index m = sys.subsystem_count();
  const Index n = sys.state_dims.front();
  for (Index d : sys.state_dims) {
    if (d != n) throw UnsupportedStructure("export_sdpa: the LMI requires all subsystems to have the same state dimension");
  }

  LmiExport out;
  int next = 1;
  auto declare = [&](std::string name, LmiVariableKind kind, Index rows, Index cols) {
    const int count = kind == LmiVariableKind::symmetric ? sym_count(rows) : static_cast<int>(rows * cols);
    out.variables.push_back({std::move(name), kind, rows, cols, next, count});
    next += count;
  };
  std::vector<std::vector<Index>> nbs;
  for (Index i = 0; i < m; ++i) nbs.push_back(local_neighborhood(sys, i));
  declare("G", LmiVariableKind::general, n, n);
  for (Index i = 0; i < m; ++i) declare("S^" + std::to_string(i), LmiVariableKind::symmetric, n, n);
  for (Index i = 0; i < m; ++i) declare("Y^" + std::to_string(i), LmiVariableKind::general, sys.input_dims[sz(i)], n);
  for (Index i = 0; i < m; ++i) {
    const Index nl = static_cast<Index>(nbs[sz(i)].size()) * n;
    declare("Wt^" + std::to_string(i), LmiVariableKind::symmetric, nl, nl);
  }
  for (Index i = 0; i < m; ++i) declare("mu^" + std::to_string(i), LmiVariableKind::scalar, 1, 1);
  declare("delta", LmiVariableKind::scalar, 1, 1);

  SdpaProblem& prob = out.problem;
  prob.variable_count = next - 1;
  prob.objective = VectorXd::Zero(prob.variable_count);
  prob.objective[out.variable("delta").first - 1] = 1.0;

  const Affine g = as_affine(out.variable("G"));
  const Index n_total = sys.state_dim();
  Affine coupling_sum = Affine::zero(n_total, n_total);

  for (Index i = 0; i < m; ++i) {
    const auto& nb = nbs[sz(i)];
    const Index k = static_cast<Index>(nb.size());
    const Index nl = k * n;
    const Index mi = sys.input_dims[sz(i)];
    Index ml = 0;
    for (Index j : nb) ml += sys.input_dims[sz(j)];

    Affine gn = Affine::zero(nl, nl);
    for (Index a = 0; a < k; ++a) gn.place(g, a * n, a * n);
    Affine sn = Affine::zero(nl, nl);
    sn.place(as_affine(out.variable("S^" + std::to_string(i))), 0, 0);
    if (k > 1) {
      Affine mu_block = Affine::zero((k - 1) * n, (k - 1) * n);
      mu_block.terms[out.variable("mu^" + std::to_string(i)).first] = MatrixXd::Identity((k - 1) * n, (k - 1) * n);
      sn.place(mu_block, n, n);
    }
    Affine yn = Affine::zero(ml, nl);
    MatrixXd a_l = MatrixXd::Zero(n, nl);
    MatrixXd b_l = MatrixXd::Zero(n, ml);
    Index moff = 0;
    for (Index a = 0; a < k; ++a) {
      const Index j = nb[sz(a)];
      const Index mj = sys.input_dims[sz(j)];
      yn.place(as_affine(out.variable("Y^" + std::to_string(j))), moff, a * n);
      a_l.middleCols(a * n, n) = block_or_zero(sys.a_blocks, i, j, n, n);
      b_l.middleCols(moff, mj) = block_or_zero(sys.b_blocks, i, j, n, mj);
      moff += mj;
    }
    Affine tn = Affine::zero(nl, nl);
    tn.place(a_l * gn + b_l * yn, 0, 0);
    for (Index a = 1; a < k; ++a) tn.place(g, n + (a - 1) * n, a * n);

    Affine ti = Affine::zero(n + mi, nl);
    ti.place(linalg::sym_sqrt(costs.state[sz(i)]) * g, 0, 0);
    ti.place(linalg::sym_sqrt(costs.input[sz(i)]) * as_affine(out.variable("Y^" + std::to_string(i))), n, 0);

    const Affine wt = as_affine(out.variable("Wt^" + std::to_string(i)));
    const Index size = 2 * nl + n + mi;
    Affine lmi = Affine::zero(size, size);
    lmi.place(gn + gn.transpose() - sn + wt, 0, 0);
    lmi.place(tn.transpose(), 0, nl);
    lmi.place(tn, nl, 0);
    lmi.place(ti.transpose(), 0, 2 * nl);
    lmi.place(ti, 2 * nl, 0);
    lmi.place(sn, nl, nl);
    lmi.place(Affine::constant(MatrixXd::Identity(n + mi, n + mi)), 2 * nl, 2 * nl);
    emit_block(lmi, static_cast<int>(i + 1), prob.entries);
    prob.block_sizes.push_back(static_cast<int>(size));
    out.lmi_sizes.push_back(static_cast<int>(size));

    MatrixXd lift = MatrixXd::Zero(nl, n_total);
    for (Index a = 0; a < k; ++a) lift.block(a * n, nb[sz(a)] * n, n, n).setIdentity();
    coupling_sum.add(lift.transpose() * wt * lift);
  }

  Affine delta_block = Affine::zero(n_total, n_total);
  const LmiVariable& dv = out.variable("delta");
  delta_block.terms[dv.first] = MatrixXd::Identity(n_total, n_total);
  delta_block.add(coupling_sum, -1.0);
  emit_block(delta_block, static_cast<int>(m + 1), prob.entries);
  prob.block_sizes.push_back(static_cast<int>(n_total));

  prob.comments.push_back("distributed terminal cost SDP: minimize delta");
  prob.comments.push_back("blocks 1.." + std::to_string(m) + ": per-subsystem LMIs; block " + std::to_string(m + 1) +
                          ": delta*I - sum Wt >= 0");
  prob.comments.push_back("Y^{i,j} = Y^j substituted; P^i = inv(S^i), F^i = Y^i inv(G)");
  for (const auto& v : out.variables) {
    prob.comments.push_back("x" + std::to_string(v.first) + "..x" + std::to_string(v.first + v.count - 1) + ": " + v.name +
                            " (" + std::to_string(v.rows) + "x" + std::to_string(v.cols) + ", " + kind_name(v.kind) + ")");
  }
  return out;
}

TerminalCandidate import_sdp_solution(const NetworkSystem& sys, const LmiExport& lmi, const VectorXd& x) {
  if (x.size() != lmi.problem.variable_count) throw InputError("import_sdp_solution: solution has wrong length");
  const Index m = sys.subsystem_count();
  const MatrixXd g = read_variable(lmi.variable("G"), x);
  Eigen::FullPivLU<MatrixXd> g_lu(g);
  if (!g_lu.isInvertible()) throw InputError("import_sdp_solution: G is singular");
  const MatrixXd g_inv = g_lu.inverse();
  TerminalCandidate cand;
  for (Index i = 0; i < m; ++i) {
    const std::string s = std::to_string(i);
    MatrixXd p = read_variable(lmi.variable("S^" + s), x).inverse();
    cand.terminal.push_back(0.5 * (p + p.transpose()));
    cand.feedback.push_back(read_variable(lmi.variable("Y^" + s), x) * g_inv);
    const MatrixXd wt = read_variable(lmi.variable("Wt^" + s), x);
    const Index k = wt.rows() / g.rows();
    MatrixXd gn_inv = MatrixXd::Zero(wt.rows(), wt.cols());
    for (Index a = 0; a < k; ++a) gn_inv.block(a * g.rows(), a * g.rows(), g.rows(), g.rows()) = g_inv;
    MatrixXd w = gn_inv.transpose() * wt * gn_inv;
    cand.coupling.push_back(0.5 * (w + w.transpose()));
  }
  return cand;
}

VectorXd pack_sdp_point(const NetworkSystem& sys, const LmiExport& lmi, const MatrixXd& g, const TerminalCandidate& cand,
                        double mu, double delta) {
  cand.validate(sys);
  VectorXd x = VectorXd::Zero(lmi.problem.variable_count);
  write_variable(lmi.variable("G"), g, x);
  for (Index i = 0; i < sys.subsystem_count(); ++i) {
    const std::string s = std::to_string(i);
    write_variable(lmi.variable("S^" + s), cand.terminal[sz(i)].inverse(), x);
    write_variable(lmi.variable("Y^" + s), cand.feedback[sz(i)] * g, x);
    const MatrixXd& w = cand.coupling[sz(i)];
    const Index k = w.rows() / g.rows();
    MatrixXd gn = MatrixXd::Zero(w.rows(), w.cols());
    for (Index a = 0; a < k; ++a) gn.block(a * g.rows(), a * g.rows(), g.rows(), g.rows()) = g;
    write_variable(lmi.variable("Wt^" + s), gn.transpose() * w * gn, x);
    write_variable(lmi.variable("mu^" + s), MatrixXd::Constant(1, 1, mu), x);
  }
  write_variable(lmi.variable("delta"), MatrixXd::Constant(1, 1, delta), x);
  return x;
}

}  // namespace pcdm
