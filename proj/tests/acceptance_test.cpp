// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include "pcdm/benchmark.hpp"
#include "pcdm/box_qp.hpp"
#include "pcdm/mpc_condenser.hpp"
#include "pcdm/mpc_controller.hpp"
#include "pcdm/pcdm_solver.hpp"
#include "pcdm/quadtank.hpp"
#include "pcdm/sdpa.hpp"
#include "pcdm/terminal_cost.hpp"
#include "test_support.hpp"

namespace pcdm {
namespace {

using test::Rng;
using test::Coupling;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double sym_min_eig(const MatrixXd& m) { return Eigen::SelfAdjointEigenSolver<MatrixXd>(0.5 * (m + m.transpose())).eigenvalues()[0]; }
double sym_max_eig(const MatrixXd& m) {
  const VectorXd ev = Eigen::SelfAdjointEigenSolver<MatrixXd>(0.5 * (m + m.transpose())).eigenvalues();
  return ev[ev.size() - 1];
}
double norm2(const MatrixXd& m) { return m.size() ? Eigen::JacobiSVD<MatrixXd>(m).singularValues()[0] : 0.0; }

// Block Lipschitz constants computed in the test from the dense Hessian.
std::vector<double> oracle_lipschitz(const test::DenseBoxQP& d) {
  const BlockPartition p = d.partition();
  std::vector<double> l;
  for (Index i = 0; i < p.block_count(); ++i)
    l.push_back(sym_max_eig(d.q.block(p.offset(i), p.offset(i), p.size(i), p.size(i))));
  return l;
}

// ---------------------------------------------------------------------------

// Along one PCDM step d = u+ - u the objective changes by g'd + d'Qd/2, and
// convexity of the block model gives at least (1/2M) sum L_i ||v_i - u_i||^2
// of decrease. A step whose guaranteed decrease is below rounding is a
// numeric fixed point.
Outcome descent_and_feasibility() {
  const auto t0 = Clock::now();
  Rng rng(1001);
  int violations = 0, infeasible = 0, steps = 0, fixed_points = 0;
  for (int inst = 0; inst < 100; ++inst) {
    const test::DenseBoxQP d = test::random_box_qp(rng, {.min_blocks = 2, .max_blocks = 16, .max_dim = 400});
    const BlockedQP qp = d.blocked();
    const QuadraticOracle oracle(qp);
    const BlockPartition p = d.partition();
    const std::vector<double> l = oracle_lipschitz(d);
    const double m = static_cast<double>(p.block_count());
    const double qn = norm2(d.q);
    VectorXd u = qp.project(test::random_vector(rng, qp.dim(), 2.0));
    for (int k = 0; k < 300; ++k) {
      const std::vector<VectorXd> vbar = prox_points(oracle, qp.boxes(), u);
      const VectorXd next = pcdm_iterate(oracle, qp.boxes(), u);
      ++steps;
      if (!((next.array() >= d.lo.array()).all() && (next.array() <= d.hi.array()).all())) ++infeasible;
      double guaranteed = 0.0;
      for (Index i = 0; i < p.block_count(); ++i)
        guaranteed += l[static_cast<size_t>(i)] * (vbar[static_cast<size_t>(i)] - p.block(u, i)).squaredNorm();
      guaranteed /= 2.0 * m;
      const VectorXd g = d.q * u + d.c;
      const VectorXd dir = next - u;
      const double change = g.dot(dir) + 0.5 * dir.dot(d.q * dir);
      const double rounding = 1e-12 * (g.norm() * dir.norm() + qn * dir.squaredNorm());
      if (guaranteed <= rounding) {
        ++fixed_points;
        break;
      }
      if (!(change < 0.0) || change > -guaranteed + rounding) ++violations;
      u = next;
    }
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = violations == 0 && infeasible == 0 && secs < 60.0;
  o.detail = fmt("100 instances, %d steps, %d numeric fixed points reached, %d descent violations, %d infeasible iterates, %.1fs",
                 steps, fixed_points, violations, infeasible, secs);
  return o;
}

struct RateInstance {
  test::DenseBoxQP dense;
  double fstar = 0.0;
  VectorXd ustar;
  double kkt = 0.0;
  double sigma_lib = 0.0;
  double sigma_oracle = 0.0;
  std::vector<double> lipschitz;
  double lambda_min = 0.0;
  SolveReport report;
  VectorXd u0;
};

std::vector<RateInstance> rate_instances() {
  static std::vector<RateInstance> cache;
  if (!cache.empty()) return cache;
  Rng rng(2002);
  for (int inst = 0; inst < 50; ++inst) {
    RateInstance r;
    r.dense = test::random_box_qp(
        rng, {.min_blocks = 2, .max_blocks = 16, .max_block_size = 10, .max_dim = 100, .shift = rng.uniform(0.05, 0.5)});
    const BlockedQP qp = r.dense.blocked();
    const BoxQPResult ref = reference_optimum(qp);
    r.fstar = ref.value;
    r.ustar = ref.u;
    r.kkt = box_kkt_residual(r.dense.q, r.dense.c, r.dense.lo, r.dense.hi, ref.u);
    r.sigma_lib = sigma1(qp);
    r.lipschitz = oracle_lipschitz(r.dense);
    const BlockPartition p = r.dense.partition();
    VectorXd dinv(qp.dim());
    for (Index i = 0; i < p.block_count(); ++i)
      p.block(dinv, i).setConstant(1.0 / std::sqrt(r.lipschitz[static_cast<size_t>(i)]));
    r.sigma_oracle = sym_min_eig(dinv.asDiagonal() * r.dense.q * dinv.asDiagonal());
    r.lambda_min = sym_min_eig(r.dense.q);
    r.u0 = qp.project(test::random_vector(rng, qp.dim(), 2.0));
    SolverConfig cfg;
    cfg.max_iterations = 10000;
    cfg.stopping_mode = StoppingMode::iteration_budget;
    cfg.reference_value = ref.value;
    cfg.reference_point = ref.u;
    cfg.sigma1 = r.sigma_lib;
    cfg.record_history = true;
    r.report = solve(QuadraticOracle(qp), qp.boxes(), r.u0, cfg);
    cache.push_back(std::move(r));
  }
  return cache;
}

// Bounds recomputed here from the gap history, with r0 and the L_i of the test.
struct BoundCheck {
  int violations = 0;
  double worst_ratio = 0.0;  ///< max gap / bound over k with bound > 0
};

BoundCheck check_bound(const RateInstance& r, const std::function<double(long, double)>& bound) {
  const BlockPartition p = r.dense.partition();
  double r0sq = 0.0;
  for (Index i = 0; i < p.block_count(); ++i)
    r0sq += r.lipschitz[static_cast<size_t>(i)] * (p.block(r.u0, i) - p.block(r.ustar, i)).squaredNorm();
  const double gap0 = test::dense_objective(r.dense.q, r.dense.c, r.u0) - r.fstar;
  const double c0 = 0.5 * r0sq + gap0;
  const double slack = 1e-11 * (1.0 + std::abs(r.fstar));
  BoundCheck out;
  for (size_t k = 0; k < r.report.gap_history.size(); ++k) {
    const double b = bound(static_cast<long>(k), c0);
    const double gap = r.report.gap_history[k];
    if (gap > b + slack) ++out.violations;
    if (b > 1e-9) out.worst_ratio = std::max(out.worst_ratio, gap / b);
  }
  return out;
}

Outcome sublinear_certificate() {
  const auto inst = rate_instances();
  int violations = 0, lib_violations = 0, bad_kkt = 0, short_runs = 0;
  double worst_kkt = 0.0, worst_ratio = 0.0;
  for (const auto& r : inst) {
    const double m = static_cast<double>(r.dense.sizes.size());
    const BoundCheck c = check_bound(r, [m](long k, double c0) { return m / (m + static_cast<double>(k)) * c0; });
    violations += c.violations;
    worst_ratio = std::max(worst_ratio, c.worst_ratio);
    lib_violations += r.report.sublinear_violations;
    worst_kkt = std::max(worst_kkt, r.kkt);
    if (r.kkt > 1e-10) ++bad_kkt;
    if (r.report.gap_history.size() != 10001) ++short_runs;
  }
  Outcome o;
  o.pass = violations == 0 && lib_violations == 0 && bad_kkt == 0 && short_runs == 0;
  o.detail = fmt("50 instances x 10^4 iterations, %d violations (solver count %d), max gap/bound %.3g, max oracle KKT %.2e",
                 violations, lib_violations, worst_ratio, worst_kkt);
  return o;
}

Outcome linear_certificate() {
  const auto inst = rate_instances();
  int violations = 0, lib_violations = 0, sigma_out = 0, sigma_mismatch = 0, relation_holds = 0, sandwich_fail = 0;
  double worst_ratio = 0.0, worst_relation = 0.0;
  for (const auto& r : inst) {
    const double m = static_cast<double>(r.dense.sizes.size());
    const double s = r.sigma_lib;
    if (!(s > 0.0 && s <= 1.0)) {
      ++sigma_out;
      continue;
    }
    if (std::abs(s - std::min(r.sigma_oracle, 1.0)) > 1e-10) ++sigma_mismatch;
    const BoundCheck c = check_bound(r, [m, s](long k, double c0) {
      return std::pow(1.0 - 2.0 * s / (m * (1.0 + s)), static_cast<double>(k)) * c0;
    });
    violations += c.violations;
    worst_ratio = std::max(worst_ratio, c.worst_ratio);
    lib_violations += r.report.linear_violations;
    const double lmax = *std::max_element(r.lipschitz.begin(), r.lipschitz.end());
    const double lmin = *std::min_element(r.lipschitz.begin(), r.lipschitz.end());
    const double tol = 1e-12 * lmax;
    if (r.lambda_min >= s * lmax - tol) ++relation_holds;
    worst_relation = std::max(worst_relation, s * lmax / r.lambda_min);
    // What does hold for this sigma1: sigma1 min L <= lambda_min(Q) <= sigma1 max L.
    if (!(s * lmin <= r.lambda_min + tol && r.lambda_min <= s * lmax + tol)) ++sandwich_fail;
  }
  Outcome o;
  o.pass = violations == 0 && lib_violations == 0 && sigma_out == 0 && sigma_mismatch == 0 && relation_holds == 50;
  o.detail = fmt("%d violations (solver count %d), max gap/bound %.3g; sigma1 in (0,1] on %d/50, matches oracle on %d/50; "
                 "lambda_min(Q) >= sigma1*max L_i on %d/50 (worst sigma1*max L / lambda_min = %.3g); "
                 "sigma1*min L <= lambda_min(Q) <= sigma1*max L on %d/50",
                 violations, lib_violations, worst_ratio, 50 - sigma_out, 50 - sigma_out - sigma_mismatch, relation_holds,
                 worst_relation, 50 - sandwich_fail);
  return o;
}

Outcome single_block_reduction() {
  Rng rng(3003);
  double worst = 0.0;
  int mismatched = 0;
  for (int inst = 0; inst < 20; ++inst) {
    const test::DenseBoxQP d = test::random_box_qp(rng, {.min_blocks = 1, .max_blocks = 1, .max_block_size = 80, .max_dim = 80});
    const BlockedQP qp = d.blocked();
    const QuadraticOracle oracle(qp);
    SolverConfig cfg;
    cfg.max_iterations = 300;
    cfg.record_iterates = true;
    const VectorXd u0 = qp.project(test::random_vector(rng, qp.dim(), 2.0));
    const SolveReport a = solve(oracle, qp.boxes(), u0, cfg);
    const SolveReport b = projected_gradient_solve(oracle, u0, cfg);
    if (a.iterate_history.size() != b.iterate_history.size()) {
      ++mismatched;
      continue;
    }
    for (size_t k = 0; k < a.iterate_history.size(); ++k)
      worst = std::max(worst, (a.iterate_history[k] - b.iterate_history[k]).cwiseAbs().maxCoeff());
  }
  Outcome o;
  o.pass = mismatched == 0 && worst <= 1e-12;
  o.detail = fmt("20 instances x 300 iterations, max |u_pcdm - u_pg| = %.2e", worst);
  return o;
}

Outcome condensation_oracle() {
  Rng rng(4004);
  int pairs = 0, failures = 0;
  double worst = 0.0;
  for (int s = 0; s < 20; ++s) {
    const Coupling kind = s < 10 ? Coupling::states_and_inputs : Coupling::inputs_only;
    const NetworkSystem sys = test::random_ring(rng, {.coupling = kind});
    const MPCConfig cfg = test::random_mpc(rng, sys, rng.integer(1, 8), s % 2 == 0);
    const CondensedMPC c = condense(sys, cfg);
    for (int k = 0; k < 5; ++k) {
      const VectorXd x = test::random_vector(rng, sys.state_dim(), 2.0);
      const VectorXd u = test::random_vector(rng, c.qp.dim());
      const double vn = test::dense_vn(sys, cfg, x, u);
      const double err = std::abs(eval_objective(c.qp, u, x) + c.constant(x) - vn) / (1.0 + vn);
      worst = std::max(worst, err);
      if (err > 1e-9) ++failures;
      ++pairs;
    }
  }
  Outcome o;
  o.pass = failures == 0 && pairs == 100;
  o.detail = fmt("%d pairs on 20 systems (10 coupled-state, 10 input-coupled), max relative error %.2e", pairs, worst);
  return o;
}

Outcome sparsity_check() {
  Rng rng(5005);
  int checked = 0, bad = 0;
  for (int s = 0; s < 10; ++s) {
    const NetworkSystem sys = test::random_ring(rng, {.min_subsystems = 5, .max_subsystems = 10, .coupling = Coupling::inputs_only});
    const CondensedMPC c = condense(sys, test::random_mpc(rng, sys, rng.integer(2, 8), false));
    const Neighborhoods nb = sparsity_pattern(sys);
    auto absent = [](const MatrixXd* blk) { return blk == nullptr || (blk->array() == 0.0).all(); };
    auto in = [](const std::vector<Index>& v, Index x) { return std::find(v.begin(), v.end(), x) != v.end(); };
    for (Index i = 0; i < sys.subsystem_count(); ++i) {
      for (Index j = 0; j < sys.subsystem_count(); ++j) {
        if (!in(nb.two_hop[static_cast<size_t>(i)], j)) {
          ++checked;
          if (!absent(c.qp.hessian_block(i, j))) ++bad;
        }
        if (!in(nb.out[static_cast<size_t>(i)], j)) {
          ++checked;
          if (!absent(c.qp.linear_map_block(i, j))) ++bad;
        }
      }
    }
  }
  Outcome o;
  o.pass = bad == 0 && checked > 0;
  o.detail = fmt("10 input-coupled rings, %d out-of-neighbourhood blocks checked, %d present", checked, bad);
  return o;
}

Outcome gradient_locality() {
  Rng rng(7007);
  double worst = 0.0, scale = 0.0;
  int blocks = 0;
  for (int s = 0; s < 20; ++s) {
    const Coupling kind = s % 2 ? Coupling::inputs_only : Coupling::states_and_inputs;
    const NetworkSystem sys = test::random_ring(rng, {.coupling = kind});
    const MPCConfig cfg = test::random_mpc(rng, sys, rng.integer(1, 6), s % 3 == 0);
    const CondensedMPC c = condense(sys, cfg);
    const BlockPartition p = c.qp.partition();
    for (int k = 0; k < 5; ++k) {
      const VectorXd x = test::random_vector(rng, sys.state_dim());
      const VectorXd u = test::random_vector(rng, c.qp.dim());
      const VectorXd g = test::dense_vn_gradient(sys, cfg, x, u);
      scale = std::max(scale, g.cwiseAbs().maxCoeff());
      for (Index i = 0; i < p.block_count(); ++i) {
        worst = std::max(worst, (partial_gradient(c.qp, u, i, x) - p.block(g, i)).cwiseAbs().maxCoeff());
        ++blocks;
      }
    }
  }
  Outcome o;
  o.pass = worst <= 1e-12;
  o.detail = fmt("%d block gradients on 20 condensed systems vs dense prediction-matrix gradient, max abs diff %.2e (max |g| %.3g)",
                 blocks, worst, scale);
  return o;
}

Outcome terminal_soundness() {
  Rng rng(8008);
  int passing = 0, attempts = 0, counterexamples = 0, disagreements = 0;
  while (passing < 50 && attempts < 2000) {
    ++attempts;
    const NetworkSystem sys = test::random_ring(rng, {.max_state = 3, .coupling_scale = rng.uniform(0.01, 0.4)});
    const StageWeights costs = StageWeights::from_config(test::random_mpc(rng, sys, 1, false));
    const SynthesisResult syn = synth_fallback(sys, costs);
    if (!syn.candidate) continue;
    const TerminalCandidate& cand = *syn.candidate;
    bool locals = true;
    for (Index i = 0; i < sys.subsystem_count(); ++i) locals = locals && verify_local_mi(sys, i, cand, costs).pass;
    const MatrixXd w = assemble_coupling(sys, cand);
    if (!locals || sym_max_eig(w) > 1e-8 * (1.0 + norm2(w))) continue;
    ++passing;
    // Direct check written out on dense matrices.
    const MatrixXd p = cand.dense_terminal(sys), f = cand.dense_feedback(sys);
    MatrixXd q = MatrixXd::Zero(sys.state_dim(), sys.state_dim()), r = MatrixXd::Zero(sys.input_dim(), sys.input_dim());
    const BlockPartition sp = sys.state_partition(), ip = sys.input_partition();
    for (Index i = 0; i < sys.subsystem_count(); ++i) {
      q.block(sp.offset(i), sp.offset(i), sp.size(i), sp.size(i)) = costs.state[static_cast<size_t>(i)];
      r.block(ip.offset(i), ip.offset(i), ip.size(i), ip.size(i)) = costs.input[static_cast<size_t>(i)];
    }
    const MatrixXd acl = sys.dense_a() + sys.dense_b() * f;
    const MatrixXd decay = acl.transpose() * p * acl;
    const MatrixXd rest = p - q - f.transpose() * r * f;
    const double tol = 1e-8 * (1.0 + norm2(decay) + norm2(rest));
    const bool direct = sym_max_eig(decay - rest) <= tol;
    if (!direct) ++counterexamples;
    if (direct != verify_global(sys, cand, costs).lyapunov.pass) ++disagreements;
  }
  Outcome o;
  o.pass = passing == 50 && counterexamples == 0 && disagreements == 0;
  o.detail = fmt("%d passing candidates from %d random rings, %d counterexamples, %d disagreements with verify_global",
                 passing, attempts, counterexamples, disagreements);
  return o;
}

Outcome sdpa_round_trip() {
  Rng rng(9009);
  int ok = 0, block_ok = 0;
  size_t entries = 0;
  for (int s = 0; s < 10; ++s) {
    const NetworkSystem sys = test::random_ring(rng, {.max_subsystems = 7, .max_state = 3, .equal_state_dims = true});
    const StageWeights costs = StageWeights::from_config(test::random_mpc(rng, sys, 1, false));
    const LmiExport lmi = export_sdpa(sys, costs);
    const SdpaProblem back = parse_sdpa(write_sdpa(lmi.problem));
    entries += lmi.problem.entries.size();
    if (back.variable_count == lmi.problem.variable_count && back.block_sizes == lmi.problem.block_sizes &&
        back.objective == lmi.problem.objective && back.entries == lmi.problem.entries)
      ++ok;
    if (back.block_sizes.size() == static_cast<size_t>(sys.subsystem_count() + 1)) ++block_ok;
  }
  Outcome o;
  o.pass = ok == 10 && block_ok == 10;
  o.detail = fmt("10 systems, %zu coefficient tuples, exact round trip on %d/10, nBLOCK = M+1 on %d/10", entries, ok, block_ok);
  return o;
}

Outcome quadtank_pipeline() {
  const auto t0 = Clock::now();
  const QuadTankParams p;
  const ContinuousModel lin = quadtank_linearize(p);
  const Eigen::Vector4d h0(p.level[0], p.level[1], p.level[2], p.level[3]);
  const Eigen::Vector2d g0(p.gamma_a, p.gamma_b);
  double jac_err = 0.0;
  for (int k = 0; k < 4; ++k) {
    const double step = 1e-6 * h0[k];
    Eigen::Vector4d up = h0, dn = h0;
    up[k] += step;
    dn[k] -= step;
    const Eigen::Vector4d col = (quadtank_nonlinear_rhs(p, up, g0).rate - quadtank_nonlinear_rhs(p, dn, g0).rate) / (2.0 * step);
    jac_err = std::max(jac_err, (col - lin.a.col(k)).cwiseAbs().maxCoeff());
  }
  for (int k = 0; k < 2; ++k) {
    Eigen::Vector2d up = g0, dn = g0;
    up[k] += 1e-4;
    dn[k] -= 1e-4;
    const Eigen::Vector4d col = (quadtank_nonlinear_rhs(p, h0, up).rate - quadtank_nonlinear_rhs(p, h0, dn).rate) / 2e-4;
    jac_err = std::max(jac_err, (col - lin.b.col(k)).cwiseAbs().maxCoeff());
  }
  const DiscreteModel dm = zoh_discretize(lin.a, lin.b, 5.0);
  const double rho = Eigen::EigenSolver<MatrixXd>(dm.a).eigenvalues().cwiseAbs().maxCoeff();

  const QuadTankProblem prob = quadtank_system(p, 5.0, 20);
  const SuboptimalMpc mpc(prob.system, prob.config);
  int reached = 0;
  std::string steps_needed;
  for (double sign : {1.0, -1.0}) {
    const VectorXd x0 = quadtank_to_partitioned(0.2 * sign * VectorXd(h0));
    const ClosedLoopTrace tr = mpc.closed_loop(x0, 200, mpc.initial_state(39, prob.terminal_feedback));
    int first = -1;
    for (const auto& rec : tr.records)
      if (rec.state.norm() < 1e-3 * x0.norm()) {
        first = rec.step;
        break;
      }
    if (first < 0 && tr.final_state.norm() < 1e-3 * x0.norm()) first = 200;
    if (first >= 0 && tr.all_feasible) ++reached;
    steps_needed += (steps_needed.empty() ? "" : "/") + std::to_string(first);
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = jac_err <= 1e-9 && rho < 1.0 && reached == 2 && secs < 120.0;
  o.detail = fmt("Jacobian FD error %.2e, rho(A_d) = %.6f, ||x_t|| < 1e-3 ||x0|| at step %s for x0 = +/-20%% levels, %.1fs",
                 jac_err, rho, steps_needed.c_str(), secs);
  return o;
}

Outcome table3_trend() {
  const auto t0 = Clock::now();
  const QuadtankBenchResult r = run_quadtank_benchmark(QuadtankBenchOptions{});
  bool decreasing = true;
  double prev = std::numeric_limits<double>::infinity();
  std::string medians;
  for (const auto& [budget, loss] : r.median_loss) {
    decreasing = decreasing && loss < prev;
    prev = loss;
    medians += fmt("%s%d:%.4g%%", medians.empty() ? "" : ", ", budget, loss);
  }
  bool refs = true, feasible = true;
  for (const auto& row : r.rows) {
    refs = refs && row.reference_ok;
    feasible = feasible && row.feasible;
  }
  Outcome o;
  o.pass = decreasing && prev < 0.1 && refs && feasible && r.median_loss.size() == 5;
  o.detail = fmt("median loss by budget {%s}, strictly decreasing: %s, references converged: %s, %.1fs", medians.c_str(),
                 decreasing ? "yes" : "no", refs ? "yes" : "no", seconds_since(t0));
  return o;
}

Outcome random_ring_protocol() {
  const auto t0 = Clock::now();
  RandomBenchOptions opts;
  opts.subsystems = 8;
  opts.state_dim = 5;
  opts.input_dim = 5;
  opts.horizon = 12;
  opts.seeds = 10;
  opts.tolerance = 1e-3;
  opts.algos = {"pcdm", "jacobi"};
  const RandomBenchResult r = run_random_benchmark(opts);
  std::map<std::uint64_t, std::map<std::string, double>> finals;
  int converged = 0, refs = 0;
  long iters_pcdm = 0, iters_jacobi = 0;
  for (const auto& row : r.rows) {
    finals[row.seed][row.algo] = row.final_objective;
    converged += row.converged ? 1 : 0;
    refs += row.reference_ok ? 1 : 0;
    (row.algo == "pcdm" ? iters_pcdm : iters_jacobi) += row.iterations;
  }
  double worst = 0.0;
  for (const auto& [seed, f] : finals) worst = std::max(worst, std::abs(f.at("pcdm") - f.at("jacobi")));
  Outcome o;
  o.pass = converged == 20 && refs == 20 && worst <= 0.002;
  o.detail = fmt("p = 480, %d/20 runs reached gap <= 1e-3, max |f_pcdm - f_jacobi| = %.2e, mean iterations pcdm %ld / jacobi %ld, %.1fs",
                 converged, worst, iters_pcdm / 10, iters_jacobi / 10, seconds_since(t0));
  return o;
}

}  // namespace
}  // namespace pcdm

int main() {
  using namespace pcdm;
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria{
      {"descent and feasibility", descent_and_feasibility},
      {"sublinear rate certificate", sublinear_certificate},
      {"linear rate certificate", linear_certificate},
      {"single-block reduction", single_block_reduction},
      {"condensation oracle", condensation_oracle},
      {"condensed sparsity", sparsity_check},
      {"gradient locality", gradient_locality},
      {"terminal-cost soundness", terminal_soundness},
      {"SDPA round trip", sdpa_round_trip},
      {"quadruple-tank pipeline", quadtank_pipeline},
      {"performance-loss trend", table3_trend},
      {"random ring protocol", random_ring_protocol},
  };
  int failed = 0;
  for (size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("[%s] %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<size_t>(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}
