#include "pcdm/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ostream>
#include <random>

#include "json.hpp"

#include "pcdm/box_qp.hpp"
#include "pcdm/errors.hpp"
#include "pcdm/mpc_controller.hpp"

namespace pcdm {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

double median(std::vector<double> values) {
  if (values.empty()) throw InputError("median of an empty set");
  std::sort(values.begin(), values.end());
  const size_t k = values.size() / 2;
  return values.size() % 2 ? values[k] : 0.5 * (values[k - 1] + values[k]);
}

VectorXd quadtank_initial_state(const QuadTankParams& p, double deviation, std::uint64_t seed, int run) {
  std::mt19937_64 rng(seed * 1000003ULL + static_cast<std::uint64_t>(run));
  std::uniform_real_distribution<double> mag(0.5, 1.0);
  std::bernoulli_distribution sign(0.5);
  VectorXd tanks(4);
  for (int k = 0; k < 4; ++k) tanks[k] = (sign(rng) ? 1.0 : -1.0) * mag(rng) * deviation * p.level[static_cast<size_t>(k)];
  return quadtank_to_partitioned(tanks);
}

QuadtankBenchResult run_quadtank_benchmark(const QuadtankBenchOptions& opts) {
  if (opts.runs < 1 || opts.steps < 1 || opts.budgets.empty()) throw ConfigError("quadtank benchmark: empty run set");
  const QuadTankProblem prob = quadtank_system(opts.params, 5.0, opts.horizon);
  const SuboptimalMpc mpc(prob.system, prob.config, opts.workers);
  const BlockedQP& qp = mpc.condensed().qp;

  QuadtankBenchResult res;
  std::map<int, std::vector<double>> losses;
  for (int run = 0; run < opts.runs; ++run) {
    const VectorXd x0 = quadtank_initial_state(opts.params, opts.deviation, opts.seed, run);
    for (int budget : opts.budgets) {
      const ClosedLoopTrace trace = mpc.closed_loop(x0, opts.steps, mpc.initial_state(budget, prob.terminal_feedback));
      QuadtankBenchRow row;
      row.run = run;
      row.budget = budget;
      row.steps = opts.steps;
      row.total_value = trace.total_value;
      row.feasible = trace.all_feasible;
      for (const auto& rec : trace.records) {
        const BoxQPResult opt = reference_optimum(qp, rec.state);
        row.reference_ok = row.reference_ok && opt.converged;
        row.optimal_total += opt.value + mpc.condensed().constant(rec.state);
      }
      row.loss_percent = row.optimal_total > 0.0 ? 100.0 * (row.total_value - row.optimal_total) / row.optimal_total : 0.0;
      losses[budget].push_back(row.loss_percent);
      res.rows.push_back(row);
    }
  }
  for (const auto& [budget, v] : losses) res.median_loss[budget] = median(v);
  return res;
}

RandomBenchResult run_random_benchmark(const RandomBenchOptions& opts) {
  if (opts.seeds < 1) throw ConfigError("random benchmark: need at least one seed");
  RandomBenchResult res;
  for (int s = 0; s < opts.seeds; ++s) {
    RandomNetSpec spec;
    spec.subsystems = opts.subsystems;
    spec.state_dim = opts.state_dim;
    spec.input_dim = opts.input_dim;
    spec.horizon = opts.horizon;
    spec.seed = opts.first_seed + static_cast<std::uint64_t>(s);
    const RandomNetwork net = random_network(spec);
    const CondensedMPC cond = condense(net.system, net.config);
    const QuadraticOracle oracle(cond.qp, net.initial_state);
    const BoxQPResult ref = reference_optimum(cond.qp, net.initial_state);
    const VectorXd u0 = cond.qp.project(VectorXd::Zero(cond.qp.dim()));

    for (const std::string& algo : opts.algos) {
      RandomBenchRow row;
      row.seed = spec.seed;
      row.algo = algo;
      row.variables = cond.qp.dim();
      row.reference = ref.value;
      row.reference_ok = ref.converged;
      SolverConfig sc;
      sc.stopping_mode = StoppingMode::gap_to_reference;
      sc.reference_value = ref.value;
      sc.tolerance = opts.tolerance;
      sc.max_iterations = opts.max_iterations;
      sc.worker_count = opts.workers;
      const auto t0 = std::chrono::steady_clock::now();
      SolveReport rep;
      if (algo == "pcdm") rep = solve(oracle, cond.qp.boxes(), u0, sc);
      else if (algo == "jacobi") rep = jacobi_block_solve(oracle, u0, sc);
      else if (algo == "pg") rep = projected_gradient_solve(oracle, u0, sc);
      else throw ConfigError("random benchmark: unknown algorithm '" + algo + "'");
      row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      row.iterations = rep.iterations_used;
      row.final_objective = rep.final_objective;
      row.gap = rep.final_objective - ref.value;
      row.converged = rep.status == SolveStatus::converged;
      res.rows.push_back(row);
    }
  }
  return res;
}

void write_csv(std::ostream& os, const QuadtankBenchResult& res) {
  os << "run,budget,steps,total_VN,optimal_total_VN,loss_percent,feasible,reference_ok\n";
  for (const auto& r : res.rows) {
    os << r.run << ',' << r.budget << ',' << r.steps << ',' << num(r.total_value) << ',' << num(r.optimal_total) << ','
       << num(r.loss_percent) << ',' << (r.feasible ? 1 : 0) << ',' << (r.reference_ok ? 1 : 0) << '\n';
  }
}

void write_csv(std::ostream& os, const RandomBenchResult& res) {
  os << "seed,algo,p,iterations,final_objective,f_star,gap,converged,reference_ok,seconds\n";
  for (const auto& r : res.rows) {
    os << r.seed << ',' << r.algo << ',' << r.variables << ',' << r.iterations << ',' << num(r.final_objective) << ','
       << num(r.reference) << ',' << num(r.gap) << ',' << (r.converged ? 1 : 0) << ',' << (r.reference_ok ? 1 : 0) << ','
       << num(r.seconds) << '\n';
  }
}

std::string to_json(const QuadtankBenchResult& res) {
  nlohmann::json j;
  j["kind"] = "quadtank";
  j["rows"] = nlohmann::json::array();
  for (const auto& r : res.rows) {
    j["rows"].push_back({{"run", r.run}, {"budget", r.budget}, {"steps", r.steps}, {"total_VN", r.total_value},
                         {"optimal_total_VN", r.optimal_total}, {"loss_percent", r.loss_percent},
                         {"feasible", r.feasible}, {"reference_ok", r.reference_ok}});
  }
  nlohmann::json med = nlohmann::json::object();
  for (const auto& [b, v] : res.median_loss) med[std::to_string(b)] = v;
  j["median_loss_percent"] = med;
  return j.dump(2);
}

std::string to_json(const RandomBenchResult& res) {
  nlohmann::json j;
  j["kind"] = "random";
  j["rows"] = nlohmann::json::array();
  for (const auto& r : res.rows) {
    j["rows"].push_back({{"seed", r.seed}, {"algo", r.algo}, {"p", r.variables}, {"iterations", r.iterations},
                         {"final_objective", r.final_objective}, {"f_star", r.reference}, {"gap", r.gap},
                         {"converged", r.converged}, {"reference_ok", r.reference_ok}, {"seconds", r.seconds}});
  }
  return j.dump(2);
}

}  // namespace pcdm
