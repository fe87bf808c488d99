// Command-line front end: solve, simulate, bench, gen, terminal.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "pcdm/benchmark.hpp"
#include "pcdm/box_qp.hpp"
#include "pcdm/errors.hpp"
#include "pcdm/json_io.hpp"
#include "pcdm/mpc_controller.hpp"
#include "pcdm/quadtank.hpp"
#include "pcdm/random_network.hpp"
#include "pcdm/sdpa.hpp"
#include "pcdm/terminal_cost.hpp"

namespace {

using namespace pcdm;
using io::json;

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  for (std::string tok; std::getline(ss, tok, ',');) {
    if (tok.empty()) continue;
    size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used != tok.size()) throw InputError("bad integer list entry '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> parse_word_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string tok; std::getline(ss, tok, ',');)
    if (!tok.empty()) out.push_back(tok);
  return out;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// "results.csv" -> "results.json"
std::string json_sibling(const std::string& path) {
  if (ends_with(path, ".csv")) return path.substr(0, path.size() - 4) + ".json";
  return path + ".json";
}

struct SolveArgs {
  std::string qp_path;
  std::string out;
  double tol = 1e-3;
  int max_iter = 1000;
  bool budget_only = false;
  std::optional<double> fstar;
  bool fstar_auto = false;
  std::string algo = "pcdm";
  int workers = 1;
  bool history = false;
};

int run_solve(const SolveArgs& a) {
  const io::QpDocument doc = io::qp_from_json(io::read_json_file(a.qp_path));
  const QuadraticOracle oracle = doc.state ? QuadraticOracle(doc.qp, *doc.state) : QuadraticOracle(doc.qp);
  SolverConfig sc;
  sc.max_iterations = a.max_iter;
  sc.tolerance = a.tol;
  sc.worker_count = a.workers;
  sc.record_history = a.history;
  std::optional<double> fstar = a.fstar;
  if (a.fstar_auto) fstar = reference_optimum(doc.qp, doc.state).value;
  sc.reference_value = fstar;
  if (a.budget_only) sc.stopping_mode = StoppingMode::iteration_budget;
  else if (fstar) sc.stopping_mode = StoppingMode::gap_to_reference;
  else sc.stopping_mode = StoppingMode::iterate_change;

  const VectorXd u0 = doc.qp.project(VectorXd::Zero(doc.qp.dim()));
  SolveReport rep;
  if (a.algo == "pcdm") rep = solve(oracle, doc.qp.boxes(), u0, sc);
  else if (a.algo == "pg") rep = projected_gradient_solve(oracle, u0, sc);
  else if (a.algo == "jacobi") rep = jacobi_block_solve(oracle, u0, sc);
  else throw ConfigError("unknown algorithm '" + a.algo + "'");

  json j = io::report_to_json(rep, a.algo);
  j["stopping_mode"] = std::string(to_string(sc.stopping_mode));
  if (fstar) {
    j["f_star"] = *fstar;
    j["gap"] = rep.final_objective - *fstar;
  }
  io::write_text_file(a.out, j.dump(2));
  std::cout << a.algo << ": " << rep.iterations_used << " iterations, f = " << rep.final_objective << '\n';
  return 0;
}

struct SimulateArgs {
  std::string sys_path, mpc_path, x0_path, out;
  int steps = 50;
  int budget = 39;
  int workers = 1;
};

int run_simulate(const SimulateArgs& a) {
  const NetworkSystem sys = io::system_from_json(io::section(io::read_json_file(a.sys_path), "system"));
  const io::MpcDocument mpc_doc = io::mpc_from_json(io::section(io::read_json_file(a.mpc_path), "mpc"));
  const VectorXd x0 = io::vector_from_json(io::section(io::read_json_file(a.x0_path), "x0"));
  const SuboptimalMpc mpc(sys, mpc_doc.config, a.workers);
  const ClosedLoopTrace trace = mpc.closed_loop(x0, a.steps, mpc.initial_state(a.budget, mpc_doc.terminal_feedback));
  std::ofstream out(a.out);
  if (!out) throw InputError("cannot write " + a.out);
  write_trace_csv(out, trace);
  std::cout << "steps " << a.steps << ", sum V_N = " << trace.total_value << ", ||x_final|| = " << trace.final_state.norm()
            << (trace.all_feasible ? "" : ", INFEASIBLE INPUT") << '\n';
  return trace.all_feasible ? 0 : 3;
}

struct BenchQuadArgs {
  std::string budgets = "7,30,240,1803,12244";
  int horizon = 20;
  int runs = 10;
  int steps = 50;
  std::uint64_t seed = 1;
  int workers = 1;
  std::string out;
};

int run_bench_quadtank(const BenchQuadArgs& a) {
  QuadtankBenchOptions o;
  o.budgets = parse_int_list(a.budgets);
  o.horizon = a.horizon;
  o.runs = a.runs;
  o.steps = a.steps;
  o.seed = a.seed;
  o.workers = a.workers;
  const QuadtankBenchResult res = run_quadtank_benchmark(o);
  std::ofstream out(a.out);
  if (!out) throw InputError("cannot write " + a.out);
  write_csv(out, res);
  io::write_text_file(json_sibling(a.out), to_json(res));
  for (const auto& [b, loss] : res.median_loss) std::cout << "budget " << b << ": median loss " << loss << " %\n";
  return 0;
}

struct BenchRandomArgs {
  Index subsystems = 8, state_dim = 5, input_dim = 5;
  int horizon = 12, seeds = 10, max_iter = 2000000, workers = 1;
  std::uint64_t first_seed = 1;
  double tol = 1e-3;
  std::string algos = "pcdm,jacobi,pg";
  std::string out;
};

int run_bench_random(const BenchRandomArgs& a) {
  RandomBenchOptions o;
  o.subsystems = a.subsystems;
  o.state_dim = a.state_dim;
  o.input_dim = a.input_dim;
  o.horizon = a.horizon;
  o.seeds = a.seeds;
  o.first_seed = a.first_seed;
  o.tolerance = a.tol;
  o.algos = parse_word_list(a.algos);
  o.max_iterations = a.max_iter;
  o.workers = a.workers;
  const RandomBenchResult res = run_random_benchmark(o);
  std::ofstream out(a.out);
  if (!out) throw InputError("cannot write " + a.out);
  write_csv(out, res);
  io::write_text_file(json_sibling(a.out), to_json(res));
  int failures = 0;
  for (const auto& r : res.rows) {
    std::cout << "seed " << r.seed << ' ' << r.algo << ": " << r.iterations << " iterations, gap " << r.gap
              << (r.converged ? "" : " (not converged)") << '\n';
    failures += r.converged ? 0 : 1;
  }
  return failures ? 3 : 0;
}

struct GenArgs {
  std::uint64_t seed = 1;
  Index subsystems = 8, state_dim = 5, input_dim = 5;
  int horizon = 12;
  std::string out;
};

int run_gen(const std::string& kind, const GenArgs& a) {
  json doc;
  if (kind == "quadtank") {
    const QuadTankProblem prob = quadtank_system(QuadTankParams{}, 5.0, a.horizon);
    VectorXd x0(4);
    QuadTankParams p;
    for (int k = 0; k < 4; ++k) x0[k] = 0.2 * p.level[static_cast<size_t>(k)];
    doc["system"] = io::system_to_json(prob.system);
    doc["mpc"] = io::mpc_to_json(prob.config, prob.terminal_feedback);
    doc["x0"] = io::vector_to_json(quadtank_to_partitioned(x0));
    doc["terminal_certified"] = prob.terminal_certified;
  } else {
    RandomNetSpec spec;
    spec.seed = a.seed;
    spec.subsystems = a.subsystems;
    spec.state_dim = a.state_dim;
    spec.input_dim = a.input_dim;
    spec.horizon = a.horizon;
    const RandomNetwork net = random_network(spec);
    doc["system"] = io::system_to_json(net.system);
    doc["mpc"] = io::mpc_to_json(net.config, net.terminal_feedback);
    doc["x0"] = io::vector_to_json(net.initial_state);
    doc["terminal_certified"] = net.terminal_certified;
  }
  io::write_text_file(a.out, doc.dump(2));
  return 0;
}

struct TerminalArgs {
  std::string sys_path, mpc_path, out, sdpa_out, candidate_path;
};

int run_terminal(const TerminalArgs& a) {
  const NetworkSystem sys = io::system_from_json(io::section(io::read_json_file(a.sys_path), "system"));
  const io::MpcDocument mpc_doc = io::mpc_from_json(io::section(io::read_json_file(a.mpc_path), "mpc"));
  const StageWeights costs = StageWeights::from_config(mpc_doc.config);
  json report;
  std::optional<TerminalCandidate> cand;
  if (!a.candidate_path.empty()) {
    cand = io::candidate_from_json(io::read_json_file(a.candidate_path));
  } else {
    SynthesisResult syn = synth_fallback(sys, costs);
    report["synthesis"] = {{"message", syn.message}, {"scale", syn.scale}};
    cand = syn.candidate;
  }
  if (cand) {
    const GlobalCertificate cert = verify_global(sys, *cand, costs);
    report["candidate"] = io::candidate_to_json(*cand);
    report["verify_global"] = {{"pass", cert.pass},
                               {"locals_pass", cert.locals_pass},
                               {"coupling_max_eigenvalue", cert.coupling.max_eigenvalue},
                               {"lyapunov_max_eigenvalue", cert.lyapunov.max_eigenvalue}};
    const StabilityRegion reg = estimate_region(sys, *cand, mpc_doc.config.input_boxes, costs);
    report["region"] = {{"alpha", reg.alpha}, {"d", reg.d}, {"method", reg.method}, {"empty", reg.empty},
                        {"message", reg.message}};
  }
  if (!a.sdpa_out.empty()) io::write_text_file(a.sdpa_out, write_sdpa(export_sdpa(sys, costs).problem));
  io::write_text_file(a.out, report.dump(2));
  return cand ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parallel coordinate descent for box-constrained QPs and distributed MPC"};
  app.require_subcommand(1);

  SolveArgs solve_args;
  auto* solve_cmd = app.add_subcommand("solve", "Solve a box-constrained QP from JSON");
  solve_cmd->add_option("--qp", solve_args.qp_path, "QP JSON file")->required()->check(CLI::ExistingFile);
  solve_cmd->add_option("--tol", solve_args.tol, "Stopping tolerance")->check(CLI::NonNegativeNumber);
  solve_cmd->add_option("--max-iter", solve_args.max_iter, "Iteration limit")->check(CLI::NonNegativeNumber);
  solve_cmd->add_flag("--budget-only", solve_args.budget_only, "Run exactly --max-iter iterations");
  solve_cmd->add_option("--fstar", solve_args.fstar, "Reference optimal value; enables gap stopping");
  solve_cmd->add_flag("--fstar-auto", solve_args.fstar_auto, "Compute f* with the active-set solver");
  solve_cmd->add_option("--algo", solve_args.algo, "pcdm | pg | jacobi")->check(CLI::IsMember({"pcdm", "pg", "jacobi"}));
  solve_cmd->add_option("--workers", solve_args.workers, "Threads for block updates")->check(CLI::PositiveNumber);
  solve_cmd->add_flag("--history", solve_args.history, "Include objective history in the report");
  solve_cmd->add_option("--out", solve_args.out, "Report JSON")->required();

  SimulateArgs sim_args;
  auto* sim_cmd = app.add_subcommand("simulate", "Closed-loop suboptimal MPC on the linear model");
  sim_cmd->add_option("--sys", sim_args.sys_path, "System JSON")->required()->check(CLI::ExistingFile);
  sim_cmd->add_option("--mpc", sim_args.mpc_path, "MPC config JSON")->required()->check(CLI::ExistingFile);
  sim_cmd->add_option("--x0", sim_args.x0_path, "Initial state JSON")->required()->check(CLI::ExistingFile);
  sim_cmd->add_option("--steps", sim_args.steps, "Closed-loop steps")->check(CLI::NonNegativeNumber);
  sim_cmd->add_option("--budget", sim_args.budget, "PCDM iterations per step")->check(CLI::NonNegativeNumber);
  sim_cmd->add_option("--workers", sim_args.workers)->check(CLI::PositiveNumber);
  sim_cmd->add_option("--out", sim_args.out, "Trace CSV")->required();

  auto* bench_cmd = app.add_subcommand("bench", "Benchmarks");
  bench_cmd->require_subcommand(1);
  BenchQuadArgs bq;
  auto* bq_cmd = bench_cmd->add_subcommand("quadtank", "Performance loss versus iteration budget");
  bq_cmd->add_option("--budget-list", bq.budgets, "Comma-separated budgets");
  bq_cmd->add_option("--horizon", bq.horizon)->check(CLI::PositiveNumber);
  bq_cmd->add_option("--runs", bq.runs)->check(CLI::PositiveNumber);
  bq_cmd->add_option("--steps", bq.steps)->check(CLI::PositiveNumber);
  bq_cmd->add_option("--seed", bq.seed);
  bq_cmd->add_option("--workers", bq.workers)->check(CLI::PositiveNumber);
  bq_cmd->add_option("--out", bq.out, "Results CSV (JSON written alongside)")->required();
  BenchRandomArgs br;
  auto* br_cmd = bench_cmd->add_subcommand("random", "Iterations to a target gap on random ring networks");
  br_cmd->add_option("--M", br.subsystems)->check(CLI::Range(3, 1 << 20));
  br_cmd->add_option("--ni", br.state_dim)->check(CLI::PositiveNumber);
  br_cmd->add_option("--mi", br.input_dim)->check(CLI::PositiveNumber);
  br_cmd->add_option("--N", br.horizon)->check(CLI::PositiveNumber);
  br_cmd->add_option("--seeds", br.seeds)->check(CLI::PositiveNumber);
  br_cmd->add_option("--first-seed", br.first_seed);
  br_cmd->add_option("--tol", br.tol)->check(CLI::PositiveNumber);
  br_cmd->add_option("--algos", br.algos, "Comma-separated: pcdm,jacobi,pg");
  br_cmd->add_option("--max-iter", br.max_iter)->check(CLI::PositiveNumber);
  br_cmd->add_option("--workers", br.workers)->check(CLI::PositiveNumber);
  br_cmd->add_option("--out", br.out, "Results CSV (JSON written alongside)")->required();

  GenArgs gen_args;
  std::string gen_kind;
  auto* gen_cmd = app.add_subcommand("gen", "Write a system, MPC config and x0 as one JSON file");
  gen_cmd->add_option("kind", gen_kind, "quadtank | random")->required()->check(CLI::IsMember({"quadtank", "random"}));
  gen_cmd->add_option("--seed", gen_args.seed);
  gen_cmd->add_option("--M", gen_args.subsystems)->check(CLI::Range(3, 1 << 20));
  gen_cmd->add_option("--ni", gen_args.state_dim)->check(CLI::PositiveNumber);
  gen_cmd->add_option("--mi", gen_args.input_dim)->check(CLI::PositiveNumber);
  gen_cmd->add_option("--N", gen_args.horizon)->check(CLI::PositiveNumber);
  gen_cmd->add_option("--out", gen_args.out)->required();

  TerminalArgs term_args;
  auto* term_cmd = app.add_subcommand("terminal", "Synthesize or verify terminal ingredients; export the SDP");
  term_cmd->add_option("--sys", term_args.sys_path)->required()->check(CLI::ExistingFile);
  term_cmd->add_option("--mpc", term_args.mpc_path)->required()->check(CLI::ExistingFile);
  term_cmd->add_option("--candidate", term_args.candidate_path, "Candidate JSON to verify")->check(CLI::ExistingFile);
  term_cmd->add_option("--sdpa", term_args.sdpa_out, "Write the SDP in SDPA sparse format");
  term_cmd->add_option("--out", term_args.out, "Report JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve_cmd) return run_solve(solve_args);
    if (*sim_cmd) return run_simulate(sim_args);
    if (*bq_cmd) return run_bench_quadtank(bq);
    if (*br_cmd) return run_bench_random(br);
    if (*gen_cmd) return run_gen(gen_kind, gen_args);
    if (*term_cmd) return run_terminal(term_args);
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
