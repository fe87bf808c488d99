#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "pcdm/quadtank.hpp"
#include "pcdm/random_network.hpp"

namespace pcdm {

struct QuadtankBenchOptions {
  std::vector<int> budgets{7, 30, 240, 1803, 12244};
  int horizon = 20;
  int runs = 10;
  int steps = 50;
  double deviation = 0.2;  ///< initial level deviation as a fraction of h^0
  std::uint64_t seed = 1;
  int workers = 1;
  QuadTankParams params;
};

struct QuadtankBenchRow {
  int run = 0;
  int budget = 0;
  int steps = 0;
  double total_value = 0.0;    ///< sum_t V_N(x_t, u^CD_t)
  double optimal_total = 0.0;  ///< sum_t V_N*(x_t) at the same states
  double loss_percent = 0.0;
  bool feasible = true;
  bool reference_ok = true;
};

struct QuadtankBenchResult {
  std::vector<QuadtankBenchRow> rows;
  std::map<int, double> median_loss;  ///< by budget
};

/// Initial deviations x0 for run r: +-U(0.5, 1) * deviation * h^0 per tank,
/// in partitioned state order.
VectorXd quadtank_initial_state(const QuadTankParams& p, double deviation, std::uint64_t seed, int run);

/// Closed-loop suboptimal MPC for each (run, budget); loss is measured against
/// the exact optimum V_N* at the visited states.
QuadtankBenchResult run_quadtank_benchmark(const QuadtankBenchOptions& opts);

struct RandomBenchOptions {
  Index subsystems = 8;
  Index state_dim = 5;
  Index input_dim = 5;
  int horizon = 12;
  int seeds = 10;
  std::uint64_t first_seed = 1;
  double tolerance = 1e-3;
  std::vector<std::string> algos{"pcdm", "jacobi", "pg"};
  int max_iterations = 2000000;
  int workers = 1;
};

struct RandomBenchRow {
  std::uint64_t seed = 0;
  std::string algo;
  Index variables = 0;
  int iterations = 0;
  double final_objective = 0.0;
  double reference = 0.0;  ///< f*
  double gap = 0.0;
  bool converged = false;
  bool reference_ok = true;
  double seconds = 0.0;
};

struct RandomBenchResult {
  std::vector<RandomBenchRow> rows;
};

/// Solves the condensed MPC QP of each random ring network at its random
/// initial state until f(u_k) - f* <= tolerance, starting from the projected
/// zero trajectory.
RandomBenchResult run_random_benchmark(const RandomBenchOptions& opts);

double median(std::vector<double> values);

void write_csv(std::ostream& os, const QuadtankBenchResult& res);
void write_csv(std::ostream& os, const RandomBenchResult& res);
std::string to_json(const QuadtankBenchResult& res);
std::string to_json(const RandomBenchResult& res);

}  // namespace pcdm
