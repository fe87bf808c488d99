#include "pcdm/random_network.hpp"

#include <cmath>
#include <random>
#include <set>

#include "pcdm/errors.hpp"
#include "pcdm/linalg.hpp"
#include "pcdm/terminal_cost.hpp"

namespace pcdm {

void RandomNetSpec::validate() const {
  if (subsystems < 3) throw ConfigError("RandomNetSpec: a ring needs at least 3 subsystems");
  if (state_dim < 1 || input_dim < 1 || horizon < 1) throw ConfigError("RandomNetSpec: dimensions must be positive");
  if (!(box_scale > 0.0) || !(state_scale >= 0.0)) throw ConfigError("RandomNetSpec: scales must be positive");
}

RandomNetwork random_network(const RandomNetSpec& spec) {
  spec.validate();
  const Index m = spec.subsystems;
  const Index n = spec.state_dim;
  const Index mu = spec.input_dim;
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.1, 1.0);
  auto gaussian = [&](Index r, Index c) {
    MatrixXd out(r, c);
    for (Index i = 0; i < r; ++i)
      for (Index j = 0; j < c; ++j) out(i, j) = normal(rng);
    return out;
  };

  RandomNetwork net;
  NetworkSystem& sys = net.system;
  sys.state_dims.assign(static_cast<size_t>(m), n);
  sys.input_dims.assign(static_cast<size_t>(m), mu);
  for (Index i = 0; i < m; ++i) {
    const std::set<Index> ring{(i + m - 1) % m, i, (i + 1) % m};
    for (Index j : ring) {
      sys.a_blocks[{i, j}] = gaussian(n, n);
      sys.b_blocks[{i, j}] = gaussian(n, mu);
    }
  }
  const double rho = linalg::spectral_radius(sys.dense_a());
  if (!(rho > 0.0)) throw ConfigError("random_network: sampled A has zero spectral radius");
  for (auto& [key, blk] : sys.a_blocks) blk /= rho;

  MPCConfig& cfg = net.config;
  cfg.horizon = spec.horizon;
  for (Index i = 0; i < m; ++i) {
    const MatrixXd gq = gaussian(n, n);
    const MatrixXd gr = gaussian(mu, mu);
    cfg.state_weights.push_back(gq.transpose() * gq);
    cfg.input_weights.push_back(gr.transpose() * gr + 0.1 * MatrixXd::Identity(mu, mu));
    BoxSet box{VectorXd(mu), VectorXd(mu)};
    for (Index k = 0; k < mu; ++k) {
      box.lower[k] = -spec.box_scale * unit(rng);
      box.upper[k] = spec.box_scale * unit(rng);
    }
    cfg.input_boxes.push_back(std::move(box));
  }
  net.initial_state = spec.state_scale * gaussian(sys.state_dim(), 1);

  TerminalIngredients term = default_terminal(sys, StageWeights::from_config(cfg));
  cfg.terminal_weights = std::move(term.terminal);
  net.terminal_feedback = std::move(term.feedback);
  net.terminal_certified = term.certified;
  return net;
}

}  // namespace pcdm
