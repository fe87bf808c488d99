#pragma once

#include <cstdint>

#include "pcdm/network.hpp"

namespace pcdm {

struct RandomNetSpec {
  Index subsystems = 8;  ///< M, at least 3
  Index state_dim = 5;   ///< n_i
  Index input_dim = 5;   ///< m_i
  int horizon = 12;
  std::uint64_t seed = 1;
  double box_scale = 1.0;
  double state_scale = 1.0;  ///< std. deviation of the random initial state

  void validate() const;
};

struct RandomNetwork {
  NetworkSystem system;
  MPCConfig config;
  std::vector<MatrixXd> terminal_feedback;
  bool terminal_certified = false;
  VectorXd initial_state;
};

/// Ring network x^i+ = sum_{j in {i-1,i,i+1}} A^{ij} x^j + B^{ij} u^j with
/// N(0,1) entries, A rescaled so that rho(A) = 1. Q^i = G'G, R^i = G'G + 0.1 I,
/// boxes [-s U(0.1,1), s U(0.1,1)]. Terminal ingredients from default_terminal.
RandomNetwork random_network(const RandomNetSpec& spec);

}  // namespace pcdm
