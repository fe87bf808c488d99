#pragma once

#include <array>

#include "pcdm/network.hpp"

namespace pcdm {

/// Quadruple-tank process. Flows are given in m^3/h and converted to m^3/s
/// by flow_si(); everything else is SI.
struct QuadTankParams {
  double area = 0.02;                                     ///< S, m^2
  std::array<double, 4> outlet{5.8e-5, 6.2e-5, 2e-5, 3.6e-5};  ///< a_i, m^2
  std::array<double, 4> level{0.19, 0.13, 0.23, 0.09};    ///< h_i^0, m
  double flow_a = 0.39;                                   ///< q_a^max, m^3/h
  double flow_b = 0.39;                                   ///< q_b^max, m^3/h
  double gamma_a = 0.58;
  double gamma_b = 0.54;
  double gravity = 9.81;
  double valve_min = 0.15;
  double valve_max = 0.8;

  double flow_a_si() const { return flow_a / 3600.0; }
  double flow_b_si() const { return flow_b / 3600.0; }
  void validate() const;
};

struct ContinuousModel {
  MatrixXd a;  ///< 4x4
  MatrixXd b;  ///< 4x2
  std::array<double, 4> time_constants{};
};

ContinuousModel quadtank_linearize(const QuadTankParams& p);

struct DiscreteModel {
  MatrixXd a;
  MatrixXd b;
};

/// A_d = exp(A_c tau), B_d = int_0^tau exp(A_c s) ds B_c via the exponential
/// of [[A_c, B_c], [0, 0]] tau.
DiscreteModel zoh_discretize(const MatrixXd& a, const MatrixXd& b, double tau);

struct TankRate {
  Eigen::Vector4d rate;
  bool clamped = false;  ///< some level was negative and treated as 0
};

/// Nonlinear level dynamics dh/dt at levels h and valve ratios gamma.
TankRate quadtank_nonlinear_rhs(const QuadTankParams& p, const Eigen::Vector4d& h, const Eigen::Vector2d& gamma);

/// Subsystem 1 holds (x1, x4) with input gamma_a, subsystem 2 holds (x2, x3)
/// with input gamma_b; states and inputs are deviations from the operating
/// point.
struct QuadTankProblem {
  NetworkSystem system;
  MPCConfig config;
  /// Global tank index of local state k of subsystem i: order[2 i + k].
  std::array<int, 4> order{0, 3, 1, 2};
  std::vector<MatrixXd> terminal_feedback;  ///< F^i used for the warm start
  bool terminal_certified = false;
};

/// Terminal P^i and F^i come from default_terminal with Q = I, R = 0.01 I.
QuadTankProblem quadtank_system(const QuadTankParams& p, double tau = 5.0, int horizon = 20);

/// Tank-ordered vector (h1..h4) to the partitioned state ordering and back.
VectorXd quadtank_to_partitioned(const VectorXd& tanks);
VectorXd quadtank_from_partitioned(const VectorXd& partitioned);

}  // namespace pcdm
