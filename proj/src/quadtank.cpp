#include "pcdm/quadtank.hpp"

#include <cmath>

#include "pcdm/errors.hpp"
#include "pcdm/linalg.hpp"
#include "pcdm/terminal_cost.hpp"

namespace pcdm {

namespace {
constexpr std::array<int, 4> kOrder{0, 3, 1, 2};
}

void QuadTankParams::validate() const {
  auto pos = [](double v) { return std::isfinite(v) && v > 0.0; };
  bool ok = pos(area) && pos(flow_a) && pos(flow_b) && pos(gravity);
  for (int k = 0; k < 4; ++k) ok = ok && pos(outlet[k]) && pos(level[k]);
  if (!ok) throw InputError("QuadTankParams: parameters must be positive and finite");
  if (!(gamma_a >= 0.0 && gamma_a <= 1.0 && gamma_b >= 0.0 && gamma_b <= 1.0)) {
    throw InputError("QuadTankParams: valve ratios must lie in [0, 1]");
  }
  if (!(valve_min >= 0.0 && valve_min <= valve_max && valve_max <= 1.0)) {
    throw InputError("QuadTankParams: valve range must satisfy 0 <= min <= max <= 1");
  }
}

ContinuousModel quadtank_linearize(const QuadTankParams& p) {
  p.validate();
  ContinuousModel m;
  for (int k = 0; k < 4; ++k) m.time_constants[k] = p.area / p.outlet[k] * std::sqrt(2.0 * p.level[k] / p.gravity);
  const auto& tau = m.time_constants;
  m.a = MatrixXd::Zero(4, 4);
  for (int k = 0; k < 4; ++k) m.a(k, k) = -1.0 / tau[k];
  m.a(0, 3) = 1.0 / tau[3];
  m.a(1, 2) = 1.0 / tau[2];
  const double qa = p.flow_a_si() / p.area;
  const double qb = p.flow_b_si() / p.area;
  m.b = MatrixXd::Zero(4, 2);
  m.b(0, 0) = qa;
  m.b(2, 0) = -qa;
  m.b(1, 1) = qb;
  m.b(3, 1) = -qb;
  return m;
}

DiscreteModel zoh_discretize(const MatrixXd& a, const MatrixXd& b, double tau) {
  if (!(tau > 0.0)) throw InputError("zoh_discretize: sampling time must be positive");
  if (a.rows() != a.cols() || b.rows() != a.rows()) throw InputError("zoh_discretize: shape mismatch");
  const Index n = a.rows();
  const Index m = b.cols();
  MatrixXd aug = MatrixXd::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = a * tau;
  aug.topRightCorner(n, m) = b * tau;
  const MatrixXd e = linalg::expm(aug);
  return {e.topLeftCorner(n, n), e.topRightCorner(n, m)};
}

TankRate quadtank_nonlinear_rhs(const QuadTankParams& p, const Eigen::Vector4d& h, const Eigen::Vector2d& gamma) {
  TankRate out;
  Eigen::Vector4d out_flow;
  for (int k = 0; k < 4; ++k) {
    double hk = h[k];
    if (hk < 0.0) {
      hk = 0.0;
      out.clamped = true;
    }
    out_flow[k] = p.outlet[k] * std::sqrt(2.0 * p.gravity * hk);
  }
  const double qa = p.flow_a_si();
  const double qb = p.flow_b_si();
  out.rate[0] = (-out_flow[0] + out_flow[3] + gamma[0] * qa) / p.area;
  out.rate[1] = (-out_flow[1] + out_flow[2] + gamma[1] * qb) / p.area;
  out.rate[2] = (-out_flow[2] + (1.0 - gamma[0]) * qa) / p.area;
  out.rate[3] = (-out_flow[3] + (1.0 - gamma[1]) * qb) / p.area;
  return out;
}

VectorXd quadtank_to_partitioned(const VectorXd& tanks) {
  if (tanks.size() != 4) throw InputError("quadtank_to_partitioned: need 4 levels");
  VectorXd out(4);
  for (int k = 0; k < 4; ++k) out[k] = tanks[kOrder[k]];
  return out;
}

VectorXd quadtank_from_partitioned(const VectorXd& partitioned) {
  if (partitioned.size() != 4) throw InputError("quadtank_from_partitioned: need 4 states");
  VectorXd out(4);
  for (int k = 0; k < 4; ++k) out[kOrder[k]] = partitioned[k];
  return out;
}

QuadTankProblem quadtank_system(const QuadTankParams& p, double tau, int horizon) {
  const ContinuousModel cont = quadtank_linearize(p);
  const DiscreteModel disc = zoh_discretize(cont.a, cont.b, tau);
  MatrixXd perm = MatrixXd::Zero(4, 4);
  for (int k = 0; k < 4; ++k) perm(k, kOrder[k]) = 1.0;
  const MatrixXd a = perm * disc.a * perm.transpose();
  const MatrixXd b = perm * disc.b;

  QuadTankProblem prob;
  prob.order = kOrder;
  prob.system = NetworkSystem::from_dense({2, 2}, {1, 1}, a, b);
  MPCConfig& cfg = prob.config;
  cfg.horizon = horizon;
  const double gammas[2] = {p.gamma_a, p.gamma_b};
  for (int i = 0; i < 2; ++i) {
    cfg.state_weights.push_back(MatrixXd::Identity(2, 2));
    cfg.input_weights.push_back(0.01 * MatrixXd::Identity(1, 1));
    cfg.terminal_weights.push_back(MatrixXd::Identity(2, 2));
    cfg.input_boxes.push_back(BoxSet::uniform(1, p.valve_min - gammas[i], p.valve_max - gammas[i]));
  }
  TerminalIngredients term = default_terminal(prob.system, StageWeights::from_config(cfg));
  cfg.terminal_weights = std::move(term.terminal);
  prob.terminal_feedback = std::move(term.feedback);
  prob.terminal_certified = term.certified;
  return prob;
}

}  // namespace pcdm
