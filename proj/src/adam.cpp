#include "latentopt/adam.hpp"

#include <cmath>

#include "latentopt/errors.hpp"

namespace latentopt {

void AdamConfig::validate() const {
  if (!(step_size > 0.0)) throw InvalidArgument("adam: step_size must be positive");
  if (!(decay_m >= 0.0 && decay_m < 1.0)) throw InvalidArgument("adam: decay_m must be in [0, 1)");
  if (!(decay_v >= 0.0 && decay_v < 1.0)) throw InvalidArgument("adam: decay_v must be in [0, 1)");
  if (!(epsilon > 0.0)) throw InvalidArgument("adam: epsilon must be positive");
}

AdamState AdamState::zeros(Eigen::Index n) {
  return AdamState{Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), 0};
}

Eigen::VectorXd adam_step(AdamState& state, const AdamConfig& config, const Eigen::VectorXd& grad) {
  if (grad.size() != state.m.size() || grad.size() != state.v.size())
    throw InvalidArgument("adam_step: gradient length does not match state");
  if (!grad.allFinite()) throw NumericError("adam_step: non-finite gradient");

  state.t += 1;
  state.m = config.decay_m * state.m + (1.0 - config.decay_m) * grad;
  state.v = config.decay_v * state.v + (1.0 - config.decay_v) * grad.cwiseProduct(grad);
  const double bias_m = 1.0 - std::pow(config.decay_m, static_cast<double>(state.t));
  const double bias_v = 1.0 - std::pow(config.decay_v, static_cast<double>(state.t));

  Eigen::VectorXd delta(grad.size());
  for (Eigen::Index i = 0; i < grad.size(); ++i) {
    const double m_hat = state.m[i] / bias_m;
    const double v_hat = state.v[i] / bias_v;
    delta[i] = -config.step_size * m_hat / (std::sqrt(v_hat) + config.epsilon);
  }
  return delta;
}

Eigen::VectorXd fd_gradient(const ScalarFunction& f, const Eigen::VectorXd& x, double h) {
  if (!(h > 0.0)) throw InvalidArgument("fd_gradient: h must be positive");
  Eigen::VectorXd grad(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    if (!std::isfinite(up) || !std::isfinite(down))
      throw NumericError("fd_gradient: objective is non-finite at a probe point");
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

}  // namespace latentopt
