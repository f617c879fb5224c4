#pragma once

#include <functional>

#include <Eigen/Dense>

namespace latentopt {

/// Adam hyperparameters. decay_m / decay_v are the first and second moment
/// decay rates (often written beta1 / beta2).
struct AdamConfig {
  double step_size = 0.01;
  double decay_m = 0.9;
  double decay_v = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long t = 0;

  static AdamState zeros(Eigen::Index n);
};

/// One bias-corrected Adam update. Advances `state` and returns the additive
/// change to apply to the parameters (x <- x + delta).
Eigen::VectorXd adam_step(AdamState& state, const AdamConfig& config, const Eigen::VectorXd& grad);

using ScalarFunction = std::function<double(const Eigen::VectorXd&)>;

/// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h; exactly 2 * dim calls of f.
Eigen::VectorXd fd_gradient(const ScalarFunction& f, const Eigen::VectorXd& x, double h);

}  // namespace latentopt
