#pragma once

#include <Eigen/Dense>

namespace latentopt {

class ModelGateway;
struct LatentPoint;

/// Weights of the combined objective beta1 * max(lpips, theta) + beta2 * beauty.
/// Defaults are tuning defaults, not measured values.
struct LossWeights {
  double beta1 = 1.0;
  double beta2 = 0.25;
  double theta = 0.15;
  double c_max = 5.0;

  void validate() const;
};

struct LossBreakdown {
  double lpips = 0.0;
  double beauty = 0.0;
  double combined = 0.0;
  double raw_score = 0.0;
  bool hinge_active = false;
};

/// Squared Euclidean distance between two feature embeddings.
double perceptual_loss(const Eigen::VectorXd& features_ref, const Eigen::VectorXd& features_img);

/// (c_max - raw_score)^2.
double beauty_loss(double raw_score, double c_max);

struct CombinedLoss {
  double value = 0.0;
  bool hinge_active = false;  // lpips < theta, so the perceptual term sits on its floor
};

CombinedLoss combined_loss(double lpips, double beauty, const LossWeights& w);

/// Fitness of one latent: generate, embed, score, and combine. Makes exactly
/// one generate, one features and one score call on the gateway.
LossBreakdown evaluate_objective(const LatentPoint& latent, ModelGateway& gateway,
                                 const Eigen::VectorXd& ref_features, const LossWeights& w);

}  // namespace latentopt
