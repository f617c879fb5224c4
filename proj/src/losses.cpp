#include "latentopt/losses.hpp"

#include <algorithm>
#include <cmath>

#include "latentopt/errors.hpp"
#include "latentopt/gateway.hpp"

namespace latentopt {

void LossWeights::validate() const {
  if (!(beta1 >= 0.0) || !(beta2 >= 0.0) || !(theta >= 0.0))
    throw InvalidArgument("loss weights: beta1, beta2 and theta must be non-negative");
  if (!(beta1 + beta2 > 0.0)) throw InvalidArgument("loss weights: beta1 + beta2 must be positive");
  if (!std::isfinite(c_max) || !std::isfinite(beta1) || !std::isfinite(beta2) || !std::isfinite(theta))
    throw InvalidArgument("loss weights: values must be finite");
}

double perceptual_loss(const Eigen::VectorXd& features_ref, const Eigen::VectorXd& features_img) {
  if (features_ref.size() != features_img.size())
    throw InvalidArgument("perceptual_loss: feature lengths differ (" + std::to_string(features_ref.size()) +
                          " vs " + std::to_string(features_img.size()) + ")");
  if (!features_ref.allFinite() || !features_img.allFinite())
    throw NumericError("perceptual_loss: non-finite feature entry");
  return (features_ref - features_img).squaredNorm();
}

double beauty_loss(double raw_score, double c_max) {
  if (!std::isfinite(raw_score) || !std::isfinite(c_max)) throw NumericError("beauty_loss: non-finite score");
  const double gap = c_max - raw_score;
  return gap * gap;
}

CombinedLoss combined_loss(double lpips, double beauty, const LossWeights& w) {
  if (!std::isfinite(lpips) || !std::isfinite(beauty)) throw NumericError("combined_loss: non-finite input");
  if (lpips < 0.0 || beauty < 0.0) throw InvalidArgument("combined_loss: loss terms must be non-negative");
  return CombinedLoss{w.beta1 * std::max(lpips, w.theta) + w.beta2 * beauty, lpips < w.theta};
}

LossBreakdown evaluate_objective(const LatentPoint& latent, ModelGateway& gateway,
                                 const Eigen::VectorXd& ref_features, const LossWeights& w) {
  const ImageTensor image = gateway.generate(latent);
  const Eigen::VectorXd feats = gateway.features(image);
  const double raw = gateway.score(image);

  LossBreakdown out;
  out.lpips = perceptual_loss(ref_features, feats);
  out.raw_score = raw;
  out.beauty = beauty_loss(raw, w.c_max);
  const CombinedLoss c = combined_loss(out.lpips, out.beauty, w);
  out.combined = c.value;
  out.hinge_active = c.hinge_active;
  return out;
}

}  // namespace latentopt
