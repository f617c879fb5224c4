#pragma once

#include <cstdint>
#include <memory>

#include "latentopt/backend.hpp"

namespace latentopt {

/// Parameters of the toy model. Everything is drawn from one SplitMix64
/// stream seeded with `seed`, in this order, each draw mapped to
/// scale * (2u - 1):
///   1. coarse basis, (H/p)*(W/p)*C x L*D entries, row-major (cell, latent)
///   2. fine basis,   H*W*C x L*D entries, row-major (pixel, latent)
///   3. reference latent, L*D entries, scale reference_scale
///   4. ideal direction, L*D entries, rescaled to norm target_distance
/// B(pixel, j) = coarse(cell(pixel), j) + fine(pixel, j), cell being the
/// pooling block and channel that contain the pixel.
struct ToyConfig {
  std::uint64_t seed = 20240917;
  int layers = 4;
  int dim = 16;
  ImageShape image_shape{32, 32, 3};
  int pool = 4;
  double coarse_scale = 0.03;
  double fine_scale = 0.01;
  double bias = 0.5;
  double reference_scale = 0.5;
  double target_distance = 1.86;
  double sharpness = 0.435;  // k in 1 + 4 exp(-k |I - I*|^2)
};

/// Linear generator G(w) = clamp01(B w + b), encoder pinv(B) (I - b),
/// pooled-patch features and a radial scorer peaked at I* = G(w*).
class ToyModel {
 public:
  explicit ToyModel(const ToyConfig& config = {});

  const ToyConfig& config() const { return config_; }
  BackendCapabilities capabilities() const;
  int feature_dim() const;

  const Eigen::MatrixXd& basis() const { return basis_; }
  const Eigen::MatrixXd& pseudo_inverse() const { return pinv_; }
  /// Fixture latent whose image serves as the reference face.
  const LatentPoint& reference_latent() const { return reference_; }
  /// w* with score(G(w*)) = 5.
  const LatentPoint& ideal_latent() const { return ideal_; }
  const ImageTensor& ideal_image() const { return ideal_image_; }

  /// B w + b before clamping.
  Eigen::VectorXd pre_clamp(const LatentPoint& latent) const;
  ImageTensor generate(const LatentPoint& latent) const;
  LatentPoint encode(const ImageTensor& image) const;
  Eigen::VectorXd features(const ImageTensor& image) const;
  double score(const ImageTensor& image) const;
  Eigen::VectorXd grad_objective(const LatentPoint& latent, const LossWeights& w,
                                 const Eigen::VectorXd& ref_features) const;

 private:
  ToyConfig config_;
  Eigen::MatrixXd basis_;
  Eigen::MatrixXd pinv_;
  LatentPoint reference_;
  LatentPoint ideal_;
  ImageTensor ideal_image_;
};

class ToyBackend : public Backend {
 public:
  explicit ToyBackend(std::shared_ptr<const ToyModel> model);

  const BackendCapabilities& capabilities() const override { return caps_; }
  std::string identity() const override;

  LatentPoint encode(const ImageTensor& image) override { return model_->encode(image); }
  ImageTensor generate(const LatentPoint& latent) override { return model_->generate(latent); }
  Eigen::VectorXd features(const ImageTensor& image) override { return model_->features(image); }
  double score(const ImageTensor& image) override { return model_->score(image); }
  Eigen::VectorXd grad_objective(const LatentPoint& latent, const LossWeights& w,
                                 const Eigen::VectorXd& ref_features) override {
    return model_->grad_objective(latent, w, ref_features);
  }

  const ToyModel& model() const { return *model_; }

 private:
  std::shared_ptr<const ToyModel> model_;
  BackendCapabilities caps_;
};

/// Process-wide default toy model, built on first use.
std::shared_ptr<const ToyModel> default_toy_model();

}  // namespace latentopt
