#pragma once

#include <string>

#include <Eigen/Dense>

#include "latentopt/losses.hpp"
#include "latentopt/tensor.hpp"

namespace latentopt {

struct BackendCapabilities {
  bool encode = false;
  bool generate = false;
  bool features = false;
  bool score = false;
  bool grad_objective = false;
  int latent_layers = 0;
  int latent_dim = 0;
  ImageShape image_shape;
  int feature_dim = 0;

  friend bool operator==(const BackendCapabilities&, const BackendCapabilities&) = default;
};

/// A model provider: generator, encoder, feature extractor and scorer.
/// Implementations need not check shapes or clamp scores; ModelGateway
/// enforces the contract around them.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual const BackendCapabilities& capabilities() const = 0;
  /// Short human-readable identity recorded into run metadata.
  virtual std::string identity() const = 0;

  virtual LatentPoint encode(const ImageTensor& image) = 0;
  virtual ImageTensor generate(const LatentPoint& latent) = 0;
  virtual Eigen::VectorXd features(const ImageTensor& image) = 0;
  virtual double score(const ImageTensor& image) = 0;
  /// Gradient of beta1 * max(lpips(G(x)), theta) with respect to the flattened latent.
  virtual Eigen::VectorXd grad_objective(const LatentPoint& latent, const LossWeights& w,
                                         const Eigen::VectorXd& ref_features) = 0;
};

}  // namespace latentopt
