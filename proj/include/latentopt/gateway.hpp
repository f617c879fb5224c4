#pragma once

#include <memory>
#include <string>
#include <vector>

#include "latentopt/backend.hpp"

namespace latentopt {

/// Scores are clamped into this range before anyone sees them.
inline constexpr double kScoreMin = 1.0;
inline constexpr double kScoreMax = 5.0;

/// Contract-enforcing front of a Backend: capability checks, shape checks
/// on every input and output, and score clamping. One in-flight call at a
/// time; movable between threads, not shareable.
class ModelGateway {
 public:
  explicit ModelGateway(std::unique_ptr<Backend> backend);

  const BackendCapabilities& capabilities() const { return backend_->capabilities(); }
  std::string identity() const { return backend_->identity(); }

  LatentPoint encode(const ImageTensor& image);
  ImageTensor generate(const LatentPoint& latent);
  Eigen::VectorXd features(const ImageTensor& image);
  double score(const ImageTensor& image);
  Eigen::VectorXd grad_objective(const LatentPoint& latent, const LossWeights& w, const Eigen::VectorXd& ref_features);

  Backend& backend() { return *backend_; }

 private:
  void check_image(const ImageTensor& image, const char* op) const;
  void check_latent(const LatentPoint& latent, const char* op) const;

  std::unique_ptr<Backend> backend_;
};

/// Opens a gateway for an endpoint string:
///   "toy"               built-in deterministic toy backend
///   "mock"              toy backend behind the wire protocol, in process
///   "tcp://host:port"   protocol server over TCP
///   "exec:<command>"    protocol server as a subprocess on stdin/stdout
/// Performs the hello exchange for protocol endpoints.
ModelGateway connect(const std::string& endpoint);

/// Fixed-size set of gateways for concurrent candidate evaluation.
class GatewayPool {
 public:
  explicit GatewayPool(std::vector<ModelGateway> gateways);
  static GatewayPool open(const std::string& endpoint, int size);
  /// Single-member pool referring to a gateway owned elsewhere.
  static GatewayPool borrow(ModelGateway& gateway);

  std::size_t size() const { return members_.size(); }
  ModelGateway& at(std::size_t i) { return *members_.at(i); }
  ModelGateway& front() { return *members_.front(); }

 private:
  GatewayPool() = default;

  std::vector<std::unique_ptr<ModelGateway>> owned_;
  std::vector<ModelGateway*> members_;
};

}  // namespace latentopt
