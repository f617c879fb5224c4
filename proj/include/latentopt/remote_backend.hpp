#pragma once

#include <cstdint>
#include <memory>

#include "latentopt/backend.hpp"
#include "latentopt/protocol.hpp"
#include "latentopt/transport.hpp"

namespace latentopt {

/// Backend reached over the framed JSON protocol. The constructor performs
/// the hello exchange and caches the advertised capabilities.
class RemoteBackend final : public Backend {
 public:
  RemoteBackend(std::unique_ptr<Transport> transport, std::string endpoint);

  const BackendCapabilities& capabilities() const override { return caps_; }
  std::string identity() const override { return identity_; }

  LatentPoint encode(const ImageTensor& image) override;
  ImageTensor generate(const LatentPoint& latent) override;
  Eigen::VectorXd features(const ImageTensor& image) override;
  double score(const ImageTensor& image) override;
  Eigen::VectorXd grad_objective(const LatentPoint& latent, const LossWeights& w,
                                 const Eigen::VectorXd& ref_features) override;

  std::int64_t last_id() const { return next_id_ - 1; }

 private:
  /// Sends one request and returns the matching response; error frames
  /// become ModelError (VersionMismatch for version_mismatch).
  protocol::json call(protocol::json request);

  std::unique_ptr<Transport> transport_;
  std::string identity_;
  BackendCapabilities caps_;
  std::int64_t next_id_ = 1;
};

}  // namespace latentopt
