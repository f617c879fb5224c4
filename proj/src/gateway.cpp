#include "latentopt/gateway.hpp"

#include <algorithm>
#include <cmath>

#include "latentopt/errors.hpp"
#include "latentopt/protocol.hpp"
#include "latentopt/remote_backend.hpp"
#include "latentopt/toy_backend.hpp"

namespace latentopt {

ModelGateway::ModelGateway(std::unique_ptr<Backend> backend) : backend_(std::move(backend)) {
  if (!backend_) throw InvalidArgument("gateway: null backend");
}

void ModelGateway::check_image(const ImageTensor& image, const char* op) const {
  const ImageShape& want = capabilities().image_shape;
  if (!(image.shape == want) || image.data.size() != want.size())
    throw ShapeMismatch(std::string(op) + ": image shape " + image.shape.str() + " does not match backend " +
                        want.str());
}

void ModelGateway::check_latent(const LatentPoint& latent, const char* op) const {
  const BackendCapabilities& caps = capabilities();
  if (latent.layers != caps.latent_layers || latent.dim != caps.latent_dim ||
      latent.data.size() != static_cast<std::size_t>(caps.latent_layers) * caps.latent_dim)
    throw ShapeMismatch(std::string(op) + ": latent " + std::to_string(latent.layers) + "x" +
                        std::to_string(latent.dim) + " does not match backend " + std::to_string(caps.latent_layers) +
                        "x" + std::to_string(caps.latent_dim));
}

LatentPoint ModelGateway::encode(const ImageTensor& image) {
  if (!capabilities().encode) throw CapabilityError("encode");
  check_image(image, "encode");
  LatentPoint out = backend_->encode(image);
  check_latent(out, "encode result");
  return out;
}

ImageTensor ModelGateway::generate(const LatentPoint& latent) {
  if (!capabilities().generate) throw CapabilityError("generate");
  check_latent(latent, "generate");
  ImageTensor out = backend_->generate(latent);
  check_image(out, "generate result");
  for (double& v : out.data) {
    if (!std::isfinite(v)) throw ModelError("backend_failure", "generate returned non-finite pixels");
    v = std::clamp(v, 0.0, 1.0);
  }
  return out;
}

Eigen::VectorXd ModelGateway::features(const ImageTensor& image) {
  if (!capabilities().features) throw CapabilityError("features");
  check_image(image, "features");
  Eigen::VectorXd out = backend_->features(image);
  if (out.size() != capabilities().feature_dim)
    throw ShapeMismatch("features result has length " + std::to_string(out.size()) + ", advertised " +
                        std::to_string(capabilities().feature_dim));
  return out;
}

double ModelGateway::score(const ImageTensor& image) {
  if (!capabilities().score) throw CapabilityError("score");
  check_image(image, "score");
  const double raw = backend_->score(image);
  if (!std::isfinite(raw)) throw ModelError("backend_failure", "score returned a non-finite value");
  return std::clamp(raw, kScoreMin, kScoreMax);
}

Eigen::VectorXd ModelGateway::grad_objective(const LatentPoint& latent, const LossWeights& w,
                                             const Eigen::VectorXd& ref_features) {
  if (!capabilities().grad_objective) throw CapabilityError("grad_objective");
  check_latent(latent, "grad_objective");
  if (ref_features.size() != capabilities().feature_dim)
    throw ShapeMismatch("grad_objective: ref_features length does not match feature_dim");
  Eigen::VectorXd out = backend_->grad_objective(latent, w, ref_features);
  if (out.size() != static_cast<Eigen::Index>(latent.size()))
    throw ShapeMismatch("grad_objective result has length " + std::to_string(out.size()));
  return out;
}

ModelGateway connect(const std::string& endpoint) {
  if (endpoint == "toy") return ModelGateway(std::make_unique<ToyBackend>(default_toy_model()));
  if (endpoint == "mock") {
    auto responder = std::make_shared<protocol::Responder>(std::make_shared<ToyBackend>(default_toy_model()));
    auto transport = loopback([responder](std::string_view payload, bool& close_after) {
      return responder->handle(payload, close_after);
    });
    return ModelGateway(std::make_unique<RemoteBackend>(std::move(transport), endpoint));
  }
  if (endpoint.rfind("tcp://", 0) == 0) {
    const std::string rest = endpoint.substr(6);
    const auto colon = rest.rfind(':');
    if (colon == std::string::npos || colon == 0) throw InvalidArgument("endpoint '" + endpoint + "' lacks host:port");
    int port = 0;
    try {
      port = std::stoi(rest.substr(colon + 1));
    } catch (const std::exception&) {
      throw InvalidArgument("endpoint '" + endpoint + "' has an invalid port");
    }
    if (port <= 0 || port > 65535) throw InvalidArgument("endpoint '" + endpoint + "' has an invalid port");
    return ModelGateway(std::make_unique<RemoteBackend>(tcp_connect(rest.substr(0, colon), port), endpoint));
  }
  if (endpoint.rfind("exec:", 0) == 0) {
    const std::string command = endpoint.substr(5);
    if (command.empty()) throw InvalidArgument("endpoint 'exec:' needs a command");
    return ModelGateway(std::make_unique<RemoteBackend>(spawn_subprocess(command), endpoint));
  }
  throw InvalidArgument("unrecognized backend endpoint '" + endpoint + "'");
}

GatewayPool::GatewayPool(std::vector<ModelGateway> gateways) {
  if (gateways.empty()) throw InvalidArgument("gateway pool needs at least one gateway");
  for (auto& g : gateways) {
    owned_.push_back(std::make_unique<ModelGateway>(std::move(g)));
    members_.push_back(owned_.back().get());
  }
  const BackendCapabilities& first = members_.front()->capabilities();
  for (const ModelGateway* g : members_)
    if (!(g->capabilities() == first)) throw ProtocolError("gateway pool members advertise different capabilities");
}

GatewayPool GatewayPool::borrow(ModelGateway& gateway) {
  GatewayPool pool;
  pool.members_.push_back(&gateway);
  return pool;
}

GatewayPool GatewayPool::open(const std::string& endpoint, int size) {
  if (size <= 0) throw InvalidArgument("pool size must be positive");
  std::vector<ModelGateway> gateways;
  gateways.reserve(size);
  for (int i = 0; i < size; ++i) gateways.push_back(connect(endpoint));
  return GatewayPool(std::move(gateways));
}

}  // namespace latentopt
