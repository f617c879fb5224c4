#include "latentopt/remote_backend.hpp"

#include "latentopt/errors.hpp"

namespace latentopt {

using protocol::json;

RemoteBackend::RemoteBackend(std::unique_ptr<Transport> transport, std::string endpoint)
    : transport_(std::move(transport)) {
  json hello = protocol::make_request(0, "hello");
  hello["protocol_version"] = protocol::kVersion;
  const json reply = call(std::move(hello));
  if (!reply.contains("protocol_version") || !reply["protocol_version"].is_number_integer())
    throw ProtocolError("malformed hello: missing protocol_version");
  if (reply["protocol_version"].get<int>() != protocol::kVersion)
    throw VersionMismatch("server speaks protocol " + reply["protocol_version"].dump() + ", expected " +
                          std::to_string(protocol::kVersion));
  caps_ = protocol::decode_capabilities(reply);
  identity_ = endpoint;
  if (reply.contains("backend") && reply["backend"].is_string())
    identity_ += " [" + reply["backend"].get<std::string>() + "]";
}

json RemoteBackend::call(json request) {
  const std::int64_t id = next_id_++;
  const std::string op = request["op"].get<std::string>();
  request["id"] = id;
  protocol::write_message(*transport_, request);
  const json reply = protocol::read_message(*transport_);
  if (!reply.is_object() || !reply.contains("id") || !reply["id"].is_number_integer() || !reply.contains("op"))
    throw ProtocolError("response lacks id or op");
  if (reply["id"].get<std::int64_t>() != id)
    throw ProtocolError("response id " + reply["id"].dump() + " does not match request id " + std::to_string(id));
  if (reply["op"] == "error") {
    const std::string code = reply.value("code", "unknown");
    const std::string message = reply.value("message", "");
    if (code == "version_mismatch") throw VersionMismatch(message);
    throw ModelError(code, message);
  }
  if (reply["op"] != op) throw ProtocolError("response op " + reply["op"].dump() + " does not match '" + op + "'");
  return reply;
}

LatentPoint RemoteBackend::encode(const ImageTensor& image) {
  json req = protocol::make_request(0, "encode");
  req["image"] = protocol::encode_image(image);
  return protocol::decode_latent(call(std::move(req)).at("latent"));
}

ImageTensor RemoteBackend::generate(const LatentPoint& latent) {
  json req = protocol::make_request(0, "generate");
  req["latent"] = protocol::encode_latent(latent);
  return protocol::decode_image(call(std::move(req)).at("image"));
}

Eigen::VectorXd RemoteBackend::features(const ImageTensor& image) {
  json req = protocol::make_request(0, "features");
  req["image"] = protocol::encode_image(image);
  return protocol::decode_vector(call(std::move(req)).at("features"));
}

double RemoteBackend::score(const ImageTensor& image) {
  json req = protocol::make_request(0, "score");
  req["image"] = protocol::encode_image(image);
  const json reply = call(std::move(req));
  if (!reply.contains("score") || !reply["score"].is_number()) throw ProtocolError("score response lacks a number");
  return reply["score"].get<double>();
}

Eigen::VectorXd RemoteBackend::grad_objective(const LatentPoint& latent, const LossWeights& w,
                                              const Eigen::VectorXd& ref_features) {
  json req = protocol::make_request(0, "grad_objective");
  req["latent"] = protocol::encode_latent(latent);
  req["weights"] = protocol::encode_weights(w);
  req["ref_features"] = protocol::encode_vector(ref_features);
  return protocol::decode_vector(call(std::move(req)).at("gradient"));
}

}  // namespace latentopt
