#include "latentopt/conformance.hpp"

#include "latentopt/protocol.hpp"
#include "latentopt/transport.hpp"

namespace latentopt::protocol {

using nlohmann::json;

std::vector<json> conformance_requests(const ToyModel& model) {
  const ToyConfig& cfg = model.config();
  const LatentPoint zero = LatentPoint::zeros(cfg.layers, cfg.dim);
  const ImageTensor reference = model.generate(model.reference_latent());
  const Eigen::VectorXd ref_features = model.features(reference);
  const LossWeights weights;

  std::vector<json> script;
  auto add = [&](std::string_view op) -> json& {
    script.push_back(make_request(static_cast<std::int64_t>(script.size()) + 1, op));
    return script.back();
  };
  add("hello")["protocol_version"] = kVersion;
  add("generate")["latent"] = encode_latent(zero);
  add("generate")["latent"] = encode_latent(model.reference_latent());
  add("generate")["latent"] = encode_latent(model.ideal_latent());
  add("features")["image"] = encode_image(reference);
  add("score")["image"] = encode_image(reference);
  add("score")["image"] = encode_image(model.ideal_image());
  add("encode")["image"] = encode_image(reference);
  for (const LatentPoint* at : {&model.reference_latent(), &model.ideal_latent()}) {
    json& r = add("grad_objective");
    r["latent"] = encode_latent(*at);
    r["weights"] = encode_weights(weights);
    r["ref_features"] = encode_vector(ref_features);
  }
  add("generate")["latent"] = encode_latent(LatentPoint::zeros(cfg.layers + 1, cfg.dim));
  add("transmogrify")["image"] = encode_image(reference);
  add("features")["image"] = encode_image(ImageTensor::filled({cfg.image_shape.height / 2, cfg.image_shape.width / 2,
                                                               cfg.image_shape.channels},
                                                              0.5));
  add("encode");  // no image
  json repeat = make_request(static_cast<std::int64_t>(script.size()), "score");
  repeat["image"] = encode_image(reference);
  script.push_back(repeat);
  return script;
}

Transcript record_conformance(std::shared_ptr<Backend> backend, const ToyModel& model) {
  auto responder = std::make_shared<Responder>(std::move(backend));
  RecordingTransport transport(loopback([responder](std::string_view payload, bool& close_after) {
    return responder->handle(payload, close_after);
  }));
  Transcript t;
  int frame = 0;
  auto note = [&](const char* direction, std::size_t offset, std::size_t length, const json& msg) {
    t.index.push_back(json{{"frame", frame++},
                           {"direction", direction},
                           {"offset", offset},
                           {"length", length},
                           {"id", msg.at("id")},
                           {"op", msg.at("op")}});
  };
  for (const json& request : conformance_requests(model)) {
    const std::size_t sent_at = transport.sent().size();
    write_message(transport, request);
    note("client_to_server", sent_at, transport.sent().size() - sent_at, request);
    const std::size_t recv_at = transport.received().size();
    const json reply = read_message(transport);
    note("server_to_client", recv_at, transport.received().size() - recv_at, reply);
  }
  t.client_to_server = transport.sent();
  t.server_to_client = transport.received();
  return t;
}

}  // namespace latentopt::protocol
