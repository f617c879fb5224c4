#include "latentopt/protocol.hpp"

#include <cmath>
#include <cstring>

#include "latentopt/base64.hpp"
#include "latentopt/errors.hpp"

namespace latentopt::protocol {

std::string encode_frame(std::string_view payload) {
  if (payload.size() > kMaxFrameBytes) throw ProtocolError("frame exceeds maximum size");
  const auto n = static_cast<std::uint32_t>(payload.size());
  std::string out;
  out.reserve(4 + payload.size());
  out += static_cast<char>((n >> 24) & 0xFF);
  out += static_cast<char>((n >> 16) & 0xFF);
  out += static_cast<char>((n >> 8) & 0xFF);
  out += static_cast<char>(n & 0xFF);
  out.append(payload);
  return out;
}

namespace {

std::uint32_t read_be32(std::string_view b) {
  return (static_cast<std::uint32_t>(static_cast<unsigned char>(b[0])) << 24) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(b[1])) << 16) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(b[2])) << 8) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[3]));
}

}  // namespace

bool try_decode_frame(std::string& buffer, std::string& payload) {
  if (buffer.size() < 4) return false;
  const std::uint32_t n = read_be32(buffer);
  if (n > kMaxFrameBytes) throw ProtocolError("frame length " + std::to_string(n) + " exceeds maximum");
  if (buffer.size() < 4 + static_cast<std::size_t>(n)) return false;
  payload.assign(buffer, 4, n);
  buffer.erase(0, 4 + static_cast<std::size_t>(n));
  return true;
}

void write_message(Transport& t, const json& message) { t.write_all(encode_frame(message.dump())); }

json read_message(Transport& t) {
  const std::string header = t.read_exact(4);
  const std::uint32_t n = read_be32(header);
  if (n > kMaxFrameBytes) throw ProtocolError("frame length " + std::to_string(n) + " exceeds maximum");
  const std::string payload = t.read_exact(n);
  try {
    return json::parse(payload);
  } catch (const json::parse_error& e) {
    throw ProtocolError(std::string("malformed JSON frame: ") + e.what());
  }
}

json encode_tensor(std::span<const double> values, const std::vector<int>& shape) {
  std::size_t expected = 1;
  for (int d : shape) expected *= static_cast<std::size_t>(d);
  if (expected != values.size()) throw InvalidArgument("encode_tensor: shape does not match value count");
  std::string bytes(values.size() * 4, '\0');
  for (std::size_t i = 0; i < values.size(); ++i) {
    const float f = static_cast<float>(values[i]);
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    bytes[4 * i] = static_cast<char>(u & 0xFF);
    bytes[4 * i + 1] = static_cast<char>((u >> 8) & 0xFF);
    bytes[4 * i + 2] = static_cast<char>((u >> 16) & 0xFF);
    bytes[4 * i + 3] = static_cast<char>((u >> 24) & 0xFF);
  }
  return json{{"shape", shape}, {"dtype", "f32"}, {"data", base64_encode(bytes)}};
}

Tensor decode_tensor(const json& j) {
  if (!j.is_object() || !j.contains("shape") || !j.contains("dtype") || !j.contains("data"))
    throw ProtocolError("tensor must carry shape, dtype and data");
  if (j.at("dtype") != "f32") throw ProtocolError("unsupported tensor dtype " + j.at("dtype").dump());
  Tensor t;
  std::size_t count = 1;
  for (const auto& d : j.at("shape")) {
    if (!d.is_number_integer() || d.get<int>() < 0) throw ProtocolError("tensor shape entries must be non-negative ints");
    t.shape.push_back(d.get<int>());
    count *= static_cast<std::size_t>(t.shape.back());
  }
  const std::string bytes = base64_decode(j.at("data").get<std::string>());
  if (bytes.size() != count * 4)
    throw ProtocolError("tensor data holds " + std::to_string(bytes.size()) + " bytes, shape needs " +
                        std::to_string(count * 4));
  t.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint32_t u = static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4 * i])) |
                            (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4 * i + 1])) << 8) |
                            (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4 * i + 2])) << 16) |
                            (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4 * i + 3])) << 24);
    float f;
    std::memcpy(&f, &u, 4);
    t.values[i] = f;
  }
  return t;
}

json encode_image(const ImageTensor& image) {
  return encode_tensor(image.data, {image.shape.height, image.shape.width, image.shape.channels});
}

ImageTensor decode_image(const json& j) {
  Tensor t = decode_tensor(j);
  if (t.shape.size() != 3) throw ProtocolError("image tensor must have shape [H, W, C]");
  return ImageTensor{{t.shape[0], t.shape[1], t.shape[2]}, std::move(t.values)};
}

json encode_latent(const LatentPoint& latent) { return encode_tensor(latent.data, {latent.layers, latent.dim}); }

LatentPoint decode_latent(const json& j) {
  Tensor t = decode_tensor(j);
  if (t.shape.size() != 2) throw ProtocolError("latent tensor must have shape [L, D]");
  return LatentPoint{t.shape[0], t.shape[1], std::move(t.values)};
}

json encode_vector(const Eigen::VectorXd& v) {
  return encode_tensor(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())),
                       {static_cast<int>(v.size())});
}

Eigen::VectorXd decode_vector(const json& j) {
  const Tensor t = decode_tensor(j);
  if (t.shape.size() != 1) throw ProtocolError("vector tensor must have shape [N]");
  return Eigen::Map<const Eigen::VectorXd>(t.values.data(), static_cast<Eigen::Index>(t.values.size()));
}

json encode_weights(const LossWeights& w) {
  return json{{"beta1", w.beta1}, {"beta2", w.beta2}, {"theta", w.theta}, {"c_max", w.c_max}};
}

LossWeights decode_weights(const json& j) {
  LossWeights w;
  w.beta1 = j.at("beta1").get<double>();
  w.beta2 = j.at("beta2").get<double>();
  w.theta = j.at("theta").get<double>();
  w.c_max = j.at("c_max").get<double>();
  return w;
}

json encode_capabilities(const BackendCapabilities& caps) {
  return json{{"protocol_version", kVersion},
              {"capabilities",
               {{"encode", caps.encode},
                {"generate", caps.generate},
                {"features", caps.features},
                {"score", caps.score},
                {"grad_objective", caps.grad_objective}}},
              {"latent_layers", caps.latent_layers},
              {"latent_dim", caps.latent_dim},
              {"image_shape", {caps.image_shape.height, caps.image_shape.width, caps.image_shape.channels}},
              {"feature_dim", caps.feature_dim}};
}

BackendCapabilities decode_capabilities(const json& hello) {
  try {
    BackendCapabilities caps;
    const json& c = hello.at("capabilities");
    caps.encode = c.value("encode", false);
    caps.generate = c.value("generate", false);
    caps.features = c.value("features", false);
    caps.score = c.value("score", false);
    caps.grad_objective = c.value("grad_objective", false);
    caps.latent_layers = hello.at("latent_layers").get<int>();
    caps.latent_dim = hello.at("latent_dim").get<int>();
    const json& shape = hello.at("image_shape");
    if (!shape.is_array() || shape.size() != 3) throw ProtocolError("image_shape must be [H, W, C]");
    caps.image_shape = {shape[0].get<int>(), shape[1].get<int>(), shape[2].get<int>()};
    caps.feature_dim = hello.at("feature_dim").get<int>();
    if (caps.latent_layers <= 0 || caps.latent_dim <= 0 || caps.feature_dim <= 0 || caps.image_shape.size() == 0)
      throw ProtocolError("hello advertises non-positive sizes");
    return caps;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed hello: ") + e.what());
  }
}

json make_request(std::int64_t id, std::string_view op) { return json{{"id", id}, {"op", op}}; }

json make_error(std::int64_t id, std::string_view code, std::string_view message) {
  return json{{"id", id}, {"op", "error"}, {"code", code}, {"message", message}};
}

Responder::Responder(std::shared_ptr<Backend> backend) : backend_(std::move(backend)) {}

std::string Responder::handle(std::string_view payload, bool& close_after) {
  close_after = false;
  json request;
  try {
    request = json::parse(payload);
  } catch (const json::parse_error&) {
    close_after = true;
    return make_error(0, "malformed_frame", "payload is not valid JSON").dump();
  }
  if (!request.is_object() || !request.contains("id") || !request["id"].is_number_integer() ||
      !request.contains("op") || !request["op"].is_string()) {
    close_after = true;
    return make_error(0, "malformed_frame", "request needs integer id and string op").dump();
  }
  return dispatch(request).dump();
}

json Responder::dispatch(const json& request) {
  const std::int64_t id = request["id"].get<std::int64_t>();
  const std::string op = request["op"].get<std::string>();
  if (id <= last_id_)
    return make_error(id, "out_of_order_id",
                      "request id " + std::to_string(id) + " does not follow " + std::to_string(last_id_));
  last_id_ = id;

  const BackendCapabilities& caps = backend_->capabilities();
  auto require = [&](bool flag) {
    if (!flag) throw CapabilityError(op);
  };
  auto check_image = [&](const ImageTensor& img) {
    if (!(img.shape == caps.image_shape))
      throw ShapeMismatch("image shape " + img.shape.str() + " does not match " + caps.image_shape.str());
  };
  auto check_latent = [&](const LatentPoint& l) {
    if (l.layers != caps.latent_layers || l.dim != caps.latent_dim)
      throw ShapeMismatch("latent shape " + std::to_string(l.layers) + "x" + std::to_string(l.dim) +
                          " does not match " + std::to_string(caps.latent_layers) + "x" +
                          std::to_string(caps.latent_dim));
  };

  try {
    json reply = make_request(id, op);
    if (op == "hello") {
      const int version = request.value("protocol_version", -1);
      if (version != kVersion)
        return make_error(id, "version_mismatch",
                          "server speaks protocol " + std::to_string(kVersion) + ", client sent " +
                              std::to_string(version));
      reply.update(encode_capabilities(caps));
      reply["backend"] = backend_->identity();
    } else if (op == "encode") {
      require(caps.encode);
      const ImageTensor img = decode_image(request.at("image"));
      check_image(img);
      reply["latent"] = encode_latent(backend_->encode(img));
    } else if (op == "generate") {
      require(caps.generate);
      const LatentPoint latent = decode_latent(request.at("latent"));
      check_latent(latent);
      reply["image"] = encode_image(backend_->generate(latent));
    } else if (op == "features") {
      require(caps.features);
      const ImageTensor img = decode_image(request.at("image"));
      check_image(img);
      reply["features"] = encode_vector(backend_->features(img));
    } else if (op == "score") {
      require(caps.score);
      const ImageTensor img = decode_image(request.at("image"));
      check_image(img);
      reply["score"] = backend_->score(img);
    } else if (op == "grad_objective") {
      require(caps.grad_objective);
      const LatentPoint latent = decode_latent(request.at("latent"));
      check_latent(latent);
      const Eigen::VectorXd ref = decode_vector(request.at("ref_features"));
      if (ref.size() != caps.feature_dim) throw ShapeMismatch("ref_features length does not match feature_dim");
      reply["gradient"] = encode_vector(backend_->grad_objective(latent, decode_weights(request.at("weights")), ref));
    } else {
      return make_error(id, "unknown_op", "unknown op '" + op + "'");
    }
    return reply;
  } catch (const ModelError& e) {
    return make_error(id, e.code(), e.what());
  } catch (const ProtocolError& e) {
    return make_error(id, "malformed_request", e.what());
  } catch (const json::exception& e) {
    return make_error(id, "malformed_request", e.what());
  } catch (const std::exception& e) {
    return make_error(id, "backend_failure", e.what());
  }
}

}  // namespace latentopt::protocol
