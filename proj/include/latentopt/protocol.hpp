#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "latentopt/backend.hpp"
#include "latentopt/transport.hpp"

namespace latentopt::protocol {

using json = nlohmann::json;

inline constexpr int kVersion = 1;
inline constexpr std::size_t kMaxFrameBytes = 256u << 20;

/// 4-byte big-endian length prefix followed by the payload bytes.
std::string encode_frame(std::string_view payload);
/// Splits one frame off the front of `buffer`; returns false if incomplete.
bool try_decode_frame(std::string& buffer, std::string& payload);

void write_message(Transport& t, const json& message);
json read_message(Transport& t);

/// {"shape": [...], "dtype": "f32", "data": base64(little-endian float32)}
json encode_tensor(std::span<const double> values, const std::vector<int>& shape);

struct Tensor {
  std::vector<int> shape;
  std::vector<double> values;
};
Tensor decode_tensor(const json& j);

json encode_image(const ImageTensor& image);
ImageTensor decode_image(const json& j);
json encode_latent(const LatentPoint& latent);
LatentPoint decode_latent(const json& j);
json encode_vector(const Eigen::VectorXd& v);
Eigen::VectorXd decode_vector(const json& j);
json encode_weights(const LossWeights& w);
LossWeights decode_weights(const json& j);

/// hello response body (without id/op).
json encode_capabilities(const BackendCapabilities& caps);
BackendCapabilities decode_capabilities(const json& hello);

json make_request(std::int64_t id, std::string_view op);
json make_error(std::int64_t id, std::string_view code, std::string_view message);

/// Server side of the protocol for any Backend. Stateless apart from the
/// last request id, which must strictly increase per connection.
class Responder {
 public:
  explicit Responder(std::shared_ptr<Backend> backend);

  /// Returns the reply payload. Sets close_after on malformed input.
  std::string handle(std::string_view payload, bool& close_after);

 private:
  json dispatch(const json& request);

  std::shared_ptr<Backend> backend_;
  std::int64_t last_id_ = 0;
};

}  // namespace latentopt::protocol
