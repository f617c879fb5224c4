#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "latentopt/backend.hpp"
#include "latentopt/toy_backend.hpp"

namespace latentopt::protocol {

/// The fixed client script behind the conformance fixtures: 15 requests with
/// ids 1..14, the last one reusing id 14. Covers hello, every op, and the
/// shape_mismatch, unknown_op, malformed_request and out_of_order_id errors.
std::vector<nlohmann::json> conformance_requests(const ToyModel& model);

struct Transcript {
  std::string client_to_server;  // framed requests, back to back
  std::string server_to_client;  // framed replies, back to back
  /// One entry per frame: {"frame", "direction", "offset", "length", "id", "op"}.
  nlohmann::json index = nlohmann::json::array();
};

/// Plays the script against a Responder over `backend` through the
/// in-process transport and records both byte streams.
Transcript record_conformance(std::shared_ptr<Backend> backend, const ToyModel& model);

}  // namespace latentopt::protocol
