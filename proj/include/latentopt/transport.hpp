#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <string_view>

namespace latentopt {

/// Reliable byte stream to a model backend. Failures throw TransportError.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual void write_all(std::string_view bytes) = 0;
  /// Blocks until exactly n bytes arrived.
  virtual std::string read_exact(std::size_t n) = 0;
};

/// TCP client connection.
std::unique_ptr<Transport> tcp_connect(const std::string& host, int port);

/// Runs `command` through /bin/sh -c and talks to its stdin/stdout.
std::unique_ptr<Transport> spawn_subprocess(const std::string& command);

/// In-process peer: each complete frame written is handed to `handler`,
/// whose reply payload is framed and queued for reading. When the handler
/// sets close_after, later writes and reads past the queue fail as if the
/// peer hung up.
using FrameHandler = std::function<std::string(std::string_view payload, bool& close_after)>;
std::unique_ptr<Transport> loopback(FrameHandler handler);

/// Decorator recording every byte in each direction.
class RecordingTransport final : public Transport {
 public:
  explicit RecordingTransport(std::unique_ptr<Transport> inner) : inner_(std::move(inner)) {}
  void write_all(std::string_view bytes) override;
  std::string read_exact(std::size_t n) override;

  const std::string& sent() const { return sent_; }
  const std::string& received() const { return received_; }

 private:
  std::unique_ptr<Transport> inner_;
  std::string sent_;
  std::string received_;
};

}  // namespace latentopt
