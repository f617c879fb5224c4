#pragma once

#include <atomic>
#include <list>
#include <mutex>
#include <string>
#include <memory>
#include <thread>

#include "latentopt/backend.hpp"

namespace latentopt {

/// Protocol server on 127.0.0.1 backed by any Backend (the toy model by
/// default). Each connection gets its own thread, so the backend must
/// tolerate concurrent calls; the toy backend does.
class MockServer {
 public:
  explicit MockServer(std::shared_ptr<Backend> backend = nullptr);
  ~MockServer();
  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  int port() const { return port_; }
  std::string endpoint() const { return "tcp://127.0.0.1:" + std::to_string(port_); }

 private:
  void serve();
  void serve_connection(int fd);

  std::shared_ptr<Backend> backend_;
  int listen_fd_ = -1;
  int port_ = 0;
  std::atomic<bool> stopping_{false};
  std::mutex connections_mutex_;
  std::list<std::jthread> connections_;
  std::thread thread_;
};

/// Answers framed requests read from `in_fd` on `out_fd` until end of input,
/// a malformed frame, or `stop` turning true. Used for stdio servers.
void serve_stream(std::shared_ptr<Backend> backend, int in_fd, int out_fd, const std::atomic<bool>* stop = nullptr);

}  // namespace latentopt
