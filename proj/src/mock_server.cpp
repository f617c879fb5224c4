#include "latentopt/mock_server.hpp"

#include <cerrno>
#include <cstring>

#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include "latentopt/errors.hpp"
#include "latentopt/protocol.hpp"
#include "latentopt/toy_backend.hpp"

namespace latentopt {

namespace {

bool read_exact_fd(int fd, char* buf, std::size_t n) {
  std::size_t done = 0;
  while (done < n) {
    const ssize_t r = ::read(fd, buf + done, n - done);
    if (r < 0 && errno == EINTR) continue;
    if (r <= 0) return false;
    done += static_cast<std::size_t>(r);
  }
  return true;
}

bool write_all_fd(int fd, const std::string& bytes) {
  std::size_t done = 0;
  while (done < bytes.size()) {
    ssize_t w = ::send(fd, bytes.data() + done, bytes.size() - done, MSG_NOSIGNAL);
    if (w < 0 && errno == ENOTSOCK) w = ::write(fd, bytes.data() + done, bytes.size() - done);
    if (w < 0 && errno == EINTR) continue;
    if (w <= 0) return false;
    done += static_cast<std::size_t>(w);
  }
  return true;
}

}  // namespace

MockServer::MockServer(std::shared_ptr<Backend> backend) : backend_(std::move(backend)) {
  if (!backend_) backend_ = std::make_shared<ToyBackend>(default_toy_model());
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw TransportError(std::string("socket: ") + std::strerror(errno));
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(listen_fd_, 8) != 0) {
    ::close(listen_fd_);
    throw TransportError(std::string("bind/listen: ") + std::strerror(errno));
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  thread_ = std::thread([this] { serve(); });
}

MockServer::~MockServer() {
  stopping_ = true;
  if (thread_.joinable()) thread_.join();
  ::close(listen_fd_);
}

void MockServer::serve() {
  while (!stopping_) {
    pollfd pfd{listen_fd_, POLLIN, 0};
    if (::poll(&pfd, 1, 50) <= 0) continue;
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    std::lock_guard lock(connections_mutex_);
    connections_.emplace_back([this, fd] { serve_connection(fd); });
  }
  std::lock_guard lock(connections_mutex_);
  connections_.clear();  // joins
}

void MockServer::serve_connection(int fd) {
  serve_stream(backend_, fd, fd, &stopping_);
  ::close(fd);
}

void serve_stream(std::shared_ptr<Backend> backend, int in_fd, int out_fd, const std::atomic<bool>* stop) {
  protocol::Responder responder(std::move(backend));
  for (;;) {
    pollfd cfd{in_fd, POLLIN, 0};
    const int ready = ::poll(&cfd, 1, 50);
    if (stop && *stop) break;
    if (ready <= 0) continue;
    char header[4];
    if (!read_exact_fd(in_fd, header, 4)) break;
    const std::uint32_t n = (static_cast<std::uint32_t>(static_cast<unsigned char>(header[0])) << 24) |
                            (static_cast<std::uint32_t>(static_cast<unsigned char>(header[1])) << 16) |
                            (static_cast<std::uint32_t>(static_cast<unsigned char>(header[2])) << 8) |
                            static_cast<std::uint32_t>(static_cast<unsigned char>(header[3]));
    bool close_after = false;
    std::string reply;
    if (n > protocol::kMaxFrameBytes) {
      reply = protocol::make_error(0, "malformed_frame", "frame too large").dump();
      close_after = true;
    } else {
      std::string payload(n, '\0');
      if (!read_exact_fd(in_fd, payload.data(), n)) break;
      reply = responder.handle(payload, close_after);
    }
    if (!write_all_fd(out_fd, protocol::encode_frame(reply)) || close_after) break;
  }
}

}  // namespace latentopt
