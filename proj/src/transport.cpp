#include "latentopt/transport.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>

#include <fcntl.h>
#include <netdb.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include "latentopt/errors.hpp"
#include "latentopt/protocol.hpp"

namespace latentopt {

namespace {

std::string errno_text() { return std::strerror(errno); }

void ignore_sigpipe() {
  static const bool once = [] {
    std::signal(SIGPIPE, SIG_IGN);
    return true;
  }();
  (void)once;
}

void write_fd(int fd, std::string_view bytes, bool socket) {
  std::size_t done = 0;
  while (done < bytes.size()) {
    const ssize_t n = socket ? ::send(fd, bytes.data() + done, bytes.size() - done, MSG_NOSIGNAL)
                             : ::write(fd, bytes.data() + done, bytes.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError("write failed: " + errno_text());
    }
    done += static_cast<std::size_t>(n);
  }
}

std::string read_fd(int fd, std::size_t count) {
  std::string out(count, '\0');
  std::size_t done = 0;
  while (done < count) {
    const ssize_t n = ::read(fd, out.data() + done, count - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError("read failed: " + errno_text());
    }
    if (n == 0) throw TransportError("connection closed by peer");
    done += static_cast<std::size_t>(n);
  }
  return out;
}

class TcpTransport final : public Transport {
 public:
  explicit TcpTransport(int fd) : fd_(fd) {}
  ~TcpTransport() override { ::close(fd_); }
  TcpTransport(const TcpTransport&) = delete;
  TcpTransport& operator=(const TcpTransport&) = delete;

  void write_all(std::string_view bytes) override { write_fd(fd_, bytes, true); }
  std::string read_exact(std::size_t n) override { return read_fd(fd_, n); }

 private:
  int fd_;
};

class SubprocessTransport final : public Transport {
 public:
  SubprocessTransport(pid_t pid, int to_child, int from_child) : pid_(pid), to_child_(to_child), from_child_(from_child) {}
  ~SubprocessTransport() override {
    ::close(to_child_);
    ::close(from_child_);
    int status = 0;
    ::waitpid(pid_, &status, 0);
  }
  SubprocessTransport(const SubprocessTransport&) = delete;
  SubprocessTransport& operator=(const SubprocessTransport&) = delete;

  void write_all(std::string_view bytes) override { write_fd(to_child_, bytes, false); }
  std::string read_exact(std::size_t n) override { return read_fd(from_child_, n); }

 private:
  pid_t pid_;
  int to_child_;
  int from_child_;
};

class LoopbackTransport final : public Transport {
 public:
  explicit LoopbackTransport(FrameHandler handler) : handler_(std::move(handler)) {}

  void write_all(std::string_view bytes) override {
    if (closed_) throw TransportError("connection closed by peer");
    inbound_.append(bytes);
    std::string payload;
    while (!closed_ && protocol::try_decode_frame(inbound_, payload)) {
      bool close_after = false;
      const std::string reply = handler_(payload, close_after);
      outbound_ += protocol::encode_frame(reply);
      closed_ = close_after;
    }
  }

  std::string read_exact(std::size_t n) override {
    if (outbound_.size() < n) throw TransportError("connection closed by peer");
    std::string out = outbound_.substr(0, n);
    outbound_.erase(0, n);
    return out;
  }

 private:
  FrameHandler handler_;
  std::string inbound_;
  std::string outbound_;
  bool closed_ = false;
};

}  // namespace

std::unique_ptr<Transport> tcp_connect(const std::string& host, int port) {
  ignore_sigpipe();
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* result = nullptr;
  const std::string service = std::to_string(port);
  if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &result); rc != 0)
    throw TransportError("cannot resolve " + host + ": " + ::gai_strerror(rc));
  std::string last_error = "no addresses";
  for (addrinfo* ai = result; ai != nullptr; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) {
      last_error = errno_text();
      continue;
    }
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
      ::freeaddrinfo(result);
      return std::make_unique<TcpTransport>(fd);
    }
    last_error = errno_text();
    ::close(fd);
  }
  ::freeaddrinfo(result);
  throw TransportError("cannot connect to " + host + ":" + service + ": " + last_error);
}

std::unique_ptr<Transport> spawn_subprocess(const std::string& command) {
  ignore_sigpipe();
  int in_pipe[2];
  int out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw TransportError("pipe failed: " + errno_text());
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw TransportError("pipe failed: " + errno_text());
  }
  const pid_t pid = ::fork();
  if (pid < 0) throw TransportError("fork failed: " + errno_text());
  if (pid == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  return std::make_unique<SubprocessTransport>(pid, in_pipe[1], out_pipe[0]);
}

std::unique_ptr<Transport> loopback(FrameHandler handler) {
  return std::make_unique<LoopbackTransport>(std::move(handler));
}

void RecordingTransport::write_all(std::string_view bytes) {
  sent_.append(bytes);
  inner_->write_all(bytes);
}

std::string RecordingTransport::read_exact(std::size_t n) {
  std::string out = inner_->read_exact(n);
  received_ += out;
  return out;
}

}  // namespace latentopt
