#include "logitaudit/transport.h"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "logitaudit/error.h"
#include "logitaudit/server.h"

namespace logitaudit {
namespace {

bool write_all(int fd, const std::uint8_t* data, std::size_t n) {
  while (n > 0) {
    const ssize_t w = ::send(fd, data, n, MSG_NOSIGNAL);
    if (w < 0 && errno == EINTR) continue;
    if (w <= 0) return false;
    data += w;
    n -= static_cast<std::size_t>(w);
  }
  return true;
}

bool read_all(int fd, std::uint8_t* data, std::size_t n) {
  while (n > 0) {
    const ssize_t r = ::recv(fd, data, n, 0);
    if (r < 0 && errno == EINTR) continue;
    if (r <= 0) return false;
    data += r;
    n -= static_cast<std::size_t>(r);
  }
  return true;
}

// Reads one frame; nullopt on a closed or broken connection.
std::optional<std::vector<std::uint8_t>> read_frame(int fd) {
  std::vector<std::uint8_t> frame(4);
  if (!read_all(fd, frame.data(), 4)) return std::nullopt;
  std::uint32_t n = 0;
  for (int i = 0; i < 4; ++i) n = (n << 8) | frame[i];
  if (n > kMaxFrameBytes) return std::nullopt;
  frame.resize(4 + n);
  if (!read_all(fd, frame.data() + 4, n)) return std::nullopt;
  return frame;
}

}  // namespace

Message InProcessTransport::exchange(const Message& message) {
  if (!use_codec_) return server_.handle(message);
  const Message in = decode_frame(encode_frame(message));
  return decode_frame(encode_frame(server_.handle(in)));
}

TcpTransport::TcpTransport(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0 || !res) {
    throw Error(ErrorCode::kProbeError, "cannot resolve " + host);
  }
  fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  const bool ok = fd_ >= 0 && ::connect(fd_, res->ai_addr, res->ai_addrlen) == 0;
  const int err = errno;
  ::freeaddrinfo(res);
  if (!ok) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
    throw Error(ErrorCode::kProbeError, "cannot connect to " + host + ":" + std::to_string(port) +
                                            ": " + std::strerror(err));
  }
}

TcpTransport::~TcpTransport() {
  if (fd_ >= 0) ::close(fd_);
}

Message TcpTransport::exchange(const Message& message) {
  const auto out = encode_frame(message);
  if (!write_all(fd_, out.data(), out.size())) {
    throw Error(ErrorCode::kProbeError, "connection lost while sending");
  }
  const auto reply = read_frame(fd_);
  if (!reply) throw Error(ErrorCode::kProbeError, "connection lost while receiving");
  return decode_frame(*reply);
}

TcpListener::TcpListener(Server& server, std::uint16_t port) : server_(server) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw Error(ErrorCode::kProbeError, "socket() failed");
  const int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  socklen_t len = sizeof addr;
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
      ::listen(listen_fd_, 8) != 0 ||
      ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
    const int err = errno;
    ::close(listen_fd_);
    throw Error(ErrorCode::kProbeError, std::string("cannot listen: ") + std::strerror(err));
  }
  port_ = ntohs(addr.sin_port);
  thread_ = std::thread([this] { serve(); });
}

TcpListener::~TcpListener() { stop(); }

void TcpListener::stop() {
  if (stopping_.exchange(true)) return;
  if (thread_.joinable()) thread_.join();
  ::close(listen_fd_);
}

void TcpListener::serve() {
  while (!stopping_) {
    pollfd p{listen_fd_, POLLIN, 0};
    if (::poll(&p, 1, 50) <= 0) continue;
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    while (!stopping_) {
      pollfd c{fd, POLLIN, 0};
      const int ready = ::poll(&c, 1, 50);
      if (ready == 0) continue;
      if (ready < 0) break;
      const auto frame = read_frame(fd);
      if (!frame) break;
      Message reply;
      try {
        reply = server_.handle(decode_frame(*frame));
      } catch (const Error& e) {
        reply = ErrorMsg{RequestId{}, std::string(error_code_name(e.code())), e.what()};
      }
      const auto out = encode_frame(reply);
      if (!write_all(fd, out.data(), out.size())) break;
    }
    ::close(fd);
  }
}

}  // namespace logitaudit
