#pragma once

// Message channels between an auditor (or user) and a server.

#include <atomic>
#include <cstdint>
#include <string>
#include <thread>

#include "logitaudit/messages.h"

namespace logitaudit {

class Server;

class Transport {
 public:
  virtual ~Transport() = default;
  // Sends one message and waits for the reply. Throws Error(kProbeError)
  // when the channel fails.
  virtual Message exchange(const Message& message) = 0;
};

// Direct calls into a Server. With `use_codec` every message in both
// directions is encoded to a frame and decoded again.
class InProcessTransport : public Transport {
 public:
  explicit InProcessTransport(Server& server, bool use_codec = false)
      : server_(server), use_codec_(use_codec) {}
  Message exchange(const Message& message) override;

 private:
  Server& server_;
  bool use_codec_;
};

// Blocking client over one TCP connection (IPv4).
class TcpTransport : public Transport {
 public:
  TcpTransport(const std::string& host, std::uint16_t port);
  ~TcpTransport() override;
  TcpTransport(const TcpTransport&) = delete;
  TcpTransport& operator=(const TcpTransport&) = delete;
  Message exchange(const Message& message) override;

 private:
  int fd_ = -1;
};

// Serves a Server on 127.0.0.1 from a background thread, one connection at a
// time. Port 0 picks an ephemeral port.
class TcpListener {
 public:
  TcpListener(Server& server, std::uint16_t port = 0);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const { return port_; }
  void stop();

 private:
  void serve();

  Server& server_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread thread_;
};

}  // namespace logitaudit
