// SPDX-License-Identifier: Apache-2.0
#include "server/server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <thread>

#include "common/error.hpp"
#include "server/protocol.hpp"

namespace hlsdbg::server {

namespace {

void sendAll(int fd, const std::string& data) {
  size_t off = 0;
  while (off < data.size()) {
    ssize_t n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return;  // peer went away; the reader sees EOF
    off += static_cast<size_t>(n);
  }
}

// What the reader hands the serving thread: a framed line, or an
// over-long line that was dropped.
struct Inbound {
  std::string line;
  bool overflow = false;
};

}  // namespace

Server::Server(manager::Session& session, uint16_t port, const std::string& host) : session_(session) {
  listenFd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listenFd_ < 0) throw Error(ErrorCode::IoError, std::string("socket: ") + std::strerror(errno));
  int yes = 1;
  ::setsockopt(listenFd_, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(listenFd_);
    throw Error(ErrorCode::InvalidParams, "bad listen address " + host);
  }
  if (::bind(listenFd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
    int err = errno;
    ::close(listenFd_);
    if (err == EADDRINUSE || err == EACCES)
      throw Error(ErrorCode::PortInUse, "port " + std::to_string(port) + " is unavailable: " + std::strerror(err));
    throw Error(ErrorCode::IoError, std::string("bind: ") + std::strerror(err));
  }
  if (::listen(listenFd_, 4) < 0) {
    int err = errno;
    ::close(listenFd_);
    throw Error(ErrorCode::IoError, std::string("listen: ") + std::strerror(err));
  }
  socklen_t len = sizeof addr;
  ::getsockname(listenFd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

Server::~Server() {
  if (listenFd_ >= 0) ::close(listenFd_);
}

void Server::stop() {
  stopping_ = true;
  int fd = clientFd_.load();
  if (fd >= 0) ::shutdown(fd, SHUT_RDWR);
}

void Server::serve() {
  while (!stopping_) {
    pollfd p{listenFd_, POLLIN, 0};
    int ready = ::poll(&p, 1, 100);
    if (ready <= 0) continue;
    int fd = ::accept(listenFd_, nullptr, nullptr);
    if (fd < 0) continue;
    // Replies are small and latency-bound.
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    clientFd_ = fd;
    if (stopping_) ::shutdown(fd, SHUT_RDWR);
    bool shutdown = handleClient(fd);
    clientFd_ = -1;
    ::close(fd);
    if (shutdown) break;
  }
}

bool Server::handleClient(int fd) {
  Channel<Inbound> commands;
  Channel<std::string> outbound;

  std::thread writer([&] {
    while (auto msg = outbound.pop()) sendAll(fd, *msg);
  });

  std::thread reader([&] {
    std::string buf;
    bool discarding = false;
    char chunk[4096];
    for (;;) {
      ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) break;
      for (ssize_t i = 0; i < n; ++i) {
        char c = chunk[i];
        if (c != '\n') {
          if (discarding) continue;
          buf.push_back(c);
          if (buf.size() > kMaxLine) {
            buf.clear();
            discarding = true;
            commands.push({{}, true});
          }
          continue;
        }
        if (discarding) {
          discarding = false;
          continue;
        }
        if (!buf.empty() && buf.back() == '\r') buf.pop_back();
        // Pause must reach a run in progress, so it bypasses the queue;
        // the queued copy still gets its response in order.
        json ignored;
        if (auto req = parseRequest(buf, ignored); req && req->method == "pause") session_.requestPause();
        commands.push({std::move(buf), false});
        buf.clear();
      }
    }
    commands.close();
  });

  Dispatcher dispatcher(session_);
  int token = session_.subscribe([&](const manager::Event& ev) { outbound.push(eventToJson(ev).dump() + "\n"); });
  while (auto in = commands.pop()) {
    json response;
    if (in->overflow)
      response = errorResponse(nullptr, errorName(ErrorCode::MalformedRequest), "request line too long");
    else if (in->line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    else
      response = dispatcher.handleLine(in->line);
    outbound.push(response.dump(-1, ' ', false, json::error_handler_t::replace) + "\n");
    if (dispatcher.shutdownRequested()) {
      stopping_ = true;
      ::shutdown(fd, SHUT_RD);
      break;
    }
  }
  session_.unsubscribe(token);
  outbound.close();
  writer.join();
  ::shutdown(fd, SHUT_RDWR);
  reader.join();
  return dispatcher.shutdownRequested();
}

}  // namespace hlsdbg::server
