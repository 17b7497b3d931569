// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <string>

#include "manager/manager.hpp"

namespace hlsdbg::server {

/// Unbounded FIFO between two threads; pop() returns nullopt once closed
/// and drained.
template <typename T>
class Channel {
 public:
  void push(T item) {
    {
      std::lock_guard lock(mu_);
      if (closed_) return;
      items_.push_back(std::move(item));
    }
    cv_.notify_one();
  }
  std::optional<T> pop() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return closed_ || !items_.empty(); });
    if (items_.empty()) return std::nullopt;
    T item = std::move(items_.front());
    items_.pop_front();
    return item;
  }
  void close() {
    {
      std::lock_guard lock(mu_);
      closed_ = true;
    }
    cv_.notify_all();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<T> items_;
  bool closed_ = false;
};

/// Newline-delimited JSON over TCP, one client at a time. Per connection a
/// reader thread frames lines, the serving thread runs commands against the
/// session, and a writer thread sends responses and events in order.
class Server {
 public:
  static constexpr size_t kMaxLine = 1 << 20;

  /// Binds and listens; port 0 picks a free port. Throws PortInUse.
  Server(manager::Session& session, uint16_t port, const std::string& host = "127.0.0.1");
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  uint16_t port() const { return port_; }
  /// Serves clients until a shutdown request or stop().
  void serve();
  /// Safe from any thread.
  void stop();

 private:
  /// Returns true when the client asked for shutdown.
  bool handleClient(int fd);

  manager::Session& session_;
  int listenFd_ = -1;
  uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::atomic<int> clientFd_{-1};
};

}  // namespace hlsdbg::server
