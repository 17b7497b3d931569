// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "server/protocol.hpp"

namespace hlsdbg::server {

/// Text front end over the protocol: each command becomes one request and
/// the printed text is rendered from the response and the events it caused.
class Repl {
 public:
  explicit Repl(Dispatcher& dispatcher);
  ~Repl();
  Repl(const Repl&) = delete;
  Repl& operator=(const Repl&) = delete;

  /// Output for one input line, newline-terminated; empty for blank input.
  std::string execute(std::string_view line);
  bool done() const { return done_; }

  /// The request a command line translates to; nullopt for local commands
  /// (help, quit) and unknown input. Sets `error` for unknown input.
  static std::optional<Request> translate(std::string_view line, std::string& error);

  static std::string formatView(const std::string& name, const json& view);
  static std::string formatEvent(const json& event);

 private:
  std::string format(const Request& req, const json& response) const;

  Dispatcher& dispatcher_;
  std::vector<json> pending_;
  int token_ = -1;
  int nextId_ = 1;
  bool done_ = false;
};

}  // namespace hlsdbg::server
