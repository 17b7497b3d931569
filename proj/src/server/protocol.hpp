// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "manager/manager.hpp"

namespace hlsdbg::server {

using json = nlohmann::json;

/// Every protocol method, in the order getSourceInfo lists them.
const std::vector<std::string>& methodNames();

json viewToJson(const trace::VariableView& v);
json windowToJson(const trace::ReplayWindow& w);
json eventToJson(const manager::Event& ev);
json errorResponse(const json& id, std::string_view code, std::string_view message);

/// A request that passed framing checks.
struct Request {
  json id;
  std::string method;
  json params = json::object();
};

/// Parses one line. On failure returns nullopt and sets `error` to the
/// MalformedRequest response (id echoed when it could be read).
std::optional<Request> parseRequest(std::string_view line, json& error);

/// Maps protocol methods onto one session. Not thread-safe; the command
/// processor owns it.
class Dispatcher {
 public:
  explicit Dispatcher(manager::Session& session) : session_(session) {}

  /// Exactly one response per request.
  json handle(const Request& request);
  json handleLine(std::string_view line);

  bool shutdownRequested() const { return shutdown_; }
  manager::Session& session() { return session_; }

 private:
  json call(const std::string& method, const json& params);

  manager::Session& session_;
  bool shutdown_ = false;
};

}  // namespace hlsdbg::server
