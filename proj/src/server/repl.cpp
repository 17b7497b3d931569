// SPDX-License-Identifier: Apache-2.0
#include "server/repl.hpp"

#include <charconv>
#include <sstream>

namespace hlsdbg::server {

namespace {

constexpr const char* kHelp =
    "commands:\n"
    "  b LINE        set a breakpoint        d LINE      clear a breakpoint\n"
    "  run           run to a breakpoint     pause       acknowledge a pause\n"
    "  s             step forward            rs          step backward\n"
    "  seek N        go to cycle N           p VAR [FN]  print a variable\n"
    "  vars [FN]     print all variables     lines       active source lines\n"
    "  ir            active IR               gantt [dyn] Gantt boxes\n"
    "  replay        enter replay            live        back to live\n"
    "  extend N      extend the window to N  window      show the window\n"
    "  status        session status          reset       reset the device\n"
    "  quit\n";

std::vector<std::string> words(std::string_view line) {
  std::istringstream in{std::string(line)};
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::optional<int64_t> number(const std::string& s) {
  int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string joinLines(const json& lines) {
  std::string out;
  for (const auto& l : lines) out += (out.empty() ? "" : ",") + std::to_string(l.get<int>());
  return out.empty() ? "-" : out;
}

std::string formatWindow(const json& w) {
  return "replay window [" + std::to_string(w.at("startCycle").get<uint64_t>()) + ", " +
         std::to_string(w.at("endCycle").get<uint64_t>()) + "]";
}

std::string formatPosition(const json& r) {
  return "cycle " + std::to_string(r.at("position").get<uint64_t>()) + "  state " +
         std::to_string(r.at("state").get<int>()) + "  lines " + joinLines(r.at("activeLines"));
}

std::string scalar(const json& view) {
  std::string kind = view.at("kind");
  if (kind == "Known" || kind == "FromMemory") return std::to_string(view.at("value").get<int32_t>());
  if (kind == "OptimizedOut") return "<optimized out>";
  return "<unknown>";
}

}  // namespace

Repl::Repl(Dispatcher& dispatcher) : dispatcher_(dispatcher) {
  token_ = dispatcher_.session().subscribe([this](const manager::Event& ev) { pending_.push_back(eventToJson(ev)); });
}

Repl::~Repl() { dispatcher_.session().unsubscribe(token_); }

std::optional<Request> Repl::translate(std::string_view line, std::string& error) {
  auto w = words(line);
  error.clear();
  if (w.empty()) return std::nullopt;
  const std::string& cmd = w[0];
  auto req = [&](std::string method, json params = json::object()) {
    return std::optional<Request>(Request{json(0), std::move(method), std::move(params)});
  };
  auto needNumber = [&](const char* key) -> std::optional<Request> {
    if (w.size() != 2 || !number(w[1])) {
      error = "usage: " + cmd + " N";
      return std::nullopt;
    }
    return Request{json(0), "", json{{key, *number(w[1])}}};
  };
  auto noArgs = [&](const char* method) -> std::optional<Request> {
    if (w.size() != 1) {
      error = "usage: " + cmd;
      return std::nullopt;
    }
    return req(method);
  };
  if (cmd == "b" || cmd == "break" || cmd == "d" || cmd == "clear") {
    auto r = needNumber("line");
    if (r) r->method = cmd[0] == 'b' ? "setBreakpoint" : "clearBreakpoint";
    return r;
  }
  if (cmd == "seek" || cmd == "extend") {
    auto r = needNumber("cycle");
    if (r) r->method = cmd == "seek" ? "seek" : "extendWindow";
    return r;
  }
  if (cmd == "p" || cmd == "print") {
    if (w.size() < 2 || w.size() > 3) {
      error = "usage: p VAR [FUNCTION]";
      return std::nullopt;
    }
    json params = {{"name", w[1]}};
    if (w.size() == 3) params["scope"] = w[2];
    return req("readVariable", params);
  }
  if (cmd == "vars") {
    json params = json::object();
    if (w.size() == 2) params["scope"] = w[1];
    return req("listVariables", params);
  }
  if (cmd == "gantt") {
    bool dynamic = w.size() > 1 && (w[1] == "dyn" || w[1] == "dynamic");
    return req("ganttData", {{"dynamic", dynamic}});
  }
  if (cmd == "run" || cmd == "c") return noArgs("run");
  if (cmd == "s" || cmd == "step") return noArgs("stepForward");
  if (cmd == "rs") return noArgs("stepBackward");
  if (cmd == "pause") return noArgs("pause");
  if (cmd == "lines") return noArgs("activeLines");
  if (cmd == "ir") return noArgs("activeIr");
  if (cmd == "replay") return noArgs("enterReplay");
  if (cmd == "live") return noArgs("exitReplay");
  if (cmd == "window") return noArgs("getWindow");
  if (cmd == "status") return noArgs("getStatus");
  if (cmd == "reset") return noArgs("reset");
  if (cmd == "help" || cmd == "quit" || cmd == "q" || cmd == "exit") return std::nullopt;
  error = "unknown command '" + cmd + "'; try help";
  return std::nullopt;
}

std::string Repl::formatView(const std::string& name, const json& view) {
  std::string kind = view.at("kind");
  std::string value;
  if (view.contains("elements")) {
    value = "[";
    bool first = true;
    for (const auto& e : view.at("elements")) {
      value += (first ? "" : ", ") + (e.at("kind") == "UnknownBeforeFirstUpdate" ? std::string("?") : scalar(e));
      first = false;
    }
    value += "]";
  } else {
    value = scalar(view);
  }
  return name + " = " + value + " (" + kind + ")";
}

std::string Repl::formatEvent(const json& ev) {
  const std::string name = ev.at("event");
  const json& p = ev.at("payload");
  std::string cycle = std::to_string(p.at("cycle").get<uint64_t>());
  if (name == "breakpointHit") return "breakpoint hit at line " + std::to_string(p.at("line").get<int>()) + " (cycle " + cycle + ")";
  if (name == "paused") return "paused at cycle " + cycle + " (" + p.at("reason").get<std::string>() + ")";
  if (name == "halted") return "halted at cycle " + cycle;
  if (name == "faulted") return "faulted at cycle " + cycle + " (" + p.at("reason").get<std::string>() + ")";
  if (name == "windowReady") return formatWindow(p.at("window")) + " at cycle " + cycle;
  return name;
}

std::string Repl::format(const Request& req, const json& response) const {
  if (response.contains("error")) {
    const auto& e = response.at("error");
    return "error: " + e.at("code").get<std::string>() + ": " + e.at("message").get<std::string>();
  }
  const json& r = response.at("result");
  const std::string& m = req.method;
  if (m == "setBreakpoint")
    return "breakpoint at line " + std::to_string(r.at("line").get<int>()) + " (state " +
           std::to_string(r.at("state").get<int>()) + ")";
  if (m == "clearBreakpoint") return "cleared line " + std::to_string(req.params.at("line").get<int64_t>());
  if (m == "stepForward" || m == "stepBackward") return formatPosition(r);
  if (m == "seek") return formatPosition(r) + (r.at("clamped").get<bool>() ? "  (clamped)" : "");
  if (m == "readVariable") return formatView(r.at("name"), r);
  if (m == "listVariables") {
    std::string out;
    for (const auto& v : r.at("variables"))
      out += (out.empty() ? "" : "\n") + v.at("scope").get<std::string>() + "::" +
             formatView(v.at("name"), v.at("view"));
    return out.empty() ? "no variables" : out;
  }
  if (m == "activeLines") return "lines " + joinLines(r.at("lines"));
  if (m == "activeIr") {
    std::string out;
    for (const auto& i : r.at("ir"))
      out += (out.empty() ? "" : "\n") + std::string("  %") + std::to_string(i.at("id").get<int>()) + "  " +
             i.at("opcode").get<std::string>() + " " + i.at("operands").get<std::string>() + "  (line " +
             std::to_string(i.at("sourceLine").get<int>()) + ")";
    return out.empty() ? "no active IR" : out;
  }
  if (m == "ganttData") {
    std::string out;
    for (const auto& b : r.at("boxes"))
      out += (out.empty() ? "" : "\n") + std::string("  line ") + std::to_string(b.at("sourceLine").get<int>()) +
             "  ir " + std::to_string(b.at("irId").get<int>()) + "  steps " +
             std::to_string(b.at("stepStart").get<int64_t>()) + "-" + std::to_string(b.at("stepEnd").get<int64_t>()) +
             "  #" + std::to_string(b.at("instanceIndex").get<int>());
    return out.empty() ? "no boxes" : out;
  }
  if (m == "getWindow") return formatWindow(r);
  if (m == "exitReplay") return "live mode";
  if (m == "getStatus" || m == "reset" || m == "pause") {
    std::string out = std::string(r.at("mode")) + "  " + std::string(r.at("deviceStatus")) + "  cycle " +
                      std::to_string(r.at("position").get<uint64_t>()) + "  units " +
                      std::to_string(r.at("unitsUsed").get<int>()) + "/" + std::to_string(r.at("unitsTotal").get<int>());
    if (!r.at("window").is_null()) out += "  " + formatWindow(r.at("window"));
    return out;
  }
  // run, enterReplay and extendWindow report through their events.
  return {};
}

std::string Repl::execute(std::string_view line) {
  std::string error;
  auto req = translate(line, error);
  if (!req) {
    auto w = words(line);
    if (!error.empty()) return "error: " + error + "\n";
    if (w.empty()) return {};
    if (w[0] == "help") return kHelp;
    done_ = true;
    return {};
  }
  req->id = nextId_++;
  pending_.clear();
  json response = dispatcher_.handle(*req);
  std::string out;
  for (const auto& ev : pending_) out += formatEvent(ev) + "\n";
  pending_.clear();
  std::string body = format(*req, response);
  if (!body.empty()) out += body + "\n";
  return out;
}

}  // namespace hlsdbg::server
