// SPDX-License-Identifier: Apache-2.0
#include "server/protocol.hpp"

#include <functional>
#include <map>

#include "common/error.hpp"
#include "frontend/optimize.hpp"

namespace hlsdbg::server {

namespace {

[[noreturn]] void badParams(const std::string& what) { throw Error(ErrorCode::InvalidParams, what); }

int64_t intParam(const json& params, const char* key) {
  auto it = params.find(key);
  if (it == params.end()) badParams(std::string("missing parameter '") + key + "'");
  if (!it->is_number_integer()) badParams(std::string("parameter '") + key + "' must be an integer");
  return it->get<int64_t>();
}

int lineParam(const json& params) {
  int64_t line = intParam(params, "line");
  if (line < INT32_MIN || line > INT32_MAX) badParams("line out of range");
  return static_cast<int>(line);
}

std::string stringParam(const json& params, const char* key, bool required) {
  auto it = params.find(key);
  if (it == params.end() || (!required && it->is_null())) {
    if (required) badParams(std::string("missing parameter '") + key + "'");
    return {};
  }
  if (!it->is_string()) badParams(std::string("parameter '") + key + "' must be a string");
  return it->get<std::string>();
}

json linesToJson(const std::set<int>& lines) { return json(std::vector<int>(lines.begin(), lines.end())); }

json statusToJson(const manager::SessionStatus& s) {
  return {
      {"mode", manager::modeName(s.mode)},
      {"deviceStatus", device::statusName(s.deviceStatus)},
      {"fault", device::faultName(s.fault)},
      {"timedOut", s.timedOut},
      {"deviceCycle", s.deviceCycle},
      {"position", s.position},
      {"state", s.state},
      {"window", s.window ? windowToJson(*s.window) : json(nullptr)},
      {"breakpoints", linesToJson(s.breakpoints)},
      {"replayBreakpoints", linesToJson(s.replayBreakpoints)},
      {"unitsUsed", s.unitsUsed},
      {"unitsTotal", s.unitsTotal},
      {"canRun", s.canRun},
  };
}

json namedViewToJson(const debugdb::VariableRecord& v, const trace::VariableView& view) {
  return {{"name", v.name}, {"scope", v.scope}, {"type", v.type}, {"view", viewToJson(view)}};
}

json positionResult(const manager::Session& s) {
  auto st = s.status();
  return {{"position", st.position}, {"state", st.state}, {"activeLines", linesToJson(s.activeLines())}};
}

json sourceInfo(const manager::Session& s) {
  const auto& db = s.db();
  json lines = json::array();
  for (const auto& l : db.lines) lines.push_back({{"lineNo", l.lineNo}, {"text", l.text}});
  json functions = json::array();
  for (const auto& f : db.functions)
    functions.push_back({{"name", f.name}, {"line", f.line}, {"endLine", f.endLine}, {"inlined", f.inlined}});
  json variables = json::array();
  for (const auto& v : db.variables) {
    json loc = v.location.kind == debugdb::LocationKind::OptimizedOut ? json("optimizedOut")
               : v.location.kind == debugdb::LocationKind::Register  ? json("register")
                                                                      : json("memory");
    variables.push_back({{"name", v.name}, {"scope", v.scope}, {"type", v.type}, {"location", loc}});
  }
  std::set<int> code;
  for (const auto& r : db.ir) code.insert(r.sourceLine);
  return {
      {"path", db.source.path},
      {"optLevel", frontend::optLevelName(db.optLevel)},
      {"lines", lines},
      {"functions", functions},
      {"variables", variables},
      {"codeLines", linesToJson(code)},
      {"methods", methodNames()},
  };
}

json irToJson(const debugdb::IrRecord& r) {
  return {{"id", r.id},         {"opcode", r.opcode}, {"operands", r.operands}, {"sourceLine", r.sourceLine},
          {"origin", r.origin}, {"function", r.function}};
}

json boxToJson(const manager::GanttBox& b) {
  return {{"irId", b.irId},           {"origin", b.origin},   {"sourceLine", b.sourceLine},
          {"stepStart", b.stepStart}, {"stepEnd", b.stepEnd}, {"instanceIndex", b.instanceIndex}};
}

}  // namespace

const std::vector<std::string>& methodNames() {
  static const std::vector<std::string> names = {
      "getSourceInfo", "getStatus",     "setBreakpoint", "clearBreakpoint", "run",         "pause",
      "stepForward",   "stepBackward",  "seek",          "readVariable",    "listVariables", "activeLines",
      "activeIr",      "ganttData",     "enterReplay",   "exitReplay",      "extendWindow", "getWindow",
      "reset",         "shutdown",
  };
  return names;
}

json viewToJson(const trace::VariableView& v) {
  json out = {{"kind", trace::viewKindName(v.kind)}};
  if (v.kind == trace::ViewKind::Known || v.kind == trace::ViewKind::FromMemory) out["value"] = v.value;
  if (!v.elements.empty()) {
    json elems = json::array();
    for (const auto& e : v.elements) elems.push_back(viewToJson(e));
    out["elements"] = elems;
  }
  return out;
}

json windowToJson(const trace::ReplayWindow& w) { return {{"startCycle", w.startCycle}, {"endCycle", w.endCycle}}; }

json eventToJson(const manager::Event& ev) {
  json payload = {{"cycle", ev.cycle}};
  switch (ev.kind) {
    case manager::EventKind::BreakpointHit: payload["line"] = ev.line; break;
    case manager::EventKind::WindowReady: payload["window"] = windowToJson(ev.window); break;
    case manager::EventKind::Paused:
    case manager::EventKind::Faulted: payload["reason"] = ev.reason; break;
    case manager::EventKind::Halted: break;
  }
  return {{"event", manager::eventName(ev.kind)}, {"payload", payload}};
}

json errorResponse(const json& id, std::string_view code, std::string_view message) {
  return {{"id", id}, {"error", {{"code", code}, {"message", message}}}};
}

std::optional<Request> parseRequest(std::string_view line, json& error) {
  json doc = json::parse(line.begin(), line.end(), nullptr, false);
  auto malformed = [&](const json& id, const std::string& why) {
    error = errorResponse(id, errorName(ErrorCode::MalformedRequest), why);
    return std::nullopt;
  };
  if (doc.is_discarded()) return malformed(nullptr, "request is not valid JSON");
  if (!doc.is_object()) return malformed(nullptr, "request must be a JSON object");
  json id = doc.contains("id") ? doc["id"] : json(nullptr);
  if (!id.is_number_integer()) return malformed(nullptr, "request id must be an integer");
  auto m = doc.find("method");
  if (m == doc.end() || !m->is_string()) return malformed(id, "request method must be a string");
  Request r{id, m->get<std::string>(), json::object()};
  if (auto p = doc.find("params"); p != doc.end() && !p->is_null()) {
    if (!p->is_object()) return malformed(id, "request params must be an object");
    r.params = *p;
  }
  return r;
}

json Dispatcher::handleLine(std::string_view line) {
  json error;
  auto req = parseRequest(line, error);
  if (!req) return error;
  return handle(*req);
}

json Dispatcher::handle(const Request& req) {
  try {
    return {{"id", req.id}, {"result", call(req.method, req.params)}};
  } catch (const Error& e) {
    return errorResponse(req.id, e.name(), e.what());
  } catch (const json::exception& e) {
    return errorResponse(req.id, errorName(ErrorCode::InvalidParams), e.what());
  } catch (const std::exception& e) {
    return errorResponse(req.id, errorName(ErrorCode::Internal), e.what());
  }
}

json Dispatcher::call(const std::string& method, const json& p) {
  auto& s = session_;
  if (method == "getSourceInfo") return sourceInfo(s);
  if (method == "getStatus") {
    json out = statusToJson(s.status());
    auto rv = s.returnValue();
    out["returnValue"] = rv ? json(*rv) : json(nullptr);
    return out;
  }
  if (method == "setBreakpoint") {
    int line = lineParam(p);
    s.setBreakpoint(line);
    return {{"line", line}, {"state", s.db().breakpointState(line)}};
  }
  if (method == "clearBreakpoint") {
    s.clearBreakpoint(lineParam(p));
    return json::object();
  }
  if (method == "run") {
    s.run();
    return statusToJson(s.status());
  }
  if (method == "pause") {
    // The reader has already raised the flag; acknowledging clears it.
    s.pause();
    return statusToJson(s.status());
  }
  if (method == "stepForward") {
    s.stepForward();
    return positionResult(s);
  }
  if (method == "stepBackward") {
    s.stepBackward();
    return positionResult(s);
  }
  if (method == "seek") {
    // Control steps and cycles coincide; "step" is an alias.
    auto r = s.seek(intParam(p, p.contains("step") && !p.contains("cycle") ? "step" : "cycle"));
    json out = positionResult(s);
    out["clamped"] = r.clamped;
    return out;
  }
  if (method == "readVariable") {
    auto name = stringParam(p, "name", true);
    auto scope = stringParam(p, "scope", false);
    auto view = s.readVariable(name, scope);
    json out = viewToJson(view);
    out["name"] = name;
    return out;
  }
  if (method == "listVariables") {
    json vars = json::array();
    for (const auto& nv : s.listVariables(stringParam(p, "scope", false)))
      vars.push_back(namedViewToJson(*nv.variable, nv.view));
    return {{"variables", vars}};
  }
  if (method == "activeLines") return {{"lines", linesToJson(s.activeLines())}};
  if (method == "activeIr") {
    json ir = json::array();
    for (const auto& r : s.activeIr()) ir.push_back(irToJson(r));
    return {{"ir", ir}};
  }
  if (method == "ganttData") {
    bool dynamic = false;
    if (auto it = p.find("dynamic"); it != p.end()) {
      if (!it->is_boolean()) badParams("parameter 'dynamic' must be a boolean");
      dynamic = it->get<bool>();
    }
    std::optional<std::pair<int64_t, int64_t>> range;
    if (p.contains("from") || p.contains("to")) range = std::make_pair(intParam(p, "from"), intParam(p, "to"));
    json boxes = json::array();
    for (const auto& b : s.ganttData(dynamic, range)) boxes.push_back(boxToJson(b));
    return {{"dynamic", dynamic}, {"boxes", boxes}};
  }
  if (method == "enterReplay") {
    s.enterReplay();
    return windowToJson(s.window());
  }
  if (method == "exitReplay") {
    s.exitReplay();
    return statusToJson(s.status());
  }
  if (method == "extendWindow") {
    s.extendWindow(intParam(p, "cycle"));
    return windowToJson(s.window());
  }
  if (method == "getWindow") return windowToJson(s.window());
  if (method == "reset") {
    s.reset();
    return statusToJson(s.status());
  }
  if (method == "shutdown") {
    shutdown_ = true;
    return json::object();
  }
  throw Error(ErrorCode::MethodNotFound, "no method '" + method + "'");
}

}  // namespace hlsdbg::server
