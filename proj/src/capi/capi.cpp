// SPDX-License-Identifier: Apache-2.0
#include "hlsdbg/hlsdbg.h"

#include <cstdlib>
#include <cstring>
#include <memory>

#include "common/error.hpp"
#include "server/bundle.hpp"
#include "server/protocol.hpp"
#include "server/repl.hpp"
#include "server/server.hpp"

using namespace hlsdbg;

struct hlsdbg_bundle {
  server::Bundle bundle;
};

struct hlsdbg_session {
  explicit hlsdbg_session(const server::Bundle& b) : session(b.db, b.config.session()), dispatcher(session) {}
  hlsdbg_session(const server::Bundle& b, trace::TraceCapture capture)
      : session(b.db, std::move(capture), b.config.session()), dispatcher(session) {}
  manager::Session session;
  server::Dispatcher dispatcher;
  std::unique_ptr<server::Repl> repl;
  int eventToken = -1;
};

struct hlsdbg_server {
  std::unique_ptr<server::Server> server;
};

static_assert(static_cast<int>(ErrorCode::SyntaxError) + 1 == HLSDBG_E_SYNTAX_ERROR);
static_assert(static_cast<int>(ErrorCode::Internal) + 1 == HLSDBG_E_INTERNAL);

namespace {

thread_local std::string lastError;
thread_local int lastErrorLine = 0;

int fail(int status, std::string message, int line = 0) {
  lastError = std::move(message);
  lastErrorLine = line;
  return status;
}

int statusOf(ErrorCode code) { return static_cast<int>(code) + 1; }

// Runs `fn`, mapping exceptions to status codes and the thread's last error.
template <typename Fn>
int guarded(Fn&& fn) {
  try {
    lastError.clear();
    lastErrorLine = 0;
    return fn();
  } catch (const Error& e) {
    return fail(statusOf(e.code()), e.what(), e.line());
  } catch (const std::bad_alloc&) {
    return fail(HLSDBG_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(HLSDBG_E_INTERNAL, e.what());
  }
}

char* copyOut(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

server::BundleConfig fromC(const hlsdbg_config& c) {
  server::BundleConfig b;
  b.trace = {c.trace_control, c.trace_data};
  b.breakpointUnits = c.breakpoint_units;
  if (c.opt_level != HLSDBG_O0 && c.opt_level != HLSDBG_O2)
    throw Error(ErrorCode::InvalidParams, "opt_level must be 0 or 2");
  b.optLevel = c.opt_level == HLSDBG_O2 ? frontend::OptLevel::O2 : frontend::OptLevel::O0;
  b.maxCycles = c.max_cycles;
  if (b.trace.capacityRecords == 0 || b.trace.capacityEntries == 0)
    throw Error(ErrorCode::InvalidParams, "trace capacities must be positive");
  if (b.breakpointUnits < 0) throw Error(ErrorCode::InvalidParams, "breakpoint unit count must not be negative");
  return b;
}

// Runs a fresh session to halt with no breakpoints.
int runHeadless(manager::Session& s) {
  s.run();
  auto st = s.status();
  if (st.deviceStatus == device::Status::Faulted)
    return fail(HLSDBG_E_DEVICE_FAULT, std::string("device faulted at cycle ") + std::to_string(st.deviceCycle) +
                                           ": " + std::string(device::faultName(st.fault)));
  if (st.deviceStatus != device::Status::Halted)
    return fail(HLSDBG_E_TIMEOUT, "design did not halt within " + std::to_string(s.config().maxCycles) + " cycles");
  return HLSDBG_OK;
}

#define HLSDBG_REQUIRE(cond, what) \
  if (!(cond)) return fail(HLSDBG_E_INVALID_PARAMS, what)

}  // namespace

extern "C" {

const char* hlsdbg_version(void) { return "0.1.0"; }

const char* hlsdbg_status_name(int status) {
  if (status == HLSDBG_OK) return "Ok";
  if (status == HLSDBG_E_DEVICE_FAULT) return "DeviceFault";
  if (status == HLSDBG_E_TIMEOUT) return "Timeout";
  if (status < HLSDBG_E_SYNTAX_ERROR || status > HLSDBG_E_INTERNAL) return "Unknown";
  return errorName(static_cast<ErrorCode>(status - 1)).data();
}

const char* hlsdbg_last_error(void) { return lastError.c_str(); }

int hlsdbg_last_error_line(void) { return lastErrorLine; }

void hlsdbg_string_free(char* s) { std::free(s); }

void hlsdbg_config_default(hlsdbg_config* config) {
  if (!config) return;
  server::BundleConfig d;
  config->trace_control = d.trace.capacityRecords;
  config->trace_data = d.trace.capacityEntries;
  config->breakpoint_units = d.breakpointUnits;
  config->opt_level = HLSDBG_O0;
  config->max_cycles = d.maxCycles;
}

int hlsdbg_bundle_build(const char* path, const char* source_text, const hlsdbg_config* config,
                        hlsdbg_bundle** out) {
  HLSDBG_REQUIRE(source_text && out, "source text and out must not be NULL");
  return guarded([&]() -> int {
    hlsdbg_config c;
    hlsdbg_config_default(&c);
    if (config) c = *config;
    auto b = std::make_unique<hlsdbg_bundle>();
    b->bundle = server::buildBundle(path ? path : "input.c", source_text, fromC(c));
    *out = b.release();
    return HLSDBG_OK;
  });
}

int hlsdbg_bundle_load(const char* dir, hlsdbg_bundle** out) {
  HLSDBG_REQUIRE(dir && out, "dir and out must not be NULL");
  return guarded([&]() -> int {
    auto b = std::make_unique<hlsdbg_bundle>();
    b->bundle = server::loadBundle(dir);
    *out = b.release();
    return HLSDBG_OK;
  });
}

int hlsdbg_bundle_save(const hlsdbg_bundle* bundle, const char* dir) {
  HLSDBG_REQUIRE(bundle && dir, "bundle and dir must not be NULL");
  return guarded([&]() -> int {
    server::saveBundle(bundle->bundle, dir);
    return HLSDBG_OK;
  });
}

int hlsdbg_bundle_config(const hlsdbg_bundle* bundle, hlsdbg_config* out) {
  HLSDBG_REQUIRE(bundle && out, "bundle and out must not be NULL");
  const auto& c = bundle->bundle.config;
  out->trace_control = c.trace.capacityRecords;
  out->trace_data = c.trace.capacityEntries;
  out->breakpoint_units = c.breakpointUnits;
  out->opt_level = c.optLevel == frontend::OptLevel::O2 ? HLSDBG_O2 : HLSDBG_O0;
  out->max_cycles = c.maxCycles;
  return HLSDBG_OK;
}

void hlsdbg_bundle_free(hlsdbg_bundle* bundle) { delete bundle; }

int hlsdbg_run(const hlsdbg_bundle* bundle, int32_t* return_value) {
  HLSDBG_REQUIRE(bundle, "bundle must not be NULL");
  return guarded([&]() -> int {
    manager::Session s(bundle->bundle.db, bundle->bundle.config.session());
    int rc = runHeadless(s);
    if (rc != HLSDBG_OK) return rc;
    if (return_value) *return_value = s.returnValue().value_or(0);
    return HLSDBG_OK;
  });
}

int hlsdbg_trace_dump(const hlsdbg_bundle* bundle, char** json_out) {
  HLSDBG_REQUIRE(bundle && json_out, "bundle and json_out must not be NULL");
  return guarded([&]() -> int {
    manager::Session s(bundle->bundle.db, bundle->bundle.config.session());
    // Faulted and timed-out runs still leave a readable trace.
    s.run();
    *json_out = copyOut(trace::dumpJson(s.live()->takeTraceSnapshot()));
    return HLSDBG_OK;
  });
}

int hlsdbg_session_open(const hlsdbg_bundle* bundle, hlsdbg_session** out) {
  HLSDBG_REQUIRE(bundle && out, "bundle and out must not be NULL");
  return guarded([&]() -> int {
    *out = new hlsdbg_session(bundle->bundle);
    return HLSDBG_OK;
  });
}

int hlsdbg_session_open_trace(const hlsdbg_bundle* bundle, const char* trace_json, hlsdbg_session** out) {
  HLSDBG_REQUIRE(bundle && trace_json && out, "arguments must not be NULL");
  return guarded([&]() -> int {
    *out = new hlsdbg_session(bundle->bundle, trace::parseDump(trace_json));
    return HLSDBG_OK;
  });
}

void hlsdbg_session_close(hlsdbg_session* session) { delete session; }

int hlsdbg_session_request(hlsdbg_session* session, const char* request_json, char** response_json) {
  HLSDBG_REQUIRE(session && request_json && response_json, "arguments must not be NULL");
  return guarded([&]() -> int {
    auto response = session->dispatcher.handleLine(request_json);
    *response_json = copyOut(response.dump(-1, ' ', false, server::json::error_handler_t::replace));
    return HLSDBG_OK;
  });
}

int hlsdbg_session_set_event_callback(hlsdbg_session* session, hlsdbg_event_fn fn, void* user) {
  HLSDBG_REQUIRE(session, "session must not be NULL");
  return guarded([&]() -> int {
    if (session->eventToken >= 0) session->session.unsubscribe(session->eventToken);
    session->eventToken = -1;
    if (fn)
      session->eventToken = session->session.subscribe([fn, user](const manager::Event& ev) {
        fn(server::eventToJson(ev).dump().c_str(), user);
      });
    return HLSDBG_OK;
  });
}

int hlsdbg_session_request_pause(hlsdbg_session* session) {
  HLSDBG_REQUIRE(session, "session must not be NULL");
  session->session.requestPause();
  return HLSDBG_OK;
}

int hlsdbg_session_repl(hlsdbg_session* session, const char* line, char** output, int* done) {
  HLSDBG_REQUIRE(session && line && output, "arguments must not be NULL");
  return guarded([&]() -> int {
    if (!session->repl) session->repl = std::make_unique<server::Repl>(session->dispatcher);
    *output = copyOut(session->repl->execute(line));
    if (done) *done = session->repl->done() ? 1 : 0;
    return HLSDBG_OK;
  });
}

int hlsdbg_server_create(hlsdbg_session* session, uint16_t port, hlsdbg_server** out) {
  HLSDBG_REQUIRE(session && out, "session and out must not be NULL");
  return guarded([&]() -> int {
    auto s = std::make_unique<hlsdbg_server>();
    s->server = std::make_unique<server::Server>(session->session, port);
    *out = s.release();
    return HLSDBG_OK;
  });
}

uint16_t hlsdbg_server_port(const hlsdbg_server* server) { return server ? server->server->port() : 0; }

int hlsdbg_server_serve(hlsdbg_server* server) {
  HLSDBG_REQUIRE(server, "server must not be NULL");
  return guarded([&]() -> int {
    server->server->serve();
    return HLSDBG_OK;
  });
}

void hlsdbg_server_stop(hlsdbg_server* server) {
  if (server) server->server->stop();
}

void hlsdbg_server_free(hlsdbg_server* server) { delete server; }

}  // extern "C"
