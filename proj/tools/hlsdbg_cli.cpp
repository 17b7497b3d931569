// SPDX-License-Identifier: Apache-2.0
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "hlsdbg/hlsdbg.h"

namespace {

constexpr int kUsage = 2;
constexpr int kFailure = 1;

int report(int status, const std::string& context) {
  std::cerr << "hlsdbg: " << context << ": " << hlsdbg_status_name(status);
  if (int line = hlsdbg_last_error_line(); line > 0) std::cerr << " at line " << line;
  std::cerr << ": " << hlsdbg_last_error() << "\n";
  return kFailure;
}

struct BundleHandle {
  hlsdbg_bundle* ptr = nullptr;
  ~BundleHandle() { hlsdbg_bundle_free(ptr); }
};

struct SessionHandle {
  hlsdbg_session* ptr = nullptr;
  ~SessionHandle() { hlsdbg_session_close(ptr); }
};

int build(const std::string& src, bool o2, uint32_t control, uint32_t data, int units, uint64_t maxCycles,
          const std::string& out) {
  std::ifstream in(src, std::ios::binary);
  if (!in) {
    std::cerr << "hlsdbg: cannot read " << src << "\n";
    return kFailure;
  }
  std::ostringstream text;
  text << in.rdbuf();
  hlsdbg_config cfg;
  hlsdbg_config_default(&cfg);
  cfg.trace_control = control;
  cfg.trace_data = data;
  cfg.breakpoint_units = units;
  cfg.opt_level = o2 ? HLSDBG_O2 : HLSDBG_O0;
  cfg.max_cycles = maxCycles;
  BundleHandle b;
  if (int rc = hlsdbg_bundle_build(src.c_str(), text.str().c_str(), &cfg, &b.ptr)) return report(rc, src);
  if (int rc = hlsdbg_bundle_save(b.ptr, out.c_str())) return report(rc, out);
  std::cout << "wrote " << out << "\n";
  return 0;
}

int load(const std::string& dir, BundleHandle& b) {
  if (int rc = hlsdbg_bundle_load(dir.c_str(), &b.ptr)) return report(rc, dir);
  return 0;
}

int run(const std::string& dir) {
  BundleHandle b;
  if (int rc = load(dir, b)) return rc;
  int32_t value = 0;
  if (int rc = hlsdbg_run(b.ptr, &value)) return report(rc, dir);
  std::cout << value << "\n";
  return 0;
}

int traceDump(const std::string& dir) {
  BundleHandle b;
  if (int rc = load(dir, b)) return rc;
  char* text = nullptr;
  if (int rc = hlsdbg_trace_dump(b.ptr, &text)) return report(rc, dir);
  std::cout << text << "\n";
  hlsdbg_string_free(text);
  return 0;
}

// A live session, or a replay-only one when a trace dump is given.
int open(const BundleHandle& b, const std::string& traceFile, SessionHandle& s) {
  if (traceFile.empty()) {
    if (int rc = hlsdbg_session_open(b.ptr, &s.ptr)) return report(rc, "session");
    return 0;
  }
  std::ifstream in(traceFile, std::ios::binary);
  if (!in) {
    std::cerr << "hlsdbg: cannot read " << traceFile << "\n";
    return kFailure;
  }
  std::ostringstream text;
  text << in.rdbuf();
  if (int rc = hlsdbg_session_open_trace(b.ptr, text.str().c_str(), &s.ptr)) return report(rc, traceFile);
  return 0;
}

int serve(const std::string& dir, uint16_t port, const std::string& traceFile) {
  BundleHandle b;
  if (int rc = load(dir, b)) return rc;
  SessionHandle s;
  if (int rc = open(b, traceFile, s)) return rc;
  hlsdbg_server* srv = nullptr;
  if (int rc = hlsdbg_server_create(s.ptr, port, &srv)) return report(rc, "serve");
  std::cerr << "listening on 127.0.0.1:" << hlsdbg_server_port(srv) << "\n";
  int rc = hlsdbg_server_serve(srv);
  hlsdbg_server_free(srv);
  return rc ? report(rc, "serve") : 0;
}

int repl(const std::string& dir, const std::string& traceFile) {
  BundleHandle b;
  if (int rc = load(dir, b)) return rc;
  SessionHandle s;
  if (int rc = open(b, traceFile, s)) return rc;
  bool tty = isatty(fileno(stdin));
  std::string line;
  for (;;) {
    if (tty) std::cout << "(hlsdbg) " << std::flush;
    if (!std::getline(std::cin, line)) break;
    char* out = nullptr;
    int done = 0;
    if (int rc = hlsdbg_session_repl(s.ptr, line.c_str(), &out, &done)) return report(rc, "repl");
    std::cout << out << std::flush;
    hlsdbg_string_free(out);
    if (done) break;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Source-level debugger for HLS circuits"};
  app.require_subcommand(1);

  auto* buildCmd = app.add_subcommand("build", "compile MiniC source into a design bundle");
  std::string src;
  std::string out;
  std::string level = "0";
  uint32_t control = 1024;
  uint32_t data = 4096;
  int units = 4;
  uint64_t maxCycles = 10'000'000;
  buildCmd->add_option("source", src, "MiniC source file")->required();
  buildCmd->add_option("-O", level, "optimization level: -O0 (default) or -O2")
      ->check(CLI::IsMember({"0", "2"}));
  buildCmd->add_option("--trace-control", control, "control trace records")->check(CLI::PositiveNumber);
  buildCmd->add_option("--trace-data", data, "data trace entries")->check(CLI::PositiveNumber);
  buildCmd->add_option("--bp-units", units, "hardware breakpoint units")->check(CLI::NonNegativeNumber);
  buildCmd->add_option("--max-cycles", maxCycles, "cycle limit per run command");
  buildCmd->add_option("-o,--output", out, "bundle directory")->required();

  std::string bundle;
  auto* runCmd = app.add_subcommand("run", "run a bundle to halt and print main's result");
  runCmd->add_option("bundle", bundle, "bundle directory")->required();

  auto* serveCmd = app.add_subcommand("serve", "serve the debug protocol over TCP");
  uint16_t port = 4711;
  serveCmd->add_option("bundle", bundle, "bundle directory")->required();
  serveCmd->add_option("--port", port, "TCP port on 127.0.0.1 (0 picks one)");
  std::string traceFile;
  serveCmd->add_option("--trace", traceFile, "replay a trace dump instead of running the design");

  auto* replCmd = app.add_subcommand("repl", "interactive debugger on stdin");
  replCmd->add_option("bundle", bundle, "bundle directory")->required();
  replCmd->add_option("--trace", traceFile, "replay a trace dump instead of running the design");

  auto* traceCmd = app.add_subcommand("trace", "trace utilities");
  traceCmd->require_subcommand(1);
  auto* dumpCmd = traceCmd->add_subcommand("dump", "run headless and print the trace buffers as JSON");
  dumpCmd->add_option("bundle", bundle, "bundle directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }
  if (*buildCmd) return build(src, level == "2", control, data, units, maxCycles, out);
  if (*runCmd) return run(bundle);
  if (*serveCmd) return serve(bundle, port, traceFile);
  if (*replCmd) return repl(bundle, traceFile);
  if (*dumpCmd) return traceDump(bundle);
  return kUsage;
}
