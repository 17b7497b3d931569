// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>

#include "debugdb/debugdb.hpp"
#include "manager/manager.hpp"

namespace hlsdbg::server {

struct BundleConfig {
  trace::TraceConfig trace;
  int breakpointUnits = 4;
  frontend::OptLevel optLevel = frontend::OptLevel::O0;
  uint64_t maxCycles = 10'000'000;

  manager::SessionConfig session() const { return {trace, breakpointUnits, maxCycles}; }
  bool operator==(const BundleConfig&) const = default;
};

/// A compiled design plus the settings its sessions run with. On disk it is
/// a directory holding design.json and config.json.
struct Bundle {
  debugdb::DebugDatabase db;
  BundleConfig config;
};

/// Full compile: parse, lower, optimize, schedule, emit.
debugdb::DebugDatabase compileSource(const std::string& path, std::string_view text, frontend::OptLevel level);
Bundle buildBundle(const std::string& path, std::string_view text, const BundleConfig& config);

std::string configToJson(const BundleConfig& config);
/// Missing keys keep their defaults. Throws InvalidParams.
BundleConfig configFromJson(std::string_view text);

void saveBundle(const Bundle& bundle, const std::string& dir);
/// Throws IoError, CorruptDatabase, FormatVersionMismatch or InvalidParams.
Bundle loadBundle(const std::string& dir);

std::string readFile(const std::string& path);

}  // namespace hlsdbg::server
