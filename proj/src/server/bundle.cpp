// SPDX-License-Identifier: Apache-2.0
#include "server/bundle.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "common/error.hpp"
#include "frontend/lower.hpp"
#include "frontend/optimize.hpp"
#include "frontend/parser.hpp"
#include "json.hpp"

namespace hlsdbg::server {

using json = nlohmann::json;
namespace fs = std::filesystem;

debugdb::DebugDatabase compileSource(const std::string& path, std::string_view text, frontend::OptLevel level) {
  auto source = frontend::SourceProgram::fromText(path, text);
  auto prog = frontend::optimize(frontend::lower(frontend::parse(source)), level);
  return debugdb::emitDebugDatabase(sched::schedule(std::move(prog), level), source);
}

Bundle buildBundle(const std::string& path, std::string_view text, const BundleConfig& config) {
  return {compileSource(path, text, config.optLevel), config};
}

std::string configToJson(const BundleConfig& c) {
  json doc = {
      {"traceControl", c.trace.capacityRecords},
      {"traceData", c.trace.capacityEntries},
      {"breakpointUnits", c.breakpointUnits},
      {"optLevel", frontend::optLevelName(c.optLevel)},
      {"maxCycles", c.maxCycles},
  };
  return doc.dump(1);
}

BundleConfig configFromJson(std::string_view text) {
  BundleConfig c;
  try {
    json doc = json::parse(text);
    if (!doc.is_object()) throw Error(ErrorCode::InvalidParams, "config.json must hold an object");
    c.trace.capacityRecords = doc.value("traceControl", c.trace.capacityRecords);
    c.trace.capacityEntries = doc.value("traceData", c.trace.capacityEntries);
    c.breakpointUnits = doc.value("breakpointUnits", c.breakpointUnits);
    c.optLevel = frontend::optLevelFromName(doc.value("optLevel", std::string("O0")));
    c.maxCycles = doc.value("maxCycles", c.maxCycles);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidParams, std::string("malformed config.json: ") + e.what());
  }
  if (c.trace.capacityRecords == 0 || c.trace.capacityEntries == 0)
    throw Error(ErrorCode::InvalidParams, "trace capacities must be positive");
  if (c.breakpointUnits < 0) throw Error(ErrorCode::InvalidParams, "breakpoint unit count must not be negative");
  return c;
}

std::string readFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void saveBundle(const Bundle& bundle, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir + ": " + ec.message());
  debugdb::save(bundle.db, (fs::path(dir) / "design.json").string());
  auto cfgPath = (fs::path(dir) / "config.json").string();
  std::ofstream out(cfgPath, std::ios::binary | std::ios::trunc);
  out << configToJson(bundle.config) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + cfgPath);
}

Bundle loadBundle(const std::string& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::IoError, dir + " is not a bundle directory");
  Bundle b;
  b.db = debugdb::load((fs::path(dir) / "design.json").string());
  b.config = configFromJson(readFile((fs::path(dir) / "config.json").string()));
  if (b.config.optLevel != b.db.optLevel)
    throw Error(ErrorCode::InvalidParams, "config.json optLevel disagrees with design.json");
  return b;
}

}  // namespace hlsdbg::server
