// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>

#include "debugdb/debugdb.hpp"
#include "support/fixtures.hpp"

namespace hlsdbg::testing {

inline debugdb::DebugDatabase compileText(const std::string& text, frontend::OptLevel level,
                                          const std::string& path = "test.c") {
  auto source = frontend::SourceProgram::fromText(path, text);
  auto prog = frontend::optimize(frontend::lower(frontend::parse(source)), level);
  return debugdb::emitDebugDatabase(sched::schedule(std::move(prog), level), source);
}

inline std::shared_ptr<const sched::ScheduledDesign> designFor(const std::string& text, frontend::OptLevel level) {
  return std::make_shared<const sched::ScheduledDesign>(sched::schedule(irFor(text, level), level));
}

inline debugdb::DebugDatabase compileFixture(const std::string& name, frontend::OptLevel level) {
  return compileText(readFixture(name), level, name);
}

}  // namespace hlsdbg::testing
