// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "common/error.hpp"
#include "frontend/lower.hpp"
#include "frontend/optimize.hpp"
#include "frontend/parser.hpp"

namespace hlsdbg::testing {

inline std::string fixturePath(const std::string& name) {
  return std::string(HLSDBG_FIXTURE_DIR) + "/" + name;
}

inline std::string readFixture(const std::string& name) {
  std::ifstream in(fixturePath(name));
  if (!in) throw Error(ErrorCode::IoError, "missing fixture " + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline frontend::Ast parseText(const std::string& text) {
  return frontend::parse(frontend::SourceProgram::fromText("test.c", text));
}

inline ir::Program irFor(const std::string& text, frontend::OptLevel level) {
  return frontend::optimize(frontend::lower(parseText(text)), level);
}

}  // namespace hlsdbg::testing
