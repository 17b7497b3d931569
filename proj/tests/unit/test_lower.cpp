// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include <algorithm>
#include <limits>

#include "frontend/ir_eval.hpp"
#include "support/fixtures.hpp"
#include "support/program_gen.hpp"
#include "support/source_interp.hpp"

using namespace hlsdbg;
using namespace hlsdbg::testing;
using frontend::OptLevel;
using ir::Opcode;

namespace {

std::vector<const ir::Instr*> allInstrs(const ir::Program& p) {
  std::vector<const ir::Instr*> out;
  for (const auto& f : p.functions)
    for (const auto& b : f.blocks)
      for (const auto& in : b.instrs) out.push_back(&in);
  return out;
}

ErrorCode lowerError(const std::string& text) {
  try {
    frontend::lower(parseText(text));
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected a lowering error");
  return ErrorCode::Internal;
}

}  // namespace

TEST_CASE("FIX-A lowers to constants, an add and moves") {
  auto prog = irFor(readFixture("fix_a.c"), OptLevel::O0);
  auto ins = allInstrs(prog);
  REQUIRE(ins.size() == 5);
  CHECK(ins[0]->op == Opcode::Const);
  CHECK(ins[0]->line == 2);
  CHECK(ins[1]->op == Opcode::Const);
  CHECK(ins[1]->line == 3);
  CHECK(ins[2]->op == Opcode::Add);
  CHECK(ins[3]->op == Opcode::Move);
  CHECK(ins[3]->line == 4);
  CHECK(ins[4]->line == 5);
  for (auto* in : ins) CHECK(in->id == in->origin);
}

TEST_CASE("lowering errors") {
  CHECK(lowerError("int main() { return x; }") == ErrorCode::UndefinedVariable);
  CHECK(lowerError("int main() { int a[4]; return a; }") == ErrorCode::TypeMismatch);
  CHECK(lowerError("int main() { int a = 1; return a[0]; }") == ErrorCode::TypeMismatch);
  CHECK(lowerError("int main() { int a[4]; return a[4]; }") == ErrorCode::ArrayBoundsStatic);
  CHECK(lowerError("int main() { int a[4]; a[-1] = 2; return 0; }") == ErrorCode::ArrayBoundsStatic);
  CHECK(lowerError("int main() { int a[0]; return 0; }") == ErrorCode::SyntaxError);
  CHECK(lowerError("int main() { int a[70000]; return 0; }") == ErrorCode::SyntaxError);
  CHECK(lowerError("int main() { int a = 1; { int a = 2; } return a; }") == ErrorCode::SyntaxError);
  CHECK(lowerError("int main() { int a = 1; int a[3]; return 0; }") == ErrorCode::SyntaxError);
  CHECK(lowerError("int main() { { int a = 1; } return a; }") == ErrorCode::UndefinedVariable);
}

TEST_CASE("sequential redeclarations share storage") {
  auto prog = irFor("int main() {\n  { int t = 1; }\n  { int t = 2; }\n  return 0;\n}\n", OptLevel::O0);
  auto ins = allInstrs(prog);
  REQUIRE(ins.size() >= 2);
  CHECK(ins[0]->result == ins[1]->result);
}

TEST_CASE("missing return yields zero on the closing line") {
  auto prog = irFor("int main() {\n  int a = 5;\n}\n", OptLevel::O0);
  auto ins = allInstrs(prog);
  REQUIRE(ins.size() == 2);
  CHECK(ins[1]->op == Opcode::Const);
  CHECK(ins[1]->line == 3);
  CHECK(ir::interpret(prog).value == 0);
}

TEST_CASE("fixtures evaluate to their expected results") {
  const std::pair<const char*, int> cases[] = {
      {"fix_a.c", 7}, {"fix_b.c", 90}, {"fix_c.c", 131}, {"fix_d.c", 14}};
  for (auto [name, expected] : cases) {
    CAPTURE(name);
    auto text = readFixture(name);
    CHECK(runSource(parseText(text)).value == expected);
    for (auto level : {OptLevel::O0, OptLevel::O2}) {
      auto r = ir::interpret(irFor(text, level));
      CHECK(r.status == ir::EvalResult::Status::Ok);
      CHECK(r.value == expected);
    }
  }
}

TEST_CASE("faults match the source semantics") {
  auto div0 = "int main() {\n  int z = 0;\n  return 5 / z;\n}\n";
  CHECK(runSource(parseText(div0)).status == SourceResult::Status::DivideByZero);
  for (auto level : {OptLevel::O0, OptLevel::O2})
    CHECK(ir::interpret(irFor(div0, level)).status == ir::EvalResult::Status::DivideByZero);
  auto oob = "int main() {\n  int a[4];\n  int i = 4;\n  return a[i];\n}\n";
  CHECK(runSource(parseText(oob)).status == SourceResult::Status::MemoryOutOfBounds);
  for (auto level : {OptLevel::O0, OptLevel::O2})
    CHECK(ir::interpret(irFor(oob, level)).status == ir::EvalResult::Status::MemoryOutOfBounds);
}

TEST_CASE("short circuit protects the right operand") {
  auto text =
      "int main() {\n  int z = 0;\n  int a = (z != 0) && (10 / z > 1);\n  int b = (z == 0) || (10 / z > 1);\n"
      "  return a + b * 2;\n}\n";
  CHECK(runSource(parseText(text)).value == 2);
  for (auto level : {OptLevel::O0, OptLevel::O2}) CHECK(ir::interpret(irFor(text, level)).value == 2);
}

TEST_CASE("arrays are static across calls") {
  auto text =
      "int bump(int k) {\n  int m[2];\n  m[0] = m[0] + k;\n  return m[0];\n}\n"
      "int main() {\n  int x = bump(3);\n  int y = bump(4);\n  return x * 100 + y;\n}\n";
  CHECK(runSource(parseText(text)).value == 307);
  for (auto level : {OptLevel::O0, OptLevel::O2}) CHECK(ir::interpret(irFor(text, level)).value == 307);
}

TEST_CASE("wraparound arithmetic") {
  auto text = "int main() {\n  int m = -2147483647 - 1;\n  int d = m / -1;\n  int r = m % -1;\n"
              "  return d + r + (2147483647 + 1 == m);\n}\n";
  int32_t expected = std::numeric_limits<int32_t>::min() + 1;
  CHECK(runSource(parseText(text)).value == expected);
  for (auto level : {OptLevel::O0, OptLevel::O2}) CHECK(ir::interpret(irFor(text, level)).value == expected);
}

TEST_CASE("IR execution agrees with the source interpreter" * doctest::description("property")) {
  for (uint64_t seed = 1; seed <= 300; ++seed) {
    CAPTURE(seed);
    auto text = generateProgram(seed);
    auto expected = runSource(parseText(text));
    REQUIRE(expected.status == SourceResult::Status::Ok);
    for (auto level : {OptLevel::O0, OptLevel::O2}) {
      CAPTURE(frontend::optLevelName(level));
      auto r = ir::interpret(irFor(text, level));
      CHECK(r.status == ir::EvalResult::Status::Ok);
      CHECK(r.value == expected.value);
    }
  }
}
