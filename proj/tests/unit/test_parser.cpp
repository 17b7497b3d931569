// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include "frontend/ast.hpp"
#include "support/fixtures.hpp"
#include "support/program_gen.hpp"

using namespace hlsdbg;
using namespace hlsdbg::testing;
using frontend::Stmt;

namespace {

ErrorCode parseError(const std::string& text, int* line = nullptr) {
  try {
    parseText(text);
  } catch (const Error& e) {
    if (line) *line = e.line();
    return e.code();
  }
  FAIL("expected a parse error");
  return ErrorCode::Internal;
}

}  // namespace

TEST_CASE("FIX-A parses into four statements on lines 2 to 5") {
  auto ast = parseText(readFixture("fix_a.c"));
  REQUIRE(ast.functions.size() == 1);
  const auto& body = ast.functions[0].body;
  REQUIRE(body.size() == 4);
  for (size_t i = 0; i < 4; ++i) CHECK(body[i].line == static_cast<int>(i) + 2);
  CHECK(body[0].kind == Stmt::Kind::VarDecl);
  CHECK(body[3].kind == Stmt::Kind::Return);
}

TEST_CASE("malformed declarations report the offending line") {
  int line = 0;
  CHECK(parseError("int main() { int x = ; }", &line) == ErrorCode::SyntaxError);
  CHECK(line == 1);
  CHECK(parseError("int main() {\n  int x = 1;\n  x = x +;\n}\n", &line) == ErrorCode::SyntaxError);
  CHECK(line == 3);
}

TEST_CASE("program-level checks") {
  CHECK(parseError("") == ErrorCode::EmptyProgram);
  CHECK(parseError("  // only a comment\n") == ErrorCode::EmptyProgram);
  CHECK(parseError("int f() { return 1; }") == ErrorCode::NoMainFunction);
  CHECK(parseError("int f(int x) { return f(x); }\nint main() { return f(1); }") ==
        ErrorCode::RecursionUnsupported);
  CHECK(parseError("int f() { return g(); }\nint g() { return f(); }\nint main() { return f(); }") ==
        ErrorCode::RecursionUnsupported);
  CHECK(parseError("int main() { return g(); }") == ErrorCode::SyntaxError);
  CHECK(parseError("int f(int a) { return a; }\nint main() { return f(1, 2); }") ==
        ErrorCode::SyntaxError);
  CHECK(parseError("int main() { return 4294967296; }") == ErrorCode::SyntaxError);
  CHECK(parseError("int main() { int a = 1 @ 2; }") == ErrorCode::SyntaxError);
}

TEST_CASE("comments and operator precedence") {
  auto ast = parseText("int main() {\n  /* block\n comment */ int a = 1 + 2 * 3; // tail\n  return a;\n}\n");
  const auto& decl = ast.functions[0].body[0];
  CHECK(decl.line == 3);
  REQUIRE(decl.exprs[0].kind == frontend::Expr::Kind::Binary);
  CHECK(decl.exprs[0].op == "+");
  CHECK(decl.exprs[0].args[1].op == "*");
}

TEST_CASE("negative literals fold in the parser") {
  auto ast = parseText("int main() { return -5; }");
  const auto& e = ast.functions[0].body[0].exprs[0];
  CHECK(e.kind == frontend::Expr::Kind::Number);
  CHECK(e.value == -5);
}

TEST_CASE("print then parse is the identity on shape" * doctest::description("property")) {
  for (uint64_t seed = 1; seed <= 150; ++seed) {
    CAPTURE(seed);
    auto ast = parseText(generateProgram(seed));
    auto printed = frontend::print(ast);
    auto again = parseText(printed);
    CHECK(frontend::sameShape(ast, again));
    CHECK(frontend::print(again) == printed);
  }
}
