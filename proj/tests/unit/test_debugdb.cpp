// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>

#include "json.hpp"
#include "support/compile.hpp"
#include "support/program_gen.hpp"

using namespace hlsdbg;
using namespace hlsdbg::testing;
using debugdb::LocationKind;
using frontend::OptLevel;

namespace {

ErrorCode loadError(const std::string& text) {
  try {
    debugdb::fromJson(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Internal;
}

ErrorCode queryError(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Internal;
}

std::string tempPath(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("hlsdbg_" + name)).string();
}

}  // namespace

TEST_CASE("FIX-A state 0 shows lines 2 and 3") {
  auto db = compileFixture("fix_a.c", OptLevel::O0);
  CHECK(db.linesForState(0) == std::set<int>{2, 3});
  CHECK(db.statesForLine(2) == std::set<StateId>{0});
  CHECK(db.linesForState(db.haltState).empty());
  CHECK(db.irForState(db.haltState).empty());
  auto ir0 = db.irForState(0);
  REQUIRE(ir0.size() == 2);
  CHECK(ir0[0].opcode == "const");
  CHECK(ir0[1].opcode == "const");
  CHECK(db.breakpointState(4) > 0);
}

TEST_CASE("query errors") {
  auto db = compileFixture("fix_a.c", OptLevel::O0);
  CHECK(queryError([&] { db.linesForState(-1); }) == ErrorCode::UnknownState);
  CHECK(queryError([&] { db.linesForState(static_cast<StateId>(db.states.size())); }) == ErrorCode::UnknownState);
  CHECK(queryError([&] { db.statesForLine(0); }) == ErrorCode::UnknownLine);
  CHECK(queryError([&] { db.statesForLine(99); }) == ErrorCode::UnknownLine);
  // Line 1 holds only the signature.
  CHECK(queryError([&] { db.statesForLine(1); }) == ErrorCode::LineHasNoCode);
  auto blank = compileText("int main() {\n\n  // note\n  return 0;\n}\n", OptLevel::O0);
  CHECK(queryError([&] { blank.statesForLine(2); }) == ErrorCode::LineHasNoCode);
  CHECK(queryError([&] { blank.statesForLine(3); }) == ErrorCode::LineHasNoCode);
}

TEST_CASE("FIX-D divide states all map to the quotient line") {
  auto db = compileFixture("fix_d.c", OptLevel::O0);
  int divStates = 0;
  for (const auto& st : db.states) {
    for (const auto& r : db.irForState(st.id))
      if (r.opcode == "div") {
        ++divStates;
        CHECK(db.linesForState(st.id) == std::set<int>{4});
      }
  }
  CHECK(divStates == 8);
}

TEST_CASE("empty main") {
  auto db = compileText("int main(){ return 0; }", OptLevel::O0);
  CHECK(db.functions.size() == 1);
  CHECK(db.lines.size() == 1);
  CHECK(db.states.size() >= 1);
}

TEST_CASE("FIX-B at O2 folds the loop counter away") {
  auto db = compileFixture("fix_b.c", OptLevel::O2);
  auto i = db.findVariables("i");
  REQUIRE(i.size() == 1);
  CHECK(i[0]->location.kind == LocationKind::OptimizedOut);
  auto sum = db.findVariables("sum");
  REQUIRE(sum.size() == 1);
  CHECK(sum[0]->location.kind == LocationKind::Register);

  // One group of states per unrolled iteration; each iteration is its own
  // block, and the groups are ordered and disjoint.
  std::map<BlockId, std::set<StateId>> groups;
  for (StateId s : db.statesForLine(7)) groups[db.state(s).blockId].insert(s);
  CHECK(groups.size() == 10);
  std::vector<std::pair<StateId, StateId>> spans;
  for (const auto& [b, g] : groups) spans.emplace_back(*g.begin(), *g.rbegin());
  std::sort(spans.begin(), spans.end());
  for (size_t k = 1; k < spans.size(); ++k) CHECK(spans[k - 1].second < spans[k].first);
}

TEST_CASE("arrays always live in memories") {
  auto db = compileText("int main() {\n  int a[3];\n  a[1] = 4;\n  return a[1];\n}\n", OptLevel::O2);
  auto a = db.findVariables("a");
  REQUIRE(a.size() == 1);
  CHECK(a[0]->location.kind == LocationKind::Memory);
  CHECK(a[0]->type == "int[3]");
}

TEST_CASE("save and load round-trip") {
  for (const char* name : {"fix_a.c", "fix_b.c", "fix_c.c", "fix_d.c"}) {
    for (auto level : {OptLevel::O0, OptLevel::O2}) {
      auto db = compileFixture(name, level);
      auto path = tempPath("roundtrip.json");
      debugdb::save(db, path);
      auto back = debugdb::load(path);
      CHECK(back == db);
      CHECK(*back.design() == *db.design());
      std::filesystem::remove(path);
    }
  }
}

TEST_CASE("load errors") {
  auto db = compileFixture("fix_a.c", OptLevel::O0);
  auto text = debugdb::toJson(db);
  CHECK(loadError(text.substr(0, text.size() / 2)) == ErrorCode::CorruptDatabase);
  auto j = nlohmann::json::parse(text);
  j["version"] = debugdb::kFormatVersion + 1;
  CHECK(loadError(j.dump()) == ErrorCode::FormatVersionMismatch);
  CHECK(queryError([] { debugdb::load("/nonexistent/dir/db.json"); }) == ErrorCode::IoError);
}

TEST_CASE("lines and states are a bijection" * doctest::description("property")) {
  for (uint64_t seed = 1; seed <= 40; ++seed) {
    CAPTURE(seed);
    for (auto level : {OptLevel::O0, OptLevel::O2}) {
      auto db = compileText(generateProgram(seed), level);
      std::set<std::pair<int, StateId>> forward;
      std::set<std::pair<int, StateId>> backward;
      for (const auto& st : db.states)
        for (int l : db.linesForState(st.id)) forward.insert({l, st.id});
      for (const auto& l : db.lines) {
        try {
          for (StateId s : db.statesForLine(l.lineNo)) backward.insert({l.lineNo, s});
        } catch (const Error& e) {
          CHECK(e.code() == ErrorCode::LineHasNoCode);
        }
      }
      CHECK(forward == backward);
    }
  }
}

TEST_CASE("deleting any record is caught on load" * doctest::description("property")) {
  std::mt19937 rng(7);
  const char* tables[] = {"functions", "lines", "variables", "ir",    "states",
                          "schedule",  "registers", "memories", "blocks", "types"};
  int trials = 0;
  for (const char* name : {"fix_a.c", "fix_b.c", "fix_c.c"}) {
    for (auto level : {OptLevel::O0, OptLevel::O2}) {
      auto base = nlohmann::json::parse(debugdb::toJson(compileFixture(name, level)));
      for (const char* table : tables) {
        auto& arr = base[table];
        for (size_t k = 0; k < arr.size(); ++k) {
          auto j = base;
          j[table].erase(k);
          CAPTURE(name);
          CAPTURE(table);
          CAPTURE(k);
          CHECK(loadError(j.dump()) == ErrorCode::CorruptDatabase);
          ++trials;
        }
      }
    }
  }
  // Random programs with random deletions.
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    auto base = nlohmann::json::parse(debugdb::toJson(compileText(generateProgram(seed), OptLevel::O0)));
    for (int t = 0; t < 30; ++t) {
      const char* table = tables[rng() % std::size(tables)];
      if (base[table].empty()) continue;
      auto j = base;
      j[table].erase(rng() % j[table].size());
      CAPTURE(seed);
      CAPTURE(table);
      CHECK(loadError(j.dump()) == ErrorCode::CorruptDatabase);
      ++trials;
    }
  }
  CHECK(trials > 100);
}
