// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "manager/manager.hpp"
#include "support/compile.hpp"
#include "support/device_log.hpp"
#include "support/program_gen.hpp"

using namespace hlsdbg;
using namespace hlsdbg::testing;
using frontend::OptLevel;
using manager::EventKind;
using manager::Session;
using trace::ViewKind;

namespace {

manager::SessionConfig wholeRun() {
  manager::SessionConfig c;
  c.trace = {1u << 20, 1u << 22};
  return c;
}

manager::SessionConfig small() {
  manager::SessionConfig c;
  c.trace = {16, 64};
  return c;
}

Session session(const std::string& fixture, OptLevel level, manager::SessionConfig cfg = {}) {
  return Session(compileFixture(fixture, level), cfg);
}

ErrorCode codeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Internal;
}

// Everything a user can observe at the current position.
struct Views {
  std::set<int> lines;
  std::vector<InstrId> ir;
  std::vector<trace::VariableView> vars;
  bool operator==(const Views&) const = default;
};

Views views(const Session& s) {
  Views v;
  v.lines = s.activeLines();
  for (const auto& r : s.activeIr()) v.ir.push_back(r.id);
  for (const auto& nv : s.listVariables()) v.vars.push_back(nv.view);
  return v;
}

std::string straightLine(int statements) {
  std::ostringstream os;
  os << "int main() {\n  int x = 1;\n";
  for (int i = 0; i < statements; ++i) os << "  x = x * 3 + " << i << ";\n";
  os << "  return x;\n}\n";
  return os.str();
}

}  // namespace

TEST_CASE("live breakpoints are limited by the unit count") {
  auto s = session("fix_b.c", OptLevel::O0);
  // Lines 5 and 6 start in the same state and share a unit.
  CHECK(s.db().breakpointState(5) == s.db().breakpointState(6));
  for (int line : {2, 5, 6, 7}) s.setBreakpoint(line);
  CHECK(s.status().unitsUsed == 3);
  s.setBreakpoint(9);
  CHECK(s.status().unitsUsed == 4);
  CHECK(codeOf([&] { s.setBreakpoint(8); }) == ErrorCode::LineHasNoCode);

  Session t(compileText(straightLine(10), OptLevel::O0), manager::SessionConfig{});
  for (int line : {3, 4, 5, 6}) t.setBreakpoint(line);
  CHECK(t.status().unitsUsed == 4);
  CHECK(codeOf([&] { t.setBreakpoint(7); }) == ErrorCode::OutOfBreakpointUnits);
  CHECK(t.status().breakpoints == std::set<int>{3, 4, 5, 6});
  t.clearBreakpoint(9);
  t.clearBreakpoint(5);
  t.setBreakpoint(7);
  CHECK(t.status().unitsUsed == 4);
  CHECK(codeOf([&] { s.setBreakpoint(99); }) == ErrorCode::UnknownLine);
}

TEST_CASE("replay breakpoints are unlimited") {
  Session s(compileText(straightLine(20), OptLevel::O0), manager::SessionConfig{});
  s.run();
  s.enterReplay();
  for (int line = 2; line <= 21; ++line) s.setBreakpoint(line);
  CHECK(s.status().replayBreakpoints.size() == 20);
  CHECK(s.status().unitsUsed == 0);
}

TEST_CASE("run to a breakpoint, then to halt") {
  auto s = session("fix_a.c", OptLevel::O0);
  std::vector<manager::Event> events;
  s.subscribe([&](const manager::Event& e) { events.push_back(e); });
  s.setBreakpoint(4);
  s.run();
  REQUIRE(events.size() == 2);
  CHECK(events[0].kind == EventKind::BreakpointHit);
  CHECK(events[0].line == 4);
  CHECK(events[1].kind == EventKind::Paused);
  CHECK(s.readVariable("a") == trace::VariableView{ViewKind::Known, 3, {}});
  CHECK(s.readVariable("b") == trace::VariableView{ViewKind::Known, 4, {}});
  CHECK(s.activeLines() == std::set<int>{4});

  s.clearBreakpoint(4);
  s.run();
  CHECK(events.back().kind == EventKind::Halted);
  CHECK(s.readVariable("c") == trace::VariableView{ViewKind::Known, 7, {}});
  CHECK(s.activeLines().empty());
  CHECK(codeOf([&] { s.run(); }) == ErrorCode::InvalidState);
  CHECK(codeOf([&] { s.stepForward(); }) == ErrorCode::InvalidState);
  CHECK(codeOf([&] { (void)s.readVariable("nope"); }) == ErrorCode::UnknownVariable);
}

TEST_CASE("one step runs every co-scheduled line") {
  auto s = session("fix_a.c", OptLevel::O0);
  CHECK(s.activeLines() == std::set<int>{2, 3});
  s.stepForward();
  CHECK(s.readVariable("a").value == 3);
  CHECK(s.readVariable("b").value == 4);
}

TEST_CASE("a divide keeps its line active for eight steps") {
  auto s = session("fix_d.c", OptLevel::O0);
  StateId start = s.db().breakpointState(4);
  while (s.status().state != start) s.stepForward();
  int steps = 0;
  while (s.activeLines() == std::set<int>{4}) {
    s.stepForward();
    ++steps;
  }
  CHECK(steps >= 8);
  auto divide = s.db().statesForLine(4);
  CHECK(divide.size() == static_cast<size_t>(steps));
}

TEST_CASE("replay entry, stepping and exit") {
  auto s = session("fix_b.c", OptLevel::O0, small());
  CHECK(codeOf([&] { s.enterReplay(); }) == ErrorCode::EmptyTrace);
  std::vector<manager::Event> events;
  s.subscribe([&](const manager::Event& e) { events.push_back(e); });
  s.setBreakpoint(9);
  s.run();
  auto before = s.live()->device().state();
  s.enterReplay();
  CHECK(events.back().kind == EventKind::WindowReady);
  auto w = s.window();
  CHECK(w.endCycle == before.cycle);
  CHECK(w.startCycle > 0);
  CHECK(s.status().position == w.endCycle);
  CHECK(s.activeLines() == std::set<int>{9});
  CHECK(codeOf([&] { s.stepForward(); }) == ErrorCode::WindowOverflow);
  s.seek(static_cast<int64_t>(w.startCycle));
  CHECK(codeOf([&] { s.stepBackward(); }) == ErrorCode::WindowUnderflow);
  auto r = s.seek(-5);
  CHECK(r.clamped);
  CHECK(r.position == w.startCycle);
  r = s.seek(static_cast<int64_t>(w.endCycle) + 100);
  CHECK(r.clamped);
  CHECK(r.position == w.endCycle);
  s.exitReplay();
  CHECK(s.live()->device().state() == before);
  CHECK(s.status().mode == manager::Mode::Live);
}

TEST_CASE("replay shows unknown values before their first update") {
  auto s = session("fix_a.c", OptLevel::O0);
  s.run();
  s.enterReplay();
  s.seek(0);
  CHECK(s.readVariable("c").kind == ViewKind::UnknownBeforeFirstUpdate);
  s.seek(static_cast<int64_t>(s.window().endCycle));
  CHECK(s.readVariable("c") == trace::VariableView{ViewKind::Known, 7, {}});
}

TEST_CASE("FIX-B at O2 reports the loop counter as optimized out") {
  auto s = session("fix_b.c", OptLevel::O2);
  s.run();
  CHECK(s.readVariable("i").kind == ViewKind::OptimizedOut);
  CHECK(s.readVariable("sum").value == 90);
}

TEST_CASE("extendWindow reaches further back and agrees on the overlap") {
  auto s = session("fix_b.c", OptLevel::O0, small());
  s.run();
  s.enterReplay();
  auto old = s.window();
  REQUIRE(old.startCycle > 0);
  std::map<uint64_t, std::vector<trace::VariableView>> before;
  for (uint64_t c = old.startCycle; c <= old.endCycle; ++c) {
    s.seek(static_cast<int64_t>(c));
    for (const auto& nv : s.listVariables()) before[c].push_back(nv.view);
  }
  CHECK(codeOf([&] { s.extendWindow(-1); }) == ErrorCode::TargetBeforeReset);
  s.extendWindow(static_cast<int64_t>(old.startCycle) + 2);
  CHECK(s.window() == old);
  CHECK(s.status().position == old.startCycle + 2);

  uint64_t target = old.startCycle - 1;
  s.extendWindow(static_cast<int64_t>(target));
  auto now = s.window();
  CHECK(now.contains(target));
  CHECK(s.status().position == target);
  int compared = 0;
  for (uint64_t c = std::max(now.startCycle, old.startCycle); c <= std::min(now.endCycle, old.endCycle); ++c) {
    s.seek(static_cast<int64_t>(c));
    auto vars = s.listVariables();
    for (size_t k = 0; k < vars.size(); ++k) {
      const auto& a = before[c][k];
      const auto& b = vars[k].view;
      if (a.kind == ViewKind::Known && b.kind == ViewKind::Known) {
        CHECK(a.value == b.value);
        ++compared;
      }
    }
  }
  CHECK(compared > 0);

  // Repeated extension walks all the way back to reset.
  while (s.window().startCycle > 0) s.extendWindow(static_cast<int64_t>(s.window().startCycle) - 1);
  CHECK(s.window().startCycle == 0);
}

TEST_CASE("replay-only sessions cannot re-run") {
  auto db = compileFixture("fix_b.c", OptLevel::O0);
  Session live(db, small());
  live.run();
  live.enterReplay();
  auto cap = live.replay()->capture();
  Session saved(db, cap, small());
  CHECK(saved.status().mode == manager::Mode::Replay);
  CHECK(saved.window() == live.window());
  CHECK(codeOf([&] { saved.extendWindow(0); }) == ErrorCode::NondeterministicBackend);
  CHECK(codeOf([&] { saved.exitReplay(); }) == ErrorCode::InvalidState);
  CHECK(codeOf([&] { saved.reset(); }) == ErrorCode::NondeterministicBackend);
  for (uint64_t c = live.window().startCycle; c <= live.window().endCycle; ++c) {
    live.seek(static_cast<int64_t>(c));
    saved.seek(static_cast<int64_t>(c));
    CHECK(views(live) == views(saved));
  }
}

TEST_CASE("replay run stops at software breakpoints") {
  auto s = session("fix_b.c", OptLevel::O0, wholeRun());
  s.run();
  s.enterReplay();
  s.seek(0);
  s.setBreakpoint(7);
  int hits = 0;
  std::vector<manager::Event> events;
  s.subscribe([&](const manager::Event& e) { events.push_back(e); });
  for (;;) {
    s.run();
    if (events.back().reason == "windowEnd") break;
    CHECK(events[events.size() - 2].kind == EventKind::BreakpointHit);
    CHECK(s.activeLines().count(7));
    ++hits;
  }
  CHECK(hits == 10);
}

TEST_CASE("static and dynamic Gantt views") {
  SUBCASE("FIX-B at O2 repeats each body instruction ten times") {
    auto s = session("fix_b.c", OptLevel::O2, wholeRun());
    auto statics = s.ganttData(false);
    CHECK(statics.size() == s.db().ir.size());
    s.run();
    s.enterReplay();
    CHECK(s.window().startCycle == 0);
    auto boxes = s.ganttData(true);
    std::map<InstrId, std::vector<int>> byOrigin;
    for (const auto& b : boxes)
      if (b.sourceLine == 7 || b.sourceLine == 2) byOrigin[b.origin].push_back(b.instanceIndex);
    REQUIRE_FALSE(byOrigin.empty());
    for (const auto& [origin, idx] : byOrigin) {
      CAPTURE(origin);
      CHECK(idx == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
    }
    CHECK(s.ganttData(true, std::make_pair(int64_t{5}, int64_t{4})).empty());
    CHECK(codeOf([&] { (void)s.ganttData(true, std::make_pair(int64_t{0}, int64_t{1} << 40)); }) ==
          ErrorCode::RangeOutsideWindow);
  }
  SUBCASE("FIX-C at O2 runs the post-if lines first") {
    auto s = session("fix_c.c", OptLevel::O2, wholeRun());
    s.run();
    s.enterReplay();
    auto boxes = s.ganttData(true);
    int64_t post = INT64_MAX;
    int64_t body = INT64_MAX;
    for (const auto& b : boxes) {
      if (b.sourceLine == 8 || b.sourceLine == 9) post = std::min(post, b.stepStart);
      if (b.sourceLine == 6) body = std::min(body, b.stepStart);
    }
    CHECK(post <= body);
  }
  SUBCASE("dynamic view needs replay") {
    auto s = session("fix_a.c", OptLevel::O0);
    CHECK(codeOf([&] { (void)s.ganttData(true); }) == ErrorCode::InvalidState);
  }
}

TEST_CASE("pause requests from another thread stop a long run") {
  auto s = Session(compileText("int main() {\n  int x = 0;\n  for (int i = 0; i < 100000; i = i + 1) {\n"
                               "    x = x + i;\n  }\n  return x;\n}\n",
                               OptLevel::O0),
                   manager::SessionConfig{});
  std::vector<manager::Event> events;
  s.subscribe([&](const manager::Event& e) {
    events.push_back(e);
  });
  s.requestPause();
  s.run();
  CHECK(events.back().reason == "pause");
  CHECK(s.status().deviceCycle == 0);
  s.pause();
  s.run();
  CHECK(events.back().kind == EventKind::Halted);
}

TEST_CASE("reset returns to a fresh live session") {
  auto s = session("fix_a.c", OptLevel::O0);
  s.run();
  s.enterReplay();
  s.reset();
  CHECK(s.status().mode == manager::Mode::Live);
  CHECK(s.status().deviceCycle == 0);
  CHECK(codeOf([&] { s.enterReplay(); }) == ErrorCode::EmptyTrace);
}

TEST_CASE("replay matches the live device at every cycle" * doctest::description("property")) {
  for (uint64_t seed = 0; seed < 30; ++seed) {
    CAPTURE(seed);
    auto level = seed % 2 ? OptLevel::O2 : OptLevel::O0;
    auto db = compileText(generateProgram(seed), level);
    auto log = fullLog(db.design());
    Session s(db, wholeRun());
    s.run();
    s.enterReplay();
    auto w = s.window();
    REQUIRE(w.startCycle == 0);
    REQUIRE(w.endCycle + 1 == log.cycles.size());
    for (uint64_t c = 0; c <= w.endCycle; ++c) {
      s.seek(static_cast<int64_t>(c));
      const auto& truth = log.cycles[c];
      if (s.activeLines() != db.linesForState(truth.state)) {
        CHECK(s.activeLines() == db.linesForState(truth.state));
      }
      for (const auto& nv : s.listVariables()) {
        const auto& loc = nv.variable->location;
        if (loc.kind == debugdb::LocationKind::Register && nv.view.kind == ViewKind::Known &&
            nv.view.value != truth.registers[static_cast<size_t>(loc.id)]) {
          CHECK(nv.view.value == truth.registers[static_cast<size_t>(loc.id)]);
        }
        if (loc.kind == debugdb::LocationKind::Memory)
          for (size_t k = 0; k < nv.view.elements.size(); ++k) {
            const auto& e = nv.view.elements[k];
            int32_t t = truth.memories[static_cast<size_t>(loc.id)][k + static_cast<size_t>(loc.baseOffset)];
            if (e.kind == ViewKind::Known && e.value != t) CHECK(e.value == t);
          }
      }
    }
  }
}

TEST_CASE("replay navigation is reversible, path independent and pure" * doctest::description("property")) {
  std::mt19937_64 rng(11);
  for (uint64_t seed = 0; seed < 16; ++seed) {
    CAPTURE(seed);
    auto db = compileText(generateProgram(seed), seed % 2 ? OptLevel::O2 : OptLevel::O0);
    Session s(db, small());
    s.run();
    auto device = s.live()->device().state();
    s.enterReplay();
    auto w = s.window();
    // Stepping one cycle at a time from the start builds the reference.
    std::vector<Views> stepped;
    s.seek(static_cast<int64_t>(w.startCycle));
    stepped.push_back(views(s));
    for (uint64_t c = w.startCycle; c < w.endCycle; ++c) {
      s.stepForward();
      stepped.push_back(views(s));
    }
    for (uint64_t c = w.startCycle; c < w.endCycle; ++c) {
      s.seek(static_cast<int64_t>(c));
      auto at = views(s);
      if (!(at == stepped[c - w.startCycle])) CHECK(at == stepped[c - w.startCycle]);
      s.stepForward();
      s.stepBackward();
      if (!(views(s) == at)) CHECK(views(s) == at);
    }
    std::uniform_int_distribution<int64_t> pick(0, static_cast<int64_t>(w.endCycle) + 5);
    for (int k = 0; k < 50; ++k) {
      s.seek(pick(rng));
      (void)s.ganttData(true);
      (void)s.activeIr();
    }
    CHECK(s.live()->device().state() == device);
    s.exitReplay();
    CHECK(s.live()->device().state() == device);
  }
}

TEST_CASE("dynamic Gantt boxes cover exactly the active instructions" * doctest::description("property")) {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    CAPTURE(seed);
    auto db = compileText(generateProgram(seed), seed % 2 ? OptLevel::O2 : OptLevel::O0);
    Session s(db, wholeRun());
    s.run();
    s.enterReplay();
    auto w = s.window();
    std::map<std::pair<uint64_t, InstrId>, int> cover;
    for (const auto& b : s.ganttData(true)) {
      CHECK(b.stepStart <= b.stepEnd);
      for (int64_t c = b.stepStart; c <= b.stepEnd && c <= static_cast<int64_t>(w.endCycle); ++c)
        ++cover[{static_cast<uint64_t>(c), b.irId}];
    }
    size_t expected = 0;
    for (uint64_t c = w.startCycle; c <= w.endCycle; ++c) {
      for (InstrId id : db.state(s.replay()->stateAt(c)).activeInstrs) {
        ++expected;
        auto it = cover.find({c, id});
        if (it == cover.end() || it->second != 1) CHECK(false);
      }
    }
    CHECK(cover.size() == expected);
  }
}

TEST_CASE("breakpoint hits are followed by a paused event" * doctest::description("property")) {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    CAPTURE(seed);
    auto db = compileText(generateProgram(seed), OptLevel::O0);
    Session s(db, manager::SessionConfig{});
    std::vector<manager::Event> events;
    s.subscribe([&](const manager::Event& e) { events.push_back(e); });
    std::set<int> lines;
    for (const auto& r : db.ir) lines.insert(r.sourceLine);
    int armed = 0;
    for (int line : lines)
      if (armed < 4 && line % 3 == 0) {
        s.setBreakpoint(line);
        ++armed;
      }
    auto armedLines = s.status().breakpoints;
    for (int k = 0; k < 200 && s.status().deviceStatus == device::Status::Paused; ++k) s.run();
    for (int line : std::set<int>(s.status().breakpoints)) s.clearBreakpoint(line);
    if (s.status().deviceStatus == device::Status::Paused) s.run();
    for (size_t k = 0; k < events.size(); ++k)
      if (events[k].kind == EventKind::BreakpointHit) {
        REQUIRE(k + 1 < events.size());
        CHECK(events[k + 1].kind == EventKind::Paused);
        CHECK(armedLines.count(events[k].line));
      }
    CHECK(events.back().kind == EventKind::Halted);
  }
}
