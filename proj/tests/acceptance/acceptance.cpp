// SPDX-License-Identifier: Apache-2.0
// One line per acceptance criterion; exit status is the number of failures.
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "common/error.hpp"
#include "manager/manager.hpp"
#include "server/protocol.hpp"
#include "server/server.hpp"
#include "support/compile.hpp"
#include "support/device_log.hpp"
#include "support/fuzz.hpp"
#include "support/program_gen.hpp"
#include "support/source_interp.hpp"
#include "support/tcp_client.hpp"

using namespace hlsdbg;
using namespace hlsdbg::testing;
using frontend::OptLevel;
using trace::ViewKind;

namespace {

constexpr int kSeeds = 200;
constexpr OptLevel kLevels[] = {OptLevel::O0, OptLevel::O2};

struct Program {
  std::string name;
  std::string text;
};

std::vector<Program> corpus() {
  std::vector<Program> out;
  for (const char* fix : {"fix_a.c", "fix_b.c", "fix_c.c", "fix_d.c"}) out.push_back({fix, readFixture(fix)});
  for (int seed = 0; seed < kSeeds; ++seed) out.push_back({"seed " + std::to_string(seed), generateProgram(seed)});
  return out;
}

std::string straightLine(int statements) {
  std::ostringstream os;
  os << "int main() {\n  int x = 1;\n";
  for (int i = 0; i < statements; ++i) os << "  x = x * 3 + " << i << ";\n";
  os << "  return x;\n}\n";
  return os.str();
}

manager::SessionConfig withTrace(uint32_t records, uint32_t entries) {
  manager::SessionConfig c;
  c.trace = {records, entries};
  return c;
}

const manager::SessionConfig kWhole = withTrace(1u << 20, 1u << 22);
const manager::SessionConfig kSmall = withTrace(16, 64);

// Thrown by criteria to report the first counterexample.
struct Failure {
  std::string what;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw Failure{what};
}

std::string where(const Program& p, OptLevel level, uint64_t cycle) {
  return p.name + " " + std::string(frontend::optLevelName(level)) + " cycle " + std::to_string(cycle);
}

// Session run to halt, then switched to Replay.
struct Replayed {
  debugdb::DebugDatabase db;
  std::unique_ptr<manager::Session> session;
};

Replayed replayed(const Program& p, OptLevel level, const manager::SessionConfig& cfg) {
  Replayed r;
  r.db = compileText(p.text, level, p.name);
  r.session = std::make_unique<manager::Session>(r.db, cfg);
  r.session->run();
  require(r.session->status().deviceStatus == device::Status::Halted, p.name + " did not halt");
  r.session->enterReplay();
  return r;
}

int32_t truthOf(const CycleRecord& rec, trace::SignalId sig) {
  if (sig < trace::kMemorySpace) return rec.registers.at(static_cast<size_t>(sig));
  return rec.memories.at(static_cast<size_t>(sig / trace::kMemorySpace - 1)).at(sig % trace::kMemorySpace);
}

std::vector<trace::SignalId> allSignals(const sched::ScheduledDesign& d) {
  std::vector<trace::SignalId> out;
  for (const auto& r : d.registers) out.push_back(trace::registerSignal(r.id));
  for (const auto& m : d.memories)
    for (int32_t k = 0; k < m.length; ++k) out.push_back(trace::memorySignal(m.id, k));
  return out;
}

// ------------------------------------------------------------------ criteria

std::string semanticEquivalence() {
  int checked = 0;
  for (const auto& p : corpus()) {
    auto expect = runSource(parseText(p.text));
    require(expect.status == SourceResult::Status::Ok, p.name + ": interpreter " + statusName(expect.status));
    for (OptLevel level : kLevels) {
      manager::Session s(compileText(p.text, level, p.name), manager::SessionConfig{});
      s.run();
      auto got = s.returnValue();
      require(got.has_value(), where(p, level, s.status().deviceCycle) + ": did not halt");
      require(*got == expect.value, p.name + " " + std::string(frontend::optLevelName(level)) + ": device " +
                                        std::to_string(*got) + " != source " + std::to_string(expect.value));
      ++checked;
    }
  }
  return std::to_string(checked) + " program builds agree";
}

std::string replayEqualsLive() {
  uint64_t cycles = 0;
  for (const auto& p : corpus())
    for (OptLevel level : kLevels) {
      auto r = replayed(p, level, kWhole);
      auto& s = *r.session;
      auto w = s.window();
      require(w.startCycle == 0 && w.endCycle == s.status().deviceCycle, p.name + ": window misses the run");
      Reference ref(r.db.design());
      for (uint64_t c = 0; c <= w.endCycle; ++c) {
        s.seek(static_cast<int64_t>(c));
        const auto truth = ref.at(c);
        require(s.activeLines() == r.db.linesForState(truth.state), where(p, level, c) + ": active lines differ");
        for (const auto& nv : s.listVariables()) {
          const auto& loc = nv.variable->location;
          if (loc.kind == debugdb::LocationKind::Register && nv.view.kind == ViewKind::Known)
            require(nv.view.value == truth.registers.at(static_cast<size_t>(loc.id)),
                    where(p, level, c) + ": " + nv.variable->name + " differs");
          for (size_t k = 0; k < nv.view.elements.size(); ++k) {
            const auto& e = nv.view.elements[k];
            if (e.kind == ViewKind::Known)
              require(e.value == truth.memories.at(static_cast<size_t>(loc.id)).at(k + static_cast<size_t>(loc.baseOffset)),
                      where(p, level, c) + ": " + nv.variable->name + "[" + std::to_string(k) + "] differs");
          }
        }
        ++cycles;
      }
    }
  return std::to_string(cycles) + " cycles compared";
}

std::string smallBuffers() {
  uint64_t views = 0;
  uint64_t unknown = 0;
  uint64_t fromMemory = 0;
  for (const auto& p : corpus())
    for (OptLevel level : kLevels) {
      auto r = replayed(p, level, kSmall);
      const auto& replay = *r.session->replay();
      const auto& port = r.session->live()->memoryPort();
      auto w = replay.window();
      require(replay.capture().controlRuns.size() <= 16 && replay.capture().dataEntries.size() <= 64,
              p.name + ": buffers exceed capacity");
      // Uncompressed log of the window, and the first in-window write per
      // signal.
      Reference ref(r.db.design());
      std::vector<CycleRecord> log;
      std::map<trace::SignalId, uint64_t> first;
      for (uint64_t k = w.startCycle; k <= w.endCycle; ++k) {
        log.push_back(ref.at(k));
        if (k == 0) continue;
        for (const auto& wr : log.back().regWrites) first.emplace(trace::registerSignal(wr.reg), k);
        for (const auto& wr : log.back().memWrites) first.emplace(trace::memorySignal(wr.mem, wr.offset), k);
      }
      auto signals = allSignals(*r.db.design());
      for (uint64_t c = w.startCycle; c <= w.endCycle; ++c)
        for (auto sig : signals) {
          auto v = replay.reconstructSignal(c, sig, port);
          int32_t truth = truthOf(log[c - w.startCycle], sig);
          auto it = first.find(sig);
          std::string at = where(p, level, c) + " signal " + std::to_string(sig);
          switch (v.kind) {
            case ViewKind::Known: require(v.value == truth && it != first.end() && it->second <= c, at + ": bad Known"); break;
            case ViewKind::UnknownBeforeFirstUpdate:
              require(it != first.end() && it->second > c, at + ": Unknown without a later first write");
              ++unknown;
              break;
            case ViewKind::FromMemory:
              require(it == first.end() && v.value == truth, at + ": bad FromMemory");
              ++fromMemory;
              break;
            case ViewKind::OptimizedOut: require(false, at + ": OptimizedOut signal"); break;
          }
          ++views;
        }
    }
  return std::to_string(views) + " views, " + std::to_string(unknown) + " unknown, " + std::to_string(fromMemory) +
         " from memory";
}

struct Snapshot {
  std::set<int> lines;
  std::vector<InstrId> ir;
  std::vector<trace::VariableView> vars;
  bool operator==(const Snapshot&) const = default;
};

Snapshot snapshot(const manager::Session& s) {
  Snapshot v{s.activeLines(), {}, {}};
  for (const auto& r : s.activeIr()) v.ir.push_back(r.id);
  for (const auto& nv : s.listVariables()) v.vars.push_back(nv.view);
  return v;
}

std::string timeTravel() {
  uint64_t cycles = 0;
  for (const auto& p : corpus())
    for (OptLevel level : kLevels)
      for (const auto* cfg : {&kSmall, &kWhole}) {
        if (cfg == &kWhole && p.name.rfind("seed", 0) == 0 && p.name != "seed 0") continue;
        auto r = replayed(p, level, *cfg);
        auto& s = *r.session;
        auto w = s.window();
        std::vector<Snapshot> stepped;
        s.seek(static_cast<int64_t>(w.startCycle));
        stepped.push_back(snapshot(s));
        for (uint64_t c = w.startCycle; c < w.endCycle; ++c) {
          s.stepForward();
          stepped.push_back(snapshot(s));
        }
        for (uint64_t c = w.startCycle; c <= w.endCycle; ++c) {
          s.seek(static_cast<int64_t>(c));
          auto at = snapshot(s);
          require(at == stepped[c - w.startCycle], where(p, level, c) + ": seek differs from stepping");
          if (c < w.endCycle) {
            s.stepForward();
            s.stepBackward();
            require(snapshot(s) == at, where(p, level, c) + ": step then step back differs");
          }
          ++cycles;
        }
      }
  return std::to_string(cycles) + " cycles";
}

std::string extendWindowScenario() {
  Program p{"fix_b.c", readFixture("fix_b.c")};
  auto r = replayed(p, OptLevel::O0, kSmall);
  auto& s = *r.session;
  auto old = s.window();
  require(old.startCycle > 0, "small buffers already cover the whole run");
  std::map<uint64_t, std::vector<trace::VariableView>> before;
  for (uint64_t c = old.startCycle; c <= old.endCycle; ++c) {
    s.seek(static_cast<int64_t>(c));
    for (const auto& nv : s.listVariables()) before[c].push_back(nv.view);
  }
  uint64_t target = old.startCycle - 1;
  s.extendWindow(static_cast<int64_t>(target));
  auto now = s.window();
  require(now.contains(target), "extended window misses the target");
  int compared = 0;
  for (uint64_t c = std::max(now.startCycle, old.startCycle); c <= std::min(now.endCycle, old.endCycle); ++c) {
    s.seek(static_cast<int64_t>(c));
    auto vars = s.listVariables();
    for (size_t k = 0; k < vars.size(); ++k) {
      const auto& a = before[c][k];
      const auto& b = vars[k].view;
      if (a.kind == ViewKind::Known && b.kind == ViewKind::Known) {
        require(a.value == b.value, "overlap disagrees at cycle " + std::to_string(c));
        ++compared;
      }
    }
  }
  require(compared > 0, "no overlapping Known values");
  std::ostringstream os;
  os << "[" << old.startCycle << "," << old.endCycle << "] -> [" << now.startCycle << "," << now.endCycle
     << "], " << compared << " overlap values agree";
  return os.str();
}

std::string ganttScenario() {
  Program p{"fix_b.c", readFixture("fix_b.c")};
  auto r = replayed(p, OptLevel::O2, kWhole);
  std::map<InstrId, int> perOrigin;
  for (const auto& b : r.session->ganttData(true))
    if (b.sourceLine == 7 || b.sourceLine == 2) ++perOrigin[b.origin];
  require(!perOrigin.empty(), "no loop-body boxes");
  for (const auto& [origin, n] : perOrigin)
    require(n == 10, "origin " + std::to_string(origin) + " has " + std::to_string(n) + " instances");

  auto o0 = replayed(p, OptLevel::O0, kWhole);
  const auto& ctl = o0.session->replay()->control();
  int backEdges = 0;
  for (size_t k = 0; k + 1 < ctl.states.size(); ++k) {
    const auto& from = o0.db.state(ctl.states[k]);
    const auto& to = o0.db.state(ctl.states[k + 1]);
    if (from.function == to.function && to.id <= from.id && from.kind != sched::TransitionKind::Return) ++backEdges;
  }
  require(backEdges >= 10, "O0 back-edge taken " + std::to_string(backEdges) + " times");
  return std::to_string(perOrigin.size()) + " origins x 10 at O2; back-edge x" + std::to_string(backEdges) + " at O0";
}

std::pair<StateId, StateId> fixCOrder(OptLevel level) {
  auto db = compileFixture("fix_c.c", level);
  StateId post = INT32_MAX;
  StateId divide = INT32_MAX;
  for (const auto& rec : db.ir) {
    StateId start = db.scheduleOf(rec.id).stateStart;
    if (rec.sourceLine == 8 || rec.sourceLine == 9) post = std::min(post, start);
    if (rec.sourceLine == 6 && rec.opcode == "div") divide = std::min(divide, start);
  }
  require(post != INT32_MAX && divide != INT32_MAX, "FIX-C lines missing from the schedule");
  return {post, divide};
}

std::string reorderScenario() {
  auto [post2, div2] = fixCOrder(OptLevel::O2);
  auto [post0, div0] = fixCOrder(OptLevel::O0);
  require(post2 <= div2, "O2 post-if starts at " + std::to_string(post2) + " after divide " + std::to_string(div2));
  require(post0 > div0, "O0 post-if starts at " + std::to_string(post0) + " before divide " + std::to_string(div0));
  return "O2 " + std::to_string(post2) + "<=" + std::to_string(div2) + ", O0 " + std::to_string(post0) + ">" +
         std::to_string(div0);
}

std::string parallelStep() {
  manager::Session s(compileFixture("fix_a.c", OptLevel::O0), manager::SessionConfig{});
  auto lines = s.activeLines();
  require(lines.size() >= 2, "first step has " + std::to_string(lines.size()) + " lines");
  s.stepForward();
  require(s.readVariable("a").value == 3 && s.readVariable("b").value == 4, "one step did not commit both lines");
  std::string out;
  for (int l : lines) out += (out.empty() ? "" : ",") + std::to_string(l);
  return "lines {" + out + "} in one step";
}

std::string breakpointLimits() {
  // Five lines whose breakpoints watch five different states.
  auto db = compileFixture("fix_c.c", OptLevel::O0);
  manager::Session s(db, manager::SessionConfig{});
  std::set<int> code;
  for (const auto& rec : db.ir) code.insert(rec.sourceLine);
  std::vector<int> lines;
  std::set<StateId> states;
  for (int line : code)
    if (states.insert(db.breakpointState(line)).second) lines.push_back(line);
  require(lines.size() >= 5, "FIX-C has fewer than five breakpoint states");
  for (int k = 0; k < 4; ++k) s.setBreakpoint(lines[static_cast<size_t>(k)]);
  bool refused = false;
  try {
    s.setBreakpoint(lines[4]);
  } catch (const Error& e) {
    refused = e.code() == ErrorCode::OutOfBreakpointUnits;
  }
  require(refused, "5th live breakpoint accepted");

  auto prog = straightLine(20);
  manager::Session r(compileText(prog, OptLevel::O0), manager::SessionConfig{});
  r.run();
  r.enterReplay();
  for (int line = 2; line <= 22; ++line) r.setBreakpoint(line);
  auto n = r.status().replayBreakpoints.size();
  require(n >= 16, "replay kept " + std::to_string(n) + " breakpoints");
  return "5th live refused; " + std::to_string(n) + " replay breakpoints";
}

std::string compression() {
  manager::Session s(compileText(straightLine(250), OptLevel::O0), manager::SessionConfig{});
  s.run();
  auto cap = s.live()->takeTraceSnapshot();
  uint64_t cycles = s.status().deviceCycle;
  require(cycles >= 500, "only " + std::to_string(cycles) + " cycles");
  require(cap.controlRuns.size() <= 6, std::to_string(cap.controlRuns.size()) + " control runs");
  require(cap.controlStartCycle == 0, "control trace dropped records");
  return std::to_string(cycles) + " cycles in " + std::to_string(cap.controlRuns.size()) + " runs";
}

std::string protocolFuzz() {
  manager::Session s(compileFixture("fix_b.c", OptLevel::O0), withTrace(16, 64));
  server::Server srv(s, 0);
  std::thread t([&] { srv.serve(); });
  LineClient c(srv.port());
  std::mt19937_64 rng(2024);
  int answered = 0;
  int rejected = 0;
  int sent = 0;
  for (; sent < 10000; ++sent) {
    auto line = fuzzLine(rng);
    require(c.send(line + "\n"), "connection dropped after " + std::to_string(sent) + " lines");
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      ++answered;  // blank lines are framing, not requests
      continue;
    }
    for (;;) {
      auto reply = c.readLine();
      require(reply.has_value(), "no reply to line " + std::to_string(sent));
      auto doc = server::json::parse(*reply);
      if (doc.contains("event")) continue;
      if (doc.contains("result")) ++answered;
      else if (doc.contains("error")) ++rejected;
      else require(false, "reply is neither result nor error");
      break;
    }
  }
  c.send("{\"id\":0,\"method\":\"shutdown\"}\n");
  t.join();
  return std::to_string(sent) + " lines: " + std::to_string(answered) + " answered, " + std::to_string(rejected) +
         " rejected";
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<std::string()> run;
    double limitSeconds;
  };
  const Criterion criteria[] = {
      {"semantic equivalence", semanticEquivalence, 60},
      {"replay equals live", replayEqualsLive, 0},
      {"small-buffer soundness", smallBuffers, 0},
      {"time travel", timeTravel, 0},
      {"window extension scenario", extendWindowScenario, 0},
      {"loop unrolling gantt scenario", ganttScenario, 0},
      {"code reordering scenario", reorderScenario, 0},
      {"parallel stepping", parallelStep, 0},
      {"breakpoint limits", breakpointLimits, 0},
      {"control-trace compression", compression, 0},
      {"protocol robustness", protocolFuzz, 30},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::string detail;
    try {
      detail = c.run();
    } catch (const Failure& f) {
      ok = false;
      detail = f.what;
    } catch (const std::exception& e) {
      ok = false;
      detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (ok && c.limitSeconds > 0 && secs > c.limitSeconds) {
      ok = false;
      detail += "; over the " + std::to_string(static_cast<int>(c.limitSeconds)) + " s budget";
    }
    std::printf("%s  %-30s %s (%.2f s)\n", ok ? "PASS" : "FAIL", c.name, detail.c_str(), secs);
    std::fflush(stdout);
    failures += ok ? 0 : 1;
  }
  return failures;
}
