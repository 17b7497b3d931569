// SPDX-License-Identifier: Apache-2.0
#include "trace/trace.hpp"

#include <algorithm>
#include <set>

#include "common/error.hpp"
#include "json.hpp"

namespace hlsdbg::trace {

using json = nlohmann::json;
using sched::TransitionKind;

namespace {

[[noreturn]] void corrupt(const std::string& what) { throw Error(ErrorCode::CorruptTrace, what); }

}  // namespace

ReplayWindow TraceCapture::window() const {
  uint64_t start = std::max(controlStartCycle, dataStartCycle);
  return {std::min(start, pauseCycle), pauseCycle};
}

Recorder::Recorder(std::shared_ptr<const sched::ScheduledDesign> design, TraceConfig config)
    : design_(std::move(design)), config_(config) {
  if (config_.capacityRecords == 0 || config_.capacityEntries == 0)
    throw Error(ErrorCode::InvalidParams, "trace capacities must be positive");
  start(design_->entryState, 0);
}

void Recorder::start(StateId state, uint64_t cycle) {
  runs_.clear();
  entries_.clear();
  runs_.push_back({state, 1});
  firstCycle_ = cycle;
  droppedCycles_ = 0;
  dataEvicted_ = false;
  lastEvictedCycle_ = 0;
  cycles_ = 0;
}

void Recorder::push(DataEntry e) {
  entries_.push_back(e);
  if (entries_.size() > config_.capacityEntries) {
    dataEvicted_ = true;
    lastEvictedCycle_ = entries_.front().cycle;
    entries_.pop_front();
  }
}

void Recorder::record(const device::InstrumentationEvent& ev) {
  ++cycles_;
  const sched::FsmState& prev = design_->state(ev.prevState);
  if (ev.nextState == prev.defaultNext && !runs_.empty()) {
    ++runs_.back().length;
  } else {
    runs_.push_back({ev.nextState, 1});
    if (runs_.size() > config_.capacityRecords) {
      droppedCycles_ += runs_.front().length;
      runs_.pop_front();
    }
  }
  uint64_t visible = ev.cycle + 1;
  for (const auto& w : ev.regWrites) push({visible, registerSignal(w.reg), w.value});
  for (const auto& w : ev.memWrites) push({visible, memorySignal(w.mem, w.offset), w.value});
}

TraceCapture Recorder::snapshot(const device::Device& dev) const {
  TraceCapture c;
  c.controlRuns.assign(runs_.begin(), runs_.end());
  c.dataEntries.assign(entries_.begin(), entries_.end());
  c.controlStartCycle = firstCycle_ + droppedCycles_;
  c.dataStartCycle = dataEvicted_ ? lastEvictedCycle_ + 1 : firstCycle_;
  c.pauseCycle = dev.state().cycle;
  c.cyclesRecorded = cycles_;
  for (const auto& r : design_->registers) c.registers[r.id] = dev.state().registers.at(static_cast<size_t>(r.id));
  for (const auto& m : design_->memories) c.memories[m.id] = dev.state().memories.at(static_cast<size_t>(m.id));
  return c;
}

DecodedControl decodeControl(const TraceCapture& capture, const sched::ScheduledDesign& design) {
  DecodedControl out;
  out.startCycle = capture.controlStartCycle;
  if (capture.controlRuns.empty()) return out;
  std::map<std::string, std::set<StateId>> returnSites;
  for (const auto& st : design.states)
    if (st.kind == TransitionKind::Call) returnSites[st.callee].insert(st.returnState);

  auto legalBreak = [&](const sched::FsmState& from, StateId to) {
    if (to == from.defaultNext) return true;
    if (from.kind == TransitionKind::Branch) return to == from.branch->takenNext;
    if (from.kind == TransitionKind::Return && from.defaultNext < 0) return returnSites[from.function].count(to) > 0;
    return false;
  };
  for (size_t i = 0; i < capture.controlRuns.size(); ++i) {
    const ControlRun& run = capture.controlRuns[i];
    if (run.length == 0) corrupt("control run " + std::to_string(i) + " is empty");
    if (!design.hasState(run.startState)) corrupt("control run " + std::to_string(i) + " starts in unknown state");
    if (i > 0 && !legalBreak(design.state(out.states.back()), run.startState))
      corrupt("control run " + std::to_string(i) + " does not follow state " + std::to_string(out.states.back()));
    StateId s = run.startState;
    out.states.push_back(s);
    for (uint64_t k = 1; k < run.length; ++k) {
      s = design.state(s).defaultNext;
      if (!design.hasState(s)) corrupt("control run " + std::to_string(i) + " leaves the FSM");
      out.states.push_back(s);
    }
  }
  if (out.startCycle + out.states.size() - 1 != capture.pauseCycle)
    corrupt("control trace does not end at the pause cycle");
  return out;
}

std::string_view viewKindName(ViewKind k) noexcept {
  switch (k) {
    case ViewKind::Known: return "Known";
    case ViewKind::UnknownBeforeFirstUpdate: return "UnknownBeforeFirstUpdate";
    case ViewKind::FromMemory: return "FromMemory";
    case ViewKind::OptimizedOut: return "OptimizedOut";
  }
  return "?";
}

int32_t CapturePort::readRegister(RegId reg) const {
  auto it = capture_.registers.find(reg);
  if (it == capture_.registers.end()) throw Error(ErrorCode::UnknownRegister, "no register " + std::to_string(reg));
  return it->second;
}

int32_t CapturePort::readMemory(MemId mem, int32_t offset) const {
  auto it = capture_.memories.find(mem);
  if (it == capture_.memories.end()) throw Error(ErrorCode::UnknownMemory, "no memory " + std::to_string(mem));
  if (offset < 0 || static_cast<size_t>(offset) >= it->second.size())
    throw Error(ErrorCode::OffsetOutOfRange, "offset " + std::to_string(offset) + " outside memory " + std::to_string(mem));
  return it->second[static_cast<size_t>(offset)];
}

Replay::Replay(TraceCapture capture, std::shared_ptr<const sched::ScheduledDesign> design)
    : capture_(std::move(capture)), design_(std::move(design)) {
  if (capture_.empty()) throw Error(ErrorCode::EmptyTrace, "nothing has been recorded");
  window_ = capture_.window();
  control_ = decodeControl(capture_, *design_);
  uint64_t prev = 0;
  for (const auto& e : capture_.dataEntries) {
    if (e.cycle < prev) corrupt("data entries are out of order");
    prev = e.cycle;
    if (e.cycle < window_.startCycle || e.cycle > window_.endCycle) continue;
    timeline_[e.signal].emplace_back(e.cycle, e.value);
  }
}

StateId Replay::stateAt(uint64_t cycle) const {
  if (!window_.contains(cycle) || !control_.covers(cycle))
    throw Error(ErrorCode::CycleOutsideWindow, "cycle " + std::to_string(cycle) + " is outside the replay window");
  return control_.at(cycle);
}

VariableView Replay::reconstructSignal(uint64_t cycle, SignalId signal, const MemoryReadPort& port) const {
  if (!window_.contains(cycle))
    throw Error(ErrorCode::CycleOutsideWindow, "cycle " + std::to_string(cycle) + " is outside the replay window");
  auto it = timeline_.find(signal);
  if (it == timeline_.end()) {
    int32_t v = signal < kMemorySpace
                    ? port.readRegister(static_cast<RegId>(signal))
                    : port.readMemory(static_cast<MemId>(signal / kMemorySpace) - 1,
                                      static_cast<int32_t>(signal % kMemorySpace));
    return {ViewKind::FromMemory, v, {}};
  }
  const auto& updates = it->second;
  auto after = std::upper_bound(updates.begin(), updates.end(), cycle,
                                [](uint64_t c, const std::pair<uint64_t, int32_t>& u) { return c < u.first; });
  if (after == updates.begin()) return {ViewKind::UnknownBeforeFirstUpdate, 0, {}};
  return {ViewKind::Known, std::prev(after)->second, {}};
}

VariableView Replay::reconstruct(uint64_t cycle, const debugdb::VariableRecord& var, const MemoryReadPort& port) const {
  switch (var.location.kind) {
    case debugdb::LocationKind::OptimizedOut:
      if (!window_.contains(cycle))
        throw Error(ErrorCode::CycleOutsideWindow, "cycle " + std::to_string(cycle) + " is outside the replay window");
      return {};
    case debugdb::LocationKind::Register:
      return reconstructSignal(cycle, registerSignal(var.location.id), port);
    case debugdb::LocationKind::Memory: break;
  }
  auto mem = std::find_if(design_->memories.begin(), design_->memories.end(),
                                 [&](const sched::MemoryBinding& m) { return m.id == var.location.id; });
  if (mem == design_->memories.end()) throw Error(ErrorCode::UnknownMemory, "no memory for " + var.name);
  VariableView view;
  view.kind = ViewKind::FromMemory;
  for (int32_t k = 0; k < mem->length - var.location.baseOffset; ++k) {
    auto e = reconstructSignal(cycle, memorySignal(mem->id, var.location.baseOffset + k), port);
    if (e.kind == ViewKind::UnknownBeforeFirstUpdate ||
        (e.kind == ViewKind::Known && view.kind == ViewKind::FromMemory))
      view.kind = e.kind;
    view.elements.push_back(e);
  }
  return view;
}

std::string dumpJson(const TraceCapture& c, int indent) {
  json runs = json::array();
  for (const auto& r : c.controlRuns) runs.push_back({r.startState, r.length});
  json entries = json::array();
  for (const auto& e : c.dataEntries) entries.push_back({e.cycle, e.signal, e.value});
  json regs = json::array();
  for (const auto& [id, v] : c.registers) regs.push_back({id, v});
  json mems = json::array();
  for (const auto& [id, v] : c.memories) mems.push_back({id, v});
  auto w = c.window();
  json doc = {
      {"controlRuns", runs},
      {"dataEntries", entries},
      {"window", {w.startCycle, w.endCycle}},
      {"pauseCycle", c.pauseCycle},
      {"controlStartCycle", c.controlStartCycle},
      {"dataStartCycle", c.dataStartCycle},
      {"cyclesRecorded", c.cyclesRecorded},
      {"registers", regs},
      {"memories", mems},
  };
  return doc.dump(indent);
}

TraceCapture parseDump(std::string_view text) {
  try {
    json doc = json::parse(text);
    TraceCapture c;
    for (const auto& r : doc.at("controlRuns"))
      c.controlRuns.push_back({r.at(0).get<StateId>(), r.at(1).get<uint64_t>()});
    for (const auto& e : doc.at("dataEntries"))
      c.dataEntries.push_back({e.at(0).get<uint64_t>(), e.at(1).get<SignalId>(), e.at(2).get<int32_t>()});
    c.pauseCycle = doc.at("pauseCycle").get<uint64_t>();
    c.controlStartCycle = doc.at("controlStartCycle").get<uint64_t>();
    c.dataStartCycle = doc.at("dataStartCycle").get<uint64_t>();
    c.cyclesRecorded = doc.at("cyclesRecorded").get<uint64_t>();
    for (const auto& r : doc.at("registers")) c.registers[r.at(0).get<RegId>()] = r.at(1).get<int32_t>();
    for (const auto& m : doc.at("memories")) c.memories[m.at(0).get<MemId>()] = m.at(1).get<std::vector<int32_t>>();
    auto w = doc.at("window");
    if (w.at(0).get<uint64_t>() != c.window().startCycle || w.at(1).get<uint64_t>() != c.window().endCycle)
      corrupt("window does not match the recorded coverage");
    return c;
  } catch (const json::exception& e) {
    corrupt(std::string("malformed trace dump: ") + e.what());
  }
}

}  // namespace hlsdbg::trace
