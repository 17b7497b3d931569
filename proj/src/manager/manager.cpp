// SPDX-License-Identifier: Apache-2.0
#include "manager/manager.hpp"

#include <algorithm>

#include "common/error.hpp"

namespace hlsdbg::manager {

std::string_view modeName(Mode m) noexcept { return m == Mode::Live ? "live" : "replay"; }

std::string_view eventName(EventKind k) noexcept {
  switch (k) {
    case EventKind::Paused: return "paused";
    case EventKind::BreakpointHit: return "breakpointHit";
    case EventKind::Halted: return "halted";
    case EventKind::Faulted: return "faulted";
    case EventKind::WindowReady: return "windowReady";
  }
  return "?";
}

// ------------------------------------------------------------------ backends

LiveBackend::LiveBackend(std::shared_ptr<const sched::ScheduledDesign> design, const SessionConfig& config)
    : device_(design), recorder_(design, config.trace), units_(config.breakpointUnits), port_(device_) {
  device_.setObserver([this](const device::InstrumentationEvent& ev) { recorder_.record(ev); });
}

void LiveBackend::reset() {
  device_.reset();
  recorder_.start(device_.state().currentState, device_.state().cycle);
}

device::RunResult LiveBackend::run(uint64_t maxCycles, const std::atomic<bool>* pauseRequest) {
  return device_.runUntilBreakOrHalt(units_, maxCycles, pauseRequest);
}

void LiveBackend::armBreakpoints(const std::set<StateId>& states) {
  device::BreakpointUnits next(units_.capacity());
  for (StateId s : states) next.arm(s);
  units_ = next;
}

ReplayBackend::ReplayBackend(trace::TraceCapture capture) : capture_(std::move(capture)), port_(capture_) {}

void ReplayBackend::reset() {
  throw Error(ErrorCode::NondeterministicBackend, "a saved trace cannot be re-run");
}

device::RunResult ReplayBackend::run(uint64_t, const std::atomic<bool>*) {
  throw Error(ErrorCode::InvalidState, "a saved trace cannot run the design");
}

void ReplayBackend::stepCycle() { throw Error(ErrorCode::InvalidState, "a saved trace cannot step the design"); }

// ------------------------------------------------------------------- session

Session::Session(debugdb::DebugDatabase db, SessionConfig config)
    : db_(std::move(db)), config_(config), design_(db_.design()) {
  live_ = std::make_unique<LiveBackend>(design_, config_);
}

Session::Session(debugdb::DebugDatabase db, trace::TraceCapture capture, SessionConfig config)
    : db_(std::move(db)), config_(config), design_(db_.design()) {
  saved_ = std::make_unique<ReplayBackend>(capture);
  replay_ = std::make_unique<trace::Replay>(std::move(capture), design_);
  mode_ = Mode::Replay;
  position_ = replay_->window().endCycle;
}

const Backend& Session::backend() const {
  if (live_) return *live_;
  return *saved_;
}

void Session::requireLive(const char* what) const {
  if (mode_ != Mode::Live) throw Error(ErrorCode::InvalidState, std::string(what) + " needs live mode");
}

void Session::requireReplay(const char* what) const {
  if (mode_ != Mode::Replay) throw Error(ErrorCode::InvalidState, std::string(what) + " needs replay mode");
}

StateId Session::currentState() const {
  if (mode_ == Mode::Replay) return replay_->stateAt(position_);
  return live_->device().state().currentState;
}

SessionStatus Session::status() const {
  SessionStatus s;
  s.mode = mode_;
  if (live_) {
    const auto& ds = live_->device().state();
    s.deviceStatus = ds.status;
    s.fault = ds.fault;
    s.timedOut = ds.timedOut;
    s.deviceCycle = ds.cycle;
    s.unitsUsed = live_->units().used();
    s.unitsTotal = live_->units().capacity();
    s.canRun = true;
  } else {
    s.deviceCycle = replay_->capture().pauseCycle;
    s.unitsTotal = config_.breakpointUnits;
  }
  s.position = mode_ == Mode::Replay ? position_ : s.deviceCycle;
  s.state = currentState();
  if (replay_) s.window = replay_->window();
  s.breakpoints = breakpoints_;
  s.replayBreakpoints = replayBreakpoints_;
  return s;
}

// --------------------------------------------------------------- breakpoints

void Session::rearm() {
  std::set<StateId> states;
  for (int line : breakpoints_) states.insert(db_.breakpointState(line));
  live_->armBreakpoints(states);
}

void Session::setBreakpoint(int line) {
  db_.breakpointState(line);  // throws for lines without code
  if (mode_ == Mode::Replay) {
    replayBreakpoints_.insert(line);
    return;
  }
  if (breakpoints_.count(line)) return;
  breakpoints_.insert(line);
  try {
    rearm();
  } catch (...) {
    breakpoints_.erase(line);
    throw;
  }
}

void Session::clearBreakpoint(int line) {
  if (mode_ == Mode::Replay) {
    replayBreakpoints_.erase(line);
    return;
  }
  if (breakpoints_.erase(line)) rearm();
}

int Session::lineForState(StateId state, const std::set<int>& lines) const {
  for (int line : lines)
    if (db_.breakpointState(line) == state) return line;
  return 0;
}

// ----------------------------------------------------------------- execution

void Session::run() {
  if (mode_ == Mode::Replay) {
    // Software breakpoints: scan forward through the window.
    std::set<StateId> watch;
    for (int line : replayBreakpoints_) watch.insert(db_.breakpointState(line));
    const auto w = replay_->window();
    for (uint64_t c = position_ + 1; c <= w.endCycle; ++c) {
      StateId s = replay_->stateAt(c);
      if (watch.count(s)) {
        position_ = c;
        emit({EventKind::BreakpointHit, c, lineForState(s, replayBreakpoints_), {}, {}});
        emit({EventKind::Paused, c, 0, "breakpoint", {}});
        return;
      }
    }
    position_ = w.endCycle;
    emit({EventKind::Paused, position_, 0, "windowEnd", {}});
    return;
  }
  auto result = live_->run(config_.maxCycles, &pauseRequested_);
  const auto& ds = live_->device().state();
  switch (result.reason) {
    case device::StopReason::Breakpoint:
      emit({EventKind::BreakpointHit, ds.cycle, lineForState(ds.currentState, breakpoints_), {}, {}});
      emit({EventKind::Paused, ds.cycle, 0, "breakpoint", {}});
      break;
    case device::StopReason::Halted: emit({EventKind::Halted, ds.cycle, 0, {}, {}}); break;
    case device::StopReason::Faulted:
      emit({EventKind::Faulted, ds.cycle, 0, std::string(device::faultName(ds.fault)), {}});
      break;
    case device::StopReason::Timeout: emit({EventKind::Paused, ds.cycle, 0, "timeout", {}}); break;
    case device::StopReason::PauseRequested: emit({EventKind::Paused, ds.cycle, 0, "pause", {}}); break;
  }
}

void Session::pause() { pauseRequested_ = false; }

void Session::stepForward() {
  if (mode_ == Mode::Replay) {
    if (position_ >= replay_->window().endCycle)
      throw Error(ErrorCode::WindowOverflow, "already at the end of the replay window");
    ++position_;
    return;
  }
  live_->stepCycle();
  const auto& ds = live_->device().state();
  if (ds.status == device::Status::Halted)
    emit({EventKind::Halted, ds.cycle, 0, {}, {}});
  else if (ds.status == device::Status::Faulted)
    emit({EventKind::Faulted, ds.cycle, 0, std::string(device::faultName(ds.fault)), {}});
  else
    emit({EventKind::Paused, ds.cycle, 0, "step", {}});
}

void Session::stepBackward() {
  requireReplay("stepBackward");
  if (position_ <= replay_->window().startCycle)
    throw Error(ErrorCode::WindowUnderflow, "already at the start of the replay window");
  --position_;
}

SeekResult Session::seek(int64_t cycle) {
  requireReplay("seek");
  const auto w = replay_->window();
  SeekResult r;
  if (cycle < static_cast<int64_t>(w.startCycle)) {
    r = {w.startCycle, true};
  } else if (static_cast<uint64_t>(cycle) > w.endCycle) {
    r = {w.endCycle, true};
  } else {
    r = {static_cast<uint64_t>(cycle), false};
  }
  position_ = r.position;
  return r;
}

void Session::reset() {
  if (!live_) throw Error(ErrorCode::NondeterministicBackend, "a saved trace cannot be reset");
  live_->reset();
  replay_.reset();
  mode_ = Mode::Live;
  position_ = 0;
  pauseRequested_ = false;
  emit({EventKind::Paused, 0, 0, "reset", {}});
}

// ------------------------------------------------------------------- replay

void Session::enterReplay() {
  requireLive("enterReplay");
  auto capture = live_->takeTraceSnapshot();
  if (capture.empty()) throw Error(ErrorCode::EmptyTrace, "nothing has been recorded since reset");
  replay_ = std::make_unique<trace::Replay>(std::move(capture), design_);
  mode_ = Mode::Replay;
  position_ = replay_->window().endCycle;
  emit({EventKind::WindowReady, position_, 0, {}, replay_->window()});
}

void Session::exitReplay() {
  requireReplay("exitReplay");
  if (!live_) throw Error(ErrorCode::InvalidState, "a saved trace has no live device");
  replay_.reset();
  mode_ = Mode::Live;
}

trace::ReplayWindow Session::window() const {
  if (!replay_) throw Error(ErrorCode::InvalidState, "no replay window; enter replay first");
  return replay_->window();
}

void Session::extendWindow(int64_t target) {
  requireReplay("extendWindow");
  if (target < 0) throw Error(ErrorCode::TargetBeforeReset, "cycle " + std::to_string(target) + " precedes reset");
  if (!live_ || !backend().capabilities().canRunAtSpeed)
    throw Error(ErrorCode::NondeterministicBackend, "this backend cannot re-run the design");
  const auto old = replay_->window();
  auto t = static_cast<uint64_t>(target);
  if (old.contains(t)) {
    position_ = t;
    return;
  }
  if (t > old.endCycle) throw Error(ErrorCode::CycleOutsideWindow, "cycle " + std::to_string(target) + " has not run yet");

  // Re-run from reset and pause early enough that the buffers still hold
  // the target. The old window length estimates how far back they reach.
  uint64_t span = old.endCycle - old.startCycle;
  uint64_t pauseAt = std::min(t + span, old.startCycle + span);
  for (;;) {
    live_->reset();
    live_->armBreakpoints({});
    live_->run(pauseAt, nullptr);
    auto capture = live_->takeTraceSnapshot();
    auto w = capture.window();
    if (w.startCycle <= t && t <= w.endCycle && !capture.empty()) {
      replay_ = std::make_unique<trace::Replay>(std::move(capture), design_);
      break;
    }
    // The buffers reached back less far than estimated; shorten the run.
    uint64_t shortfall = w.startCycle > t ? w.startCycle - t : 1;
    pauseAt = pauseAt > t + shortfall ? pauseAt - shortfall : t + 1;
  }
  rearm();
  position_ = t;
  emit({EventKind::WindowReady, position_, 0, {}, replay_->window()});
}

// ---------------------------------------------------------------- inspection

const debugdb::VariableRecord& Session::resolve(std::string_view name, std::string_view scope) const {
  auto found = db_.findVariables(name, scope);
  if (found.empty())
    throw Error(ErrorCode::UnknownVariable, "no variable " + std::string(name) +
                                                (scope.empty() ? "" : " in " + std::string(scope)));
  if (found.size() == 1) return *found.front();
  // Prefer the scope of the code running now, then main.
  std::set<std::string> here;
  for (const auto& r : db_.irForState(currentState())) here.insert(r.scope);
  here.insert(db_.state(currentState()).function);
  for (const auto* v : found)
    if (here.count(v->scope)) return *v;
  for (const auto* v : found)
    if (v->scope == "main") return *v;
  return *found.front();
}

trace::VariableView Session::view(const debugdb::VariableRecord& var) const {
  if (mode_ == Mode::Replay) return replay_->reconstruct(position_, var, backend().memoryPort());
  const auto& dev = live_->device();
  using trace::ViewKind;
  switch (var.location.kind) {
    case debugdb::LocationKind::OptimizedOut: return {};
    case debugdb::LocationKind::Register: return {ViewKind::Known, dev.readRegister(var.location.id), {}};
    case debugdb::LocationKind::Memory: break;
  }
  trace::VariableView v{ViewKind::Known, 0, {}};
  int32_t len = dev.memoryLength(var.location.id);
  for (int32_t k = var.location.baseOffset; k < len; ++k)
    v.elements.push_back({ViewKind::Known, dev.readMemory(var.location.id, k), {}});
  return v;
}

trace::VariableView Session::readVariable(std::string_view name, std::string_view scope) const {
  return view(resolve(name, scope));
}

std::vector<NamedView> Session::listVariables(std::string_view scope) const {
  std::vector<NamedView> out;
  for (const auto& v : db_.variables)
    if (scope.empty() || v.scope == scope) out.push_back({&v, view(v)});
  return out;
}

std::optional<int32_t> Session::returnValue() const {
  if (!live_ || live_->device().state().status != device::Status::Halted) return std::nullopt;
  RegId reg = db_.function("main").returnReg;
  if (reg < 0) return std::nullopt;
  return live_->device().readRegister(reg);
}

std::set<int> Session::activeLines() const { return db_.linesForState(currentState()); }

std::vector<debugdb::IrRecord> Session::activeIr() const { return db_.irForState(currentState()); }

std::vector<GanttBox> Session::ganttData(bool dynamic, std::optional<std::pair<int64_t, int64_t>> range) const {
  std::vector<GanttBox> out;
  if (!dynamic) {
    for (const auto& s : db_.schedule) {
      const auto& r = db_.irRecord(s.irId);
      if (range && (s.stateEnd < range->first || s.stateStart > range->second)) continue;
      out.push_back({s.irId, r.origin, r.sourceLine, s.stateStart, s.stateEnd, 0});
    }
    return out;
  }
  requireReplay("the dynamic Gantt view");
  const auto w = replay_->window();
  int64_t from = static_cast<int64_t>(w.startCycle);
  int64_t to = static_cast<int64_t>(w.endCycle);
  if (range) {
    if (range->first > range->second) return out;
    if (range->first < from || range->second > to)
      throw Error(ErrorCode::RangeOutsideWindow, "range [" + std::to_string(range->first) + ", " +
                                                     std::to_string(range->second) + "] leaves the replay window");
    from = range->first;
    to = range->second;
  }
  std::map<InstrId, int> instances;
  for (auto c = static_cast<int64_t>(w.startCycle); c <= to; ++c) {
    const auto& st = db_.state(replay_->stateAt(static_cast<uint64_t>(c)));
    for (InstrId id : st.activeInstrs) {
      const auto& s = db_.scheduleOf(id);
      // An instance starts in its first state, or is already in flight
      // when the window opens.
      bool starts = s.stateStart == st.id;
      bool carried = c == static_cast<int64_t>(w.startCycle) && !starts;
      if (!starts && !carried) continue;
      const auto& r = db_.irRecord(id);
      int64_t begin = c - (st.id - s.stateStart);
      int idx = instances[r.origin]++;
      if (c >= from) out.push_back({id, r.origin, r.sourceLine, begin, begin + (s.stateEnd - s.stateStart), idx});
    }
  }
  return out;
}

// -------------------------------------------------------------------- events

int Session::subscribe(Observer observer) {
  std::lock_guard lock(observerMutex_);
  observers_[nextToken_] = std::move(observer);
  return nextToken_++;
}

void Session::unsubscribe(int token) {
  std::lock_guard lock(observerMutex_);
  observers_.erase(token);
}

void Session::emit(Event ev) {
  std::lock_guard lock(observerMutex_);
  for (auto& [token, fn] : observers_) fn(ev);
}

}  // namespace hlsdbg::manager
