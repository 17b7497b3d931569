// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "debugdb/debugdb.hpp"
#include "device/device.hpp"
#include "trace/trace.hpp"

namespace hlsdbg::manager {

enum class Mode { Live, Replay };

std::string_view modeName(Mode m) noexcept;

struct SessionConfig {
  trace::TraceConfig trace;
  int breakpointUnits = 4;
  uint64_t maxCycles = 10'000'000;  // per run command
  bool operator==(const SessionConfig&) const = default;
};

struct Capabilities {
  bool canRunAtSpeed = false;
  bool canReadLiveState = false;
  bool providesTrace = false;
};

/// Execution target behind a session.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual Capabilities capabilities() const = 0;
  virtual void reset() = 0;
  virtual device::RunResult run(uint64_t maxCycles, const std::atomic<bool>* pauseRequest) = 0;
  virtual void stepCycle() = 0;
  virtual int32_t readRegister(RegId reg) const = 0;
  virtual int32_t readMemory(MemId mem, int32_t offset) const = 0;
  virtual void armBreakpoints(const std::set<StateId>& states) = 0;
  virtual trace::TraceCapture takeTraceSnapshot() const = 0;
  virtual const trace::MemoryReadPort& memoryPort() const = 0;
};

/// The simulated device with its trace recorder and breakpoint units.
class LiveBackend : public Backend {
 public:
  LiveBackend(std::shared_ptr<const sched::ScheduledDesign> design, const SessionConfig& config);

  Capabilities capabilities() const override { return {true, true, true}; }
  void reset() override;
  device::RunResult run(uint64_t maxCycles, const std::atomic<bool>* pauseRequest) override;
  void stepCycle() override { device_.stepCycle(); }
  int32_t readRegister(RegId reg) const override { return device_.readRegister(reg); }
  int32_t readMemory(MemId mem, int32_t offset) const override { return device_.readMemory(mem, offset); }
  void armBreakpoints(const std::set<StateId>& states) override;
  trace::TraceCapture takeTraceSnapshot() const override { return recorder_.snapshot(device_); }
  const trace::MemoryReadPort& memoryPort() const override { return port_; }

  const device::Device& device() const { return device_; }
  const device::BreakpointUnits& units() const { return units_; }

 private:
  device::Device device_;
  trace::Recorder recorder_;
  device::BreakpointUnits units_;
  trace::DevicePort port_;
};

/// A saved capture: navigable, but nothing can run.
class ReplayBackend : public Backend {
 public:
  explicit ReplayBackend(trace::TraceCapture capture);

  Capabilities capabilities() const override { return {false, false, true}; }
  void reset() override;
  device::RunResult run(uint64_t, const std::atomic<bool>*) override;
  void stepCycle() override;
  int32_t readRegister(RegId reg) const override { return port_.readRegister(reg); }
  int32_t readMemory(MemId mem, int32_t offset) const override { return port_.readMemory(mem, offset); }
  void armBreakpoints(const std::set<StateId>&) override {}
  trace::TraceCapture takeTraceSnapshot() const override { return capture_; }
  const trace::MemoryReadPort& memoryPort() const override { return port_; }

 private:
  trace::TraceCapture capture_;
  trace::CapturePort port_;
};

enum class EventKind { Paused, BreakpointHit, Halted, Faulted, WindowReady };

std::string_view eventName(EventKind k) noexcept;

struct Event {
  EventKind kind = EventKind::Paused;
  uint64_t cycle = 0;
  int line = 0;              // BreakpointHit
  std::string reason;        // Faulted; Paused: "step", "timeout", "pause", "reset"
  trace::ReplayWindow window;  // WindowReady
  bool operator==(const Event&) const = default;
};

struct GanttBox {
  InstrId irId = 0;
  InstrId origin = 0;
  int sourceLine = 0;
  int64_t stepStart = 0;
  int64_t stepEnd = 0;
  int instanceIndex = 0;  // nth execution of this origin within the window
  bool operator==(const GanttBox&) const = default;
};

struct SessionStatus {
  Mode mode = Mode::Live;
  device::Status deviceStatus = device::Status::Paused;
  device::FaultReason fault = device::FaultReason::None;
  bool timedOut = false;
  uint64_t deviceCycle = 0;
  uint64_t position = 0;  // device cycle in Live, window cycle in Replay
  StateId state = 0;
  std::optional<trace::ReplayWindow> window;
  std::set<int> breakpoints;        // live, hardware
  std::set<int> replayBreakpoints;  // replay, software
  int unitsUsed = 0;
  int unitsTotal = 0;
  bool canRun = false;
};

struct SeekResult {
  uint64_t position = 0;
  bool clamped = false;
};

struct NamedView {
  const debugdb::VariableRecord* variable = nullptr;
  trace::VariableView view;
};

/// One debugging session. Not thread-safe except for requestPause() and
/// subscribe(); the owner serializes every other call.
class Session {
 public:
  /// Live session on the design described by `db`.
  Session(debugdb::DebugDatabase db, SessionConfig config);
  /// Replay-only session over a saved capture.
  Session(debugdb::DebugDatabase db, trace::TraceCapture capture, SessionConfig config);

  const debugdb::DebugDatabase& db() const { return db_; }
  const SessionConfig& config() const { return config_; }
  SessionStatus status() const;

  void setBreakpoint(int line);
  void clearBreakpoint(int line);
  void run();
  /// Safe from any thread; stops a run between cycles.
  void requestPause() { pauseRequested_ = true; }
  /// Acknowledges a pause request once any run it targeted has stopped.
  void pause();
  void stepForward();
  void stepBackward();
  SeekResult seek(int64_t cycle);
  void reset();

  trace::VariableView readVariable(std::string_view name, std::string_view scope = {}) const;
  std::vector<NamedView> listVariables(std::string_view scope = {}) const;
  /// main's result once the live device has halted.
  std::optional<int32_t> returnValue() const;
  std::set<int> activeLines() const;
  std::vector<debugdb::IrRecord> activeIr() const;
  /// Static boxes come from the schedule; dynamic boxes from the decoded
  /// trace and need Replay mode.
  std::vector<GanttBox> ganttData(bool dynamic, std::optional<std::pair<int64_t, int64_t>> range = {}) const;

  void enterReplay();
  void exitReplay();
  void extendWindow(int64_t targetCycle);
  trace::ReplayWindow window() const;

  using Observer = std::function<void(const Event&)>;
  /// Returns a token for unsubscribe().
  int subscribe(Observer observer);
  void unsubscribe(int token);

  /// Replay state, or nullptr in Live mode.
  const trace::Replay* replay() const { return replay_.get(); }
  const LiveBackend* live() const { return live_.get(); }

 private:
  void emit(Event ev);
  StateId currentState() const;
  const Backend& backend() const;
  void requireLive(const char* what) const;
  void requireReplay(const char* what) const;
  void rearm();
  int lineForState(StateId state, const std::set<int>& lines) const;
  const debugdb::VariableRecord& resolve(std::string_view name, std::string_view scope) const;
  trace::VariableView view(const debugdb::VariableRecord& var) const;

  debugdb::DebugDatabase db_;
  SessionConfig config_;
  std::shared_ptr<const sched::ScheduledDesign> design_;
  std::unique_ptr<LiveBackend> live_;
  std::unique_ptr<ReplayBackend> saved_;  // replay-only sessions
  std::unique_ptr<trace::Replay> replay_;
  Mode mode_ = Mode::Live;
  uint64_t position_ = 0;
  std::set<int> breakpoints_;
  std::set<int> replayBreakpoints_;
  std::atomic<bool> pauseRequested_{false};

  std::mutex observerMutex_;
  std::map<int, Observer> observers_;
  int nextToken_ = 0;
};

}  // namespace hlsdbg::manager
