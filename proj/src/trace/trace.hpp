// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <vector>

#include "debugdb/debugdb.hpp"
#include "device/device.hpp"

namespace hlsdbg::trace {

using SignalId = uint32_t;

/// Registers occupy signal ids below 2^16; memory m, offset o is
/// (m + 1) * 2^16 + o.
inline constexpr SignalId kMemorySpace = 1u << 16;
inline SignalId registerSignal(RegId r) { return static_cast<SignalId>(r); }
inline SignalId memorySignal(MemId m, int32_t offset) {
  return static_cast<SignalId>(m + 1) * kMemorySpace + static_cast<SignalId>(offset);
}

struct ControlRun {
  StateId startState = 0;
  uint64_t length = 0;
  bool operator==(const ControlRun&) const = default;
};

/// `cycle` is the first cycle at which `value` is visible.
struct DataEntry {
  uint64_t cycle = 0;
  SignalId signal = 0;
  int32_t value = 0;
  bool operator==(const DataEntry&) const = default;
};

struct TraceConfig {
  size_t capacityRecords = 1024;
  size_t capacityEntries = 4096;
  bool operator==(const TraceConfig&) const = default;
};

struct ReplayWindow {
  uint64_t startCycle = 0;
  uint64_t endCycle = 0;
  bool contains(uint64_t c) const { return startCycle <= c && c <= endCycle; }
  bool operator==(const ReplayWindow&) const = default;
};

/// Immutable copy of the trace buffers taken at a pause, together with the
/// storage contents readable through the memory port at that moment.
struct TraceCapture {
  std::vector<ControlRun> controlRuns;
  std::vector<DataEntry> dataEntries;
  uint64_t controlStartCycle = 0;  // cycle of the first retained run's first state
  uint64_t dataStartCycle = 0;     // first cycle whose writes are all retained
  uint64_t pauseCycle = 0;
  uint64_t cyclesRecorded = 0;     // executed cycles seen by the recorder
  std::map<RegId, int32_t> registers;
  std::map<MemId, std::vector<int32_t>> memories;

  bool empty() const { return cyclesRecorded == 0; }
  ReplayWindow window() const;
  bool operator==(const TraceCapture&) const = default;
};

/// Trace-buffer instrumentation; fed synchronously by the device.
class Recorder {
 public:
  Recorder(std::shared_ptr<const sched::ScheduledDesign> design, TraceConfig config);

  /// Starts a fresh recording with the FSM in `state` at `cycle`.
  void start(StateId state, uint64_t cycle);
  void record(const device::InstrumentationEvent& ev);
  TraceCapture snapshot(const device::Device& dev) const;

  const TraceConfig& config() const { return config_; }
  const std::deque<ControlRun>& controlRuns() const { return runs_; }
  const std::deque<DataEntry>& dataEntries() const { return entries_; }

 private:
  void push(DataEntry e);

  std::shared_ptr<const sched::ScheduledDesign> design_;
  TraceConfig config_;
  std::deque<ControlRun> runs_;
  std::deque<DataEntry> entries_;
  uint64_t firstCycle_ = 0;
  uint64_t droppedCycles_ = 0;
  bool dataEvicted_ = false;
  uint64_t lastEvictedCycle_ = 0;
  uint64_t cycles_ = 0;
};

/// Per-cycle state sequence covered by the control trace.
struct DecodedControl {
  uint64_t startCycle = 0;
  std::vector<StateId> states;

  bool covers(uint64_t cycle) const { return cycle >= startCycle && cycle - startCycle < states.size(); }
  StateId at(uint64_t cycle) const { return states.at(cycle - startCycle); }
};

/// Expands the runs. Throws CorruptTrace when a run or a run boundary is not
/// a transition the FSM can take.
DecodedControl decodeControl(const TraceCapture& capture, const sched::ScheduledDesign& design);

enum class ViewKind { Known, UnknownBeforeFirstUpdate, FromMemory, OptimizedOut };

std::string_view viewKindName(ViewKind k) noexcept;

/// What the debugger can say about a variable at one cycle. Arrays carry one
/// element view per slot; their own kind is the weakest element kind.
struct VariableView {
  ViewKind kind = ViewKind::OptimizedOut;
  int32_t value = 0;
  std::vector<VariableView> elements;

  bool operator==(const VariableView&) const = default;
};

/// Storage access used for signals with no update inside the window.
class MemoryReadPort {
 public:
  virtual ~MemoryReadPort() = default;
  virtual int32_t readRegister(RegId reg) const = 0;
  virtual int32_t readMemory(MemId mem, int32_t offset) const = 0;
};

/// Reads a paused device.
class DevicePort : public MemoryReadPort {
 public:
  explicit DevicePort(const device::Device& dev) : dev_(dev) {}
  int32_t readRegister(RegId reg) const override { return dev_.readRegister(reg); }
  int32_t readMemory(MemId mem, int32_t offset) const override { return dev_.readMemory(mem, offset); }

 private:
  const device::Device& dev_;
};

/// Reads the storage copy saved in a capture.
class CapturePort : public MemoryReadPort {
 public:
  explicit CapturePort(const TraceCapture& capture) : capture_(capture) {}
  int32_t readRegister(RegId reg) const override;
  int32_t readMemory(MemId mem, int32_t offset) const override;

 private:
  const TraceCapture& capture_;
};

/// Query structure over one capture: decoded control plus per-signal update
/// timelines restricted to the window.
class Replay {
 public:
  Replay(TraceCapture capture, std::shared_ptr<const sched::ScheduledDesign> design);

  const TraceCapture& capture() const { return capture_; }
  const ReplayWindow& window() const { return window_; }
  const DecodedControl& control() const { return control_; }
  StateId stateAt(uint64_t cycle) const;
  /// Throws CycleOutsideWindow.
  VariableView reconstruct(uint64_t cycle, const debugdb::VariableRecord& var, const MemoryReadPort& port) const;
  VariableView reconstructSignal(uint64_t cycle, SignalId signal, const MemoryReadPort& port) const;

 private:
  TraceCapture capture_;
  std::shared_ptr<const sched::ScheduledDesign> design_;
  ReplayWindow window_;
  DecodedControl control_;
  std::map<SignalId, std::vector<std::pair<uint64_t, int32_t>>> timeline_;
};

std::string dumpJson(const TraceCapture& capture, int indent = -1);
/// Throws CorruptTrace on malformed documents.
TraceCapture parseDump(std::string_view text);

}  // namespace hlsdbg::trace
