// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "scheduler/scheduler.hpp"

namespace hlsdbg::device {

using sched::ScheduledDesign;

enum class Status { Running, Paused, Halted, Faulted };
enum class FaultReason { None, DivideByZero, MemoryOutOfBounds };

std::string_view statusName(Status s) noexcept;
std::string_view faultName(FaultReason r) noexcept;

struct RegWrite {
  RegId reg = 0;
  int32_t value = 0;
  bool operator==(const RegWrite&) const = default;
};

struct MemWrite {
  MemId mem = 0;
  int32_t offset = 0;
  int32_t value = 0;
  bool operator==(const MemWrite&) const = default;
};

/// What the instrumentation sees for one executed cycle. Writes commit at
/// the end of `cycle` and are visible from `cycle + 1`.
struct InstrumentationEvent {
  uint64_t cycle = 0;
  StateId prevState = -1;
  StateId nextState = -1;
  std::vector<RegWrite> regWrites;
  std::vector<MemWrite> memWrites;
  bool operator==(const InstrumentationEvent&) const = default;
};

struct DeviceState {
  StateId currentState = 0;
  uint64_t cycle = 0;
  std::vector<int32_t> registers;              // indexed by RegId
  std::vector<std::vector<int32_t>> memories;  // indexed by MemId
  Status status = Status::Paused;
  FaultReason fault = FaultReason::None;
  uint64_t faultCycle = 0;
  bool timedOut = false;
  // Results of multi-cycle instructions between their start and end state.
  std::map<InstrId, int32_t> inFlight;
  std::map<std::string, StateId> returnState;  // per function; no recursion
  std::map<std::string, BlockId> predBlock;    // block control came from
  bool entryBreakChecked = false;

  bool operator==(const DeviceState&) const = default;
};

struct BreakpointUnit {
  int id = 0;
  bool armed = false;
  StateId matchState = -1;
  bool operator==(const BreakpointUnit&) const = default;
};

/// Fixed bank of state comparators.
class BreakpointUnits {
 public:
  explicit BreakpointUnits(int count = 4);

  int capacity() const { return static_cast<int>(units_.size()); }
  int used() const;
  /// Arms a free unit on `state`; arming an already matched state reuses its
  /// unit. Throws OutOfBreakpointUnits when the bank is full.
  int arm(StateId state);
  void disarm(StateId state);
  void clear();
  bool matches(StateId state) const;
  const std::vector<BreakpointUnit>& units() const { return units_; }

 private:
  std::vector<BreakpointUnit> units_;
};

enum class StopReason { Breakpoint, Halted, Faulted, Timeout, PauseRequested };

std::string_view stopName(StopReason r) noexcept;

struct RunResult {
  StopReason reason = StopReason::Timeout;
  uint64_t cycles = 0;  // cycles executed by this run
};

class Device {
 public:
  using Observer = std::function<void(const InstrumentationEvent&)>;

  explicit Device(std::shared_ptr<const ScheduledDesign> design);

  void reset();
  /// Executes the current state for one cycle. Throws InvalidState when
  /// halted or faulted. A faulting cycle commits nothing and leaves the FSM
  /// and cycle counter where they were.
  void stepCycle();
  RunResult runUntilBreakOrHalt(const BreakpointUnits& units, uint64_t maxCycles,
                                const std::atomic<bool>* pauseRequest = nullptr);

  int32_t readRegister(RegId reg) const;
  int32_t readMemory(MemId mem, int32_t offset) const;
  int32_t memoryLength(MemId mem) const;
  bool hasRegister(RegId reg) const;

  const DeviceState& state() const { return state_; }
  const ScheduledDesign& design() const { return *design_; }
  std::shared_ptr<const ScheduledDesign> designPtr() const { return design_; }
  /// Called synchronously after every committed cycle.
  void setObserver(Observer observer) { observer_ = std::move(observer); }

 private:
  void requireReadable() const;

  std::shared_ptr<const ScheduledDesign> design_;
  std::unordered_map<InstrId, const ir::Instr*> instrs_;
  std::vector<bool> bound_;
  DeviceState state_;
  Observer observer_;
};

}  // namespace hlsdbg::device
