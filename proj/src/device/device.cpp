// SPDX-License-Identifier: Apache-2.0
#include "device/device.hpp"

#include <algorithm>

#include "common/error.hpp"

namespace hlsdbg::device {

using ir::Opcode;
using sched::TransitionKind;

std::string_view statusName(Status s) noexcept {
  switch (s) {
    case Status::Running: return "running";
    case Status::Paused: return "paused";
    case Status::Halted: return "halted";
    case Status::Faulted: return "faulted";
  }
  return "?";
}

std::string_view faultName(FaultReason r) noexcept {
  switch (r) {
    case FaultReason::None: return "None";
    case FaultReason::DivideByZero: return "DivideByZero";
    case FaultReason::MemoryOutOfBounds: return "MemoryOutOfBounds";
  }
  return "?";
}

std::string_view stopName(StopReason r) noexcept {
  switch (r) {
    case StopReason::Breakpoint: return "breakpoint";
    case StopReason::Halted: return "halted";
    case StopReason::Faulted: return "faulted";
    case StopReason::Timeout: return "timeout";
    case StopReason::PauseRequested: return "pause";
  }
  return "?";
}

BreakpointUnits::BreakpointUnits(int count) {
  if (count < 0) throw Error(ErrorCode::InvalidParams, "breakpoint unit count must be non-negative");
  for (int i = 0; i < count; ++i) units_.push_back({i, false, -1});
}

int BreakpointUnits::used() const {
  return static_cast<int>(std::count_if(units_.begin(), units_.end(), [](const BreakpointUnit& u) { return u.armed; }));
}

int BreakpointUnits::arm(StateId state) {
  for (const auto& u : units_)
    if (u.armed && u.matchState == state) return u.id;
  for (auto& u : units_) {
    if (u.armed) continue;
    u.armed = true;
    u.matchState = state;
    return u.id;
  }
  throw Error(ErrorCode::OutOfBreakpointUnits,
              "all " + std::to_string(units_.size()) + " breakpoint units are in use");
}

void BreakpointUnits::disarm(StateId state) {
  for (auto& u : units_)
    if (u.armed && u.matchState == state) u = {u.id, false, -1};
}

void BreakpointUnits::clear() {
  for (auto& u : units_) u = {u.id, false, -1};
}

bool BreakpointUnits::matches(StateId state) const {
  return std::any_of(units_.begin(), units_.end(),
                     [&](const BreakpointUnit& u) { return u.armed && u.matchState == state; });
}

Device::Device(std::shared_ptr<const ScheduledDesign> design) : design_(std::move(design)) {
  if (!design_) throw Error(ErrorCode::InvalidParams, "no design");
  instrs_ = sched::indexInstrs(design_->ir);
  bound_.assign(design_->ir.registers.size(), false);
  for (const auto& r : design_->registers)
    if (r.id >= 0 && static_cast<size_t>(r.id) < bound_.size()) bound_[static_cast<size_t>(r.id)] = true;
  reset();
}

void Device::reset() {
  state_ = DeviceState{};
  state_.currentState = design_->entryState;
  state_.registers.assign(design_->ir.registers.size(), 0);
  for (const auto& a : design_->ir.arrays) state_.memories.emplace_back(static_cast<size_t>(a.length), 0);
  state_.status = Status::Paused;
}

namespace {

struct Pending {
  std::vector<RegWrite> regs;
  std::vector<MemWrite> mems;
  struct Latched {
    int32_t value = 0;
    int32_t address = 0;  // stores only
  };
  std::map<InstrId, Latched> latched;
  FaultReason fault = FaultReason::None;
};

}  // namespace

void Device::stepCycle() {
  if (state_.status == Status::Halted || state_.status == Status::Faulted)
    throw Error(ErrorCode::InvalidState, std::string("device is ") + std::string(statusName(state_.status)));
  const ScheduledDesign& d = *design_;
  const sched::FsmState& st = d.state(state_.currentState);
  const auto& regs = state_.registers;
  auto value = [&](const ir::Operand& o) { return o.isImm() ? o.value : regs[static_cast<size_t>(o.value)]; };
  BlockId pred = -1;
  if (auto it = state_.predBlock.find(st.function); it != state_.predBlock.end()) pred = it->second;

  // Latch: every instruction starting here reads committed values.
  Pending p;
  for (InstrId id : st.activeInstrs) {
    const ir::Instr& in = *instrs_.at(id);
    if (d.scheduleOf.at(id).start != st.id) continue;
    int32_t result = 0;
    int32_t address = 0;
    switch (in.op) {
      case Opcode::Phi: {
        auto k = std::find(in.phiBlocks.begin(), in.phiBlocks.end(), pred);
        if (k == in.phiBlocks.end())
          throw Error(ErrorCode::Internal, "phi " + std::to_string(id) + " has no input for block " + std::to_string(pred));
        result = value(in.args[static_cast<size_t>(k - in.phiBlocks.begin())]);
        break;
      }
      case Opcode::Const:
      case Opcode::Move: result = value(in.args[0]); break;
      case Opcode::Not: result = ir::evalArith(in.op, value(in.args[0]), 0); break;
      case Opcode::Div:
      case Opcode::Mod:
        if (value(in.args[1]) == 0) p.fault = FaultReason::DivideByZero;
        result = ir::evalArith(in.op, value(in.args[0]), value(in.args[1]));
        break;
      case Opcode::Load:
      case Opcode::Store: {
        const auto& mem = state_.memories.at(static_cast<size_t>(in.memory));
        int32_t idx = value(in.args[0]);
        if (idx < 0 || static_cast<size_t>(idx) >= mem.size()) {
          p.fault = FaultReason::MemoryOutOfBounds;
          break;
        }
        result = in.op == Opcode::Load ? mem[static_cast<size_t>(idx)] : value(in.args[1]);
        address = idx;
        break;
      }
      case Opcode::Call: {
        const ir::Function* callee = d.ir.function(in.callee);
        for (size_t i = 0; i < in.args.size(); ++i) p.regs.push_back({callee->params.at(i), value(in.args[i])});
        break;
      }
      default: result = ir::evalArith(in.op, value(in.args[0]), value(in.args[1])); break;
    }
    p.latched[id] = {result, address};
  }
  if (p.fault != FaultReason::None) {
    state_.status = Status::Faulted;
    state_.fault = p.fault;
    state_.faultCycle = state_.cycle;
    return;
  }

  // Commit: every instruction ending here writes at the end of the cycle.
  for (InstrId id : st.activeInstrs) {
    const ir::Instr& in = *instrs_.at(id);
    const sched::Interval iv = d.scheduleOf.at(id);
    if (iv.end != st.id) {
      if (iv.start == st.id) state_.inFlight[id] = p.latched.at(id).value;
      continue;
    }
    int32_t v = iv.start == st.id ? p.latched.at(id).value : state_.inFlight.at(id);
    state_.inFlight.erase(id);
    if (in.op == Opcode::Store) {
      // Stores are single-cycle, so the address is always latched this cycle.
      p.mems.push_back({in.memory, p.latched.at(id).address, v});
    } else if (in.result) {
      p.regs.push_back({*in.result, v});
    }
  }
  for (const auto& w : p.regs) state_.registers[static_cast<size_t>(w.reg)] = w.value;
  for (const auto& w : p.mems)
    state_.memories[static_cast<size_t>(w.mem)][static_cast<size_t>(w.offset)] = w.value;

  // Transition on post-commit values.
  StateId next = st.defaultNext;
  switch (st.kind) {
    case TransitionKind::Jump: break;
    case TransitionKind::Branch:
      if (state_.registers[static_cast<size_t>(st.branch->cond)] != 0) next = st.branch->takenNext;
      break;
    case TransitionKind::Call:
      state_.returnState[st.callee] = st.returnState;
      state_.predBlock[st.callee] = -1;
      break;
    case TransitionKind::Return:
      if (next < 0) next = state_.returnState.at(st.function);
      break;
    case TransitionKind::Halt:
      throw Error(ErrorCode::InvalidState, "device is halted");
  }
  if (st.kind == TransitionKind::Jump || st.kind == TransitionKind::Branch) {
    const sched::FsmState& to = d.state(next);
    if (!(to.blockId == st.blockId && to.id == st.id + 1)) state_.predBlock[st.function] = st.blockId;
  }

  InstrumentationEvent ev{state_.cycle, st.id, next, std::move(p.regs), std::move(p.mems)};
  state_.currentState = next;
  ++state_.cycle;
  if (next == d.haltState) state_.status = Status::Halted;
  if (observer_) observer_(ev);
}

RunResult Device::runUntilBreakOrHalt(const BreakpointUnits& units, uint64_t maxCycles,
                                      const std::atomic<bool>* pauseRequest) {
  if (state_.status != Status::Paused)
    throw Error(ErrorCode::InvalidState, std::string("cannot run a ") + std::string(statusName(state_.status)) + " device");
  state_.timedOut = false;
  RunResult r;
  // A breakpoint on the entry state fires once, before the first cycle.
  if (state_.cycle == 0 && !state_.entryBreakChecked) {
    state_.entryBreakChecked = true;
    if (units.matches(state_.currentState)) {
      r.reason = StopReason::Breakpoint;
      return r;
    }
  }
  state_.entryBreakChecked = true;
  state_.status = Status::Running;
  for (;;) {
    if (r.cycles >= maxCycles) {
      state_.status = Status::Paused;
      state_.timedOut = true;
      r.reason = StopReason::Timeout;
      return r;
    }
    if (pauseRequest && pauseRequest->load(std::memory_order_relaxed)) {
      state_.status = Status::Paused;
      r.reason = StopReason::PauseRequested;
      return r;
    }
    try {
      stepCycle();
    } catch (...) {
      if (state_.status == Status::Running) state_.status = Status::Paused;
      throw;
    }
    if (state_.status == Status::Faulted) {
      r.reason = StopReason::Faulted;
      return r;
    }
    ++r.cycles;
    if (state_.status == Status::Halted) {
      r.reason = StopReason::Halted;
      return r;
    }
    if (units.matches(state_.currentState)) {
      state_.status = Status::Paused;
      r.reason = StopReason::Breakpoint;
      return r;
    }
  }
}

void Device::requireReadable() const {
  if (state_.status == Status::Running) throw Error(ErrorCode::ReadWhileRunning, "device is running");
}

bool Device::hasRegister(RegId reg) const {
  return reg >= 0 && static_cast<size_t>(reg) < bound_.size() && bound_[static_cast<size_t>(reg)];
}

int32_t Device::readRegister(RegId reg) const {
  requireReadable();
  if (!hasRegister(reg)) throw Error(ErrorCode::UnknownRegister, "no register " + std::to_string(reg));
  return state_.registers[static_cast<size_t>(reg)];
}

int32_t Device::memoryLength(MemId mem) const {
  if (mem < 0 || static_cast<size_t>(mem) >= state_.memories.size())
    throw Error(ErrorCode::UnknownMemory, "no memory " + std::to_string(mem));
  return static_cast<int32_t>(state_.memories[static_cast<size_t>(mem)].size());
}

int32_t Device::readMemory(MemId mem, int32_t offset) const {
  requireReadable();
  int32_t len = memoryLength(mem);
  if (offset < 0 || offset >= len)
    throw Error(ErrorCode::OffsetOutOfRange, "offset " + std::to_string(offset) + " outside memory " + std::to_string(mem));
  return state_.memories[static_cast<size_t>(mem)][static_cast<size_t>(offset)];
}

}  // namespace hlsdbg::device
