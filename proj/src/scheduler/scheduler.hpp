// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "frontend/ir.hpp"
#include "frontend/optimize.hpp"

namespace hlsdbg::sched {

using frontend::OptLevel;

/// How the FSM leaves a state after its last cycle.
enum class TransitionKind { Jump, Branch, Call, Return, Halt };

std::string_view transitionName(TransitionKind k) noexcept;
std::optional<TransitionKind> transitionFromName(std::string_view name) noexcept;

struct BranchEdge {
  RegId cond = -1;
  StateId takenNext = -1;

  bool operator==(const BranchEdge&) const = default;
};

struct FsmState {
  StateId id = 0;
  BlockId blockId = -1;  // -1 for the halt state
  std::string function;
  std::vector<InstrId> activeInstrs;  // sorted
  TransitionKind kind = TransitionKind::Jump;
  // Static successor: the not-taken edge of a branch, the callee entry of a
  // call, the halt state after main returns. -1 when the successor is only
  // known at run time (returns from non-main functions) or for halt.
  StateId defaultNext = -1;
  std::optional<BranchEdge> branch;
  std::string callee;       // Call
  StateId returnState = -1;  // Call: where the callee's return lands

  bool operator==(const FsmState&) const = default;
};

/// Inclusive range of global state ids.
struct Interval {
  StateId start = 0;
  StateId end = 0;

  bool contains(StateId s) const { return start <= s && s <= end; }
  bool operator==(const Interval&) const = default;
};

struct RegisterBinding {
  RegId id = 0;
  std::string name;
  std::string function;
  ir::RegKind kind = ir::RegKind::Temp;

  bool operator==(const RegisterBinding&) const = default;
};

struct MemoryBinding {
  MemId id = 0;
  std::string name;
  std::string function;
  int length = 0;

  bool operator==(const MemoryBinding&) const = default;
};

struct ScheduledDesign {
  ir::Program ir;
  OptLevel optLevel = OptLevel::O0;
  std::vector<FsmState> states;  // indexed by id
  std::map<InstrId, Interval> scheduleOf;
  std::vector<RegisterBinding> registers;  // referenced registers, sorted by id
  std::vector<MemoryBinding> memories;     // sorted by id
  StateId entryState = 0;
  StateId haltState = 0;

  const FsmState& state(StateId id) const;
  bool hasState(StateId id) const { return id >= 0 && id < static_cast<StateId>(states.size()); }
  /// First state of each function, keyed by name.
  std::map<std::string, StateId> functionEntries() const;

  bool operator==(const ScheduledDesign&) const = default;
};

/// Control steps an opcode occupies. A call occupies one issue step; the
/// callee then runs in its own states.
int latency(ir::Opcode op) noexcept;

/// Lookup of every instruction in a program by id. Pointers stay valid while
/// the program is not modified.
std::unordered_map<InstrId, const ir::Instr*> indexInstrs(const ir::Program& prog);

/// Binds the IR to control steps and builds the FSM. Throws
/// UnschedulableDesign if the result breaks a structural invariant.
ScheduledDesign schedule(ir::Program prog, OptLevel level);

/// Moves independent instructions of an if/else join block into the block
/// that branches, so they run alongside the condition.
void hoistFromJoins(ir::Program& prog);

/// Checks every structural invariant; throws UnschedulableDesign.
void validate(const ScheduledDesign& design);

}  // namespace hlsdbg::sched
