// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "frontend/ast.hpp"
#include "scheduler/scheduler.hpp"

namespace hlsdbg::debugdb {

inline constexpr int kFormatVersion = 1;

enum class LocationKind { Register, Memory, OptimizedOut };

struct Location {
  LocationKind kind = LocationKind::OptimizedOut;
  int id = -1;          // RegId or MemId
  int baseOffset = 0;   // Memory only

  bool operator==(const Location&) const = default;
};

struct VariableRecord {
  int id = 0;
  std::string name;
  std::string scope;  // owning function
  std::string type;   // "int" or "int[K]"
  Location location;

  bool isArray() const { return location.kind == LocationKind::Memory; }
  bool operator==(const VariableRecord&) const = default;
};

struct FunctionRecord {
  std::string name;
  int line = 0;
  int endLine = 0;
  std::string returnType = "int";
  std::vector<std::string> params;
  std::vector<RegId> paramRegs;  // -1 entries when optimized away
  RegId returnReg = -1;  // -1 when optimized away
  bool inlined = false;  // no states of its own; entry fields are -1
  BlockId entryBlock = -1;
  StateId entryState = -1;
  std::vector<BlockId> blocks;  // layout order
  std::vector<int> variables;   // VariableRecord ids

  bool operator==(const FunctionRecord&) const = default;
};

struct LineRecord {
  int lineNo = 0;
  std::string text;

  bool operator==(const LineRecord&) const = default;
};

/// One IR instruction: the human-readable summary plus enough structure to
/// execute the design from the database alone.
struct IrRecord {
  InstrId id = 0;
  std::string opcode;
  std::string operands;
  int sourceLine = 0;
  InstrId origin = 0;
  std::string function;  // function whose FSM executes it
  std::string scope;     // source function it was written in
  BlockId block = -1;
  int stmt = 0;
  std::optional<RegId> result;
  std::vector<ir::Operand> args;
  MemId memory = -1;
  std::string callee;
  std::vector<BlockId> phiBlocks;

  bool operator==(const IrRecord&) const = default;
};

struct BlockRecord {
  BlockId id = 0;
  std::string function;
  std::vector<InstrId> instrs;  // program order
  ir::Terminator term;

  bool operator==(const BlockRecord&) const = default;
};

struct ScheduleRecord {
  InstrId irId = 0;
  StateId stateStart = 0;
  StateId stateEnd = 0;

  bool operator==(const ScheduleRecord&) const = default;
};

struct TypeRecord {
  std::string name;
  int length = 0;  // 0 for scalars

  bool operator==(const TypeRecord&) const = default;
};

/// Source-to-hardware mapping for one compiled design. Immutable once
/// built; queries use an index derived from the records.
class DebugDatabase {
 public:
  int version = kFormatVersion;
  frontend::SourceProgram source;
  frontend::OptLevel optLevel = frontend::OptLevel::O0;
  std::vector<FunctionRecord> functions;
  std::vector<LineRecord> lines;
  std::vector<VariableRecord> variables;
  std::vector<IrRecord> ir;
  std::vector<sched::FsmState> states;
  std::vector<ScheduleRecord> schedule;
  std::vector<sched::RegisterBinding> registers;
  std::vector<sched::MemoryBinding> memories;
  std::vector<BlockRecord> blocks;
  std::vector<TypeRecord> types;
  StateId entryState = 0;
  StateId haltState = 0;

  /// Rebuilds the query index. Called by the producers; call again after
  /// editing records by hand.
  void reindex();

  std::set<int> linesForState(StateId state) const;
  std::set<StateId> statesForLine(int line) const;
  std::vector<IrRecord> irForState(StateId state) const;
  /// The state a line breakpoint watches: the earliest start among the
  /// line's instructions.
  StateId breakpointState(int line) const;
  const IrRecord& irRecord(InstrId id) const;
  const sched::FsmState& state(StateId id) const;
  const FunctionRecord& function(std::string_view name) const;
  const ScheduleRecord& scheduleOf(InstrId id) const;
  /// Variables named `name`, optionally restricted to one function.
  std::vector<const VariableRecord*> findVariables(std::string_view name,
                                                   std::string_view scope = {}) const;
  bool hasLine(int line) const { return line >= 1 && line <= static_cast<int>(lines.size()); }

  /// Executable design described by the records.
  std::shared_ptr<const sched::ScheduledDesign> design() const;

  bool operator==(const DebugDatabase& o) const;

 private:
  struct Index {
    std::vector<std::set<int>> stateLines;
    std::map<int, std::set<StateId>> lineStates;
    std::map<int, StateId> lineBreakState;
    std::map<InstrId, size_t> irPos;
    std::map<InstrId, size_t> schedPos;
    std::map<std::string, size_t, std::less<>> fnPos;
  };
  Index index_;
  std::shared_ptr<const sched::ScheduledDesign> design_;
};

DebugDatabase emitDebugDatabase(const sched::ScheduledDesign& design,
                                const frontend::SourceProgram& source);

/// Structural validation; throws CorruptDatabase naming the first problem.
void validate(const DebugDatabase& db);

std::string toJson(const DebugDatabase& db, int indent = -1);
/// Parses and validates. Throws FormatVersionMismatch or CorruptDatabase.
DebugDatabase fromJson(std::string_view text);

void save(const DebugDatabase& db, const std::string& path);
DebugDatabase load(const std::string& path);

}  // namespace hlsdbg::debugdb
