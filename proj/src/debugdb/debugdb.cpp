// SPDX-License-Identifier: Apache-2.0
#include "debugdb/debugdb.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "common/error.hpp"
#include "json.hpp"

namespace hlsdbg::debugdb {

using nlohmann::json;

namespace {

[[noreturn]] void corrupt(const std::string& what) {
  throw Error(ErrorCode::CorruptDatabase, "corrupt debug database: " + what);
}

std::string typeName(bool isArray, int length) {
  return isArray ? "int[" + std::to_string(length) + "]" : "int";
}

std::string_view locationName(LocationKind k) {
  switch (k) {
    case LocationKind::Register: return "register";
    case LocationKind::Memory: return "memory";
    case LocationKind::OptimizedOut: return "optimized-out";
  }
  return "?";
}

std::string_view termName(ir::TermKind k) {
  switch (k) {
    case ir::TermKind::Jump: return "jump";
    case ir::TermKind::Branch: return "branch";
    case ir::TermKind::Return: return "return";
  }
  return "?";
}

std::string_view regKindName(ir::RegKind k) {
  switch (k) {
    case ir::RegKind::Variable: return "variable";
    case ir::RegKind::Temp: return "temp";
    case ir::RegKind::Return: return "return";
  }
  return "?";
}

}  // namespace

// ---------------------------------------------------------------- emission

DebugDatabase emitDebugDatabase(const sched::ScheduledDesign& design,
                                const frontend::SourceProgram& source) {
  DebugDatabase db;
  db.source = source;
  db.optLevel = design.optLevel;
  db.entryState = design.entryState;
  db.haltState = design.haltState;
  db.states = design.states;
  db.registers = design.registers;
  db.memories = design.memories;
  for (int i = 0; i < source.lineCount(); ++i)
    db.lines.push_back({i + 1, source.lines[static_cast<size_t>(i)]});

  std::set<RegId> bound;
  for (const auto& r : design.registers) bound.insert(r.id);

  std::set<std::string> typeNames{"int"};
  std::map<std::string, std::vector<int>> varsByFn;
  for (const auto& v : design.ir.variables) {
    VariableRecord rec;
    rec.id = static_cast<int>(db.variables.size());
    rec.name = v.name;
    rec.scope = v.function;
    rec.type = typeName(v.isArray, v.length);
    if (v.isArray)
      rec.location = {LocationKind::Memory, v.storage, 0};
    else if (bound.count(v.storage))
      rec.location = {LocationKind::Register, v.storage, 0};
    typeNames.insert(rec.type);
    varsByFn[v.function].push_back(rec.id);
    db.variables.push_back(std::move(rec));
  }
  for (const auto& t : typeNames) {
    int len = 0;
    if (t != "int") len = std::stoi(t.substr(4, t.size() - 5));
    db.types.push_back({t, len});
  }
  std::sort(db.types.begin(), db.types.end(),
            [](const TypeRecord& a, const TypeRecord& b) { return a.length < b.length; });

  auto entries = design.functionEntries();
  // States are laid out function by function, so the order of first states
  // gives each function's block layout.
  std::map<BlockId, StateId> firstState;
  for (const auto& st : design.states)
    if (st.blockId >= 0) firstState.emplace(st.blockId, st.id);

  std::vector<const ir::Function*> fns;
  for (const auto& fn : design.ir.functions) fns.push_back(&fn);
  std::sort(fns.begin(), fns.end(), [&](const ir::Function* a, const ir::Function* b) {
    return entries.at(a->name) < entries.at(b->name);
  });
  std::vector<const ir::Function*> all = fns;
  for (const auto& fn : design.ir.inlined) all.push_back(&fn);
  auto scopeOf = [&](int line) {
    for (const ir::Function* fn : all)
      if (fn->line <= line && line <= fn->endLine) return fn->name;
    return std::string("main");
  };
  auto boundOr = [&](RegId r) { return bound.count(r) ? r : -1; };

  std::set<std::string> referenced;
  for (const auto& v : db.variables) referenced.insert(v.scope);
  for (const ir::Function* fn : all) {
    bool isInlined = fn->entry < 0;
    FunctionRecord f;
    f.name = fn->name;
    f.line = fn->line;
    f.endLine = fn->endLine;
    f.inlined = isInlined;
    for (RegId r : fn->params) {
      f.paramRegs.push_back(isInlined ? boundOr(r) : r);
      f.params.push_back(design.ir.registers.at(static_cast<size_t>(r)).name);
    }
    f.returnReg = isInlined ? boundOr(fn->returnReg) : fn->returnReg;
    f.entryBlock = fn->entry;
    f.entryState = isInlined ? -1 : entries.at(fn->name);
    std::vector<const ir::Block*> blocks;
    for (const auto& b : fn->blocks) blocks.push_back(&b);
    std::sort(blocks.begin(), blocks.end(), [&](const ir::Block* a, const ir::Block* b) {
      return firstState.at(a->id) < firstState.at(b->id);
    });
    for (const ir::Block* b : blocks) {
      f.blocks.push_back(b->id);
      BlockRecord br{b->id, fn->name, {}, b->term};
      for (const auto& in : b->instrs) {
        br.instrs.push_back(in.id);
        IrRecord r;
        r.id = in.id;
        r.opcode = std::string(ir::opcodeName(in.op));
        r.operands = ir::formatOperands(in, design.ir);
        r.sourceLine = in.line;
        r.origin = in.origin;
        r.function = fn->name;
        r.scope = scopeOf(in.line);
        referenced.insert(r.scope);
        r.block = b->id;
        r.stmt = in.stmt;
        r.result = in.result;
        r.args = in.args;
        r.memory = in.memory;
        r.callee = in.callee;
        r.phiBlocks = in.phiBlocks;
        db.ir.push_back(std::move(r));
        const auto& iv = design.scheduleOf.at(in.id);
        db.schedule.push_back({in.id, iv.start, iv.end});
      }
      db.blocks.push_back(std::move(br));
    }
    f.variables = varsByFn[fn->name];
    db.functions.push_back(std::move(f));
  }
  // An inlined function that left no trace has nothing to describe.
  std::erase_if(db.functions, [&](const FunctionRecord& f) { return f.inlined && !referenced.count(f.name); });
  std::sort(db.ir.begin(), db.ir.end(), [](const IrRecord& a, const IrRecord& b) { return a.id < b.id; });
  std::sort(db.schedule.begin(), db.schedule.end(),
            [](const ScheduleRecord& a, const ScheduleRecord& b) { return a.irId < b.irId; });
  std::sort(db.blocks.begin(), db.blocks.end(), [](const BlockRecord& a, const BlockRecord& b) { return a.id < b.id; });
  db.reindex();
  return db;
}

// ---------------------------------------------------------------- queries

bool DebugDatabase::operator==(const DebugDatabase& o) const {
  return version == o.version && source == o.source && optLevel == o.optLevel &&
         functions == o.functions && lines == o.lines && variables == o.variables && ir == o.ir &&
         states == o.states && schedule == o.schedule && registers == o.registers &&
         memories == o.memories && blocks == o.blocks && types == o.types &&
         entryState == o.entryState && haltState == o.haltState;
}

void DebugDatabase::reindex() {
  validate(*this);
  Index idx;
  idx.stateLines.resize(states.size());
  for (size_t i = 0; i < ir.size(); ++i) idx.irPos[ir[i].id] = i;
  for (size_t i = 0; i < functions.size(); ++i) idx.fnPos[functions[i].name] = i;
  for (size_t i = 0; i < schedule.size(); ++i) {
    const auto& s = schedule[i];
    idx.schedPos[s.irId] = i;
    int line = ir[idx.irPos.at(s.irId)].sourceLine;
    for (StateId st = s.stateStart; st <= s.stateEnd; ++st) {
      idx.stateLines[static_cast<size_t>(st)].insert(line);
      idx.lineStates[line].insert(st);
    }
    auto [it, fresh] = idx.lineBreakState.emplace(line, s.stateStart);
    if (!fresh) it->second = std::min(it->second, s.stateStart);
  }
  index_ = std::move(idx);

  // The executable design is rebuilt from records alone.
  auto d = std::make_shared<sched::ScheduledDesign>();
  d->optLevel = optLevel;
  d->states = states;
  d->entryState = entryState;
  d->haltState = haltState;
  d->registers = registers;
  d->memories = memories;
  RegId maxReg = -1;
  for (const auto& r : registers) maxReg = std::max(maxReg, r.id);
  d->ir.registers.resize(static_cast<size_t>(maxReg + 1));
  for (size_t i = 0; i < d->ir.registers.size(); ++i)
    d->ir.registers[i] = {static_cast<RegId>(i), "%unused" + std::to_string(i), "", ir::RegKind::Temp};
  for (const auto& r : registers) d->ir.registers[static_cast<size_t>(r.id)] = {r.id, r.name, r.function, r.kind};
  for (const auto& m : memories) {
    if (static_cast<size_t>(m.id) >= d->ir.arrays.size()) d->ir.arrays.resize(static_cast<size_t>(m.id) + 1);
    d->ir.arrays[static_cast<size_t>(m.id)] = {m.id, m.name, m.function, m.length};
  }
  for (const auto& v : variables) {
    bool isArray = v.location.kind == LocationKind::Memory;
    int length = isArray ? d->ir.arrays.at(static_cast<size_t>(v.location.id)).length : 0;
    d->ir.variables.push_back({v.name, v.scope, isArray, length, v.location.id});
  }
  std::map<BlockId, const BlockRecord*> blockById;
  for (const auto& b : blocks) blockById[b.id] = &b;
  InstrId maxInstr = -1;
  BlockId maxBlock = -1;
  for (const auto& f : functions) {
    ir::Function fn;
    if (f.inlined) {
      fn.name = f.name;
      fn.line = f.line;
      fn.endLine = f.endLine;
      fn.params = f.paramRegs;
      fn.returnReg = f.returnReg;
      d->ir.inlined.push_back(std::move(fn));
      continue;
    }
    fn.name = f.name;
    fn.params = f.paramRegs;
    fn.returnReg = f.returnReg;
    fn.entry = f.entryBlock;
    fn.line = f.line;
    fn.endLine = f.endLine;
    for (BlockId bid : f.blocks) {
      const BlockRecord& br = *blockById.at(bid);
      ir::Block b;
      b.id = br.id;
      b.term = br.term;
      maxBlock = std::max(maxBlock, b.id);
      for (InstrId id : br.instrs) {
        const IrRecord& r = irRecord(id);
        ir::Instr in;
        in.id = r.id;
        in.origin = r.origin;
        in.op = *ir::opcodeFromName(r.opcode);
        in.result = r.result;
        in.args = r.args;
        in.memory = r.memory;
        in.callee = r.callee;
        in.phiBlocks = r.phiBlocks;
        in.line = r.sourceLine;
        in.stmt = r.stmt;
        maxInstr = std::max(maxInstr, in.id);
        b.instrs.push_back(std::move(in));
      }
      fn.blocks.push_back(std::move(b));
    }
    d->ir.functions.push_back(std::move(fn));
  }
  d->ir.nextInstrId = maxInstr + 1;
  d->ir.nextBlockId = maxBlock + 1;
  for (const auto& s : schedule) d->scheduleOf[s.irId] = {s.stateStart, s.stateEnd};
  try {
    sched::validate(*d);
  } catch (const Error& e) {
    corrupt(std::string("design check failed: ") + e.what());
  }
  design_ = std::move(d);
}

std::shared_ptr<const sched::ScheduledDesign> DebugDatabase::design() const { return design_; }

const sched::FsmState& DebugDatabase::state(StateId id) const {
  if (id < 0 || id >= static_cast<StateId>(states.size()))
    throw Error(ErrorCode::UnknownState, "unknown state " + std::to_string(id));
  return states[static_cast<size_t>(id)];
}

std::set<int> DebugDatabase::linesForState(StateId id) const {
  state(id);
  return index_.stateLines[static_cast<size_t>(id)];
}

std::set<StateId> DebugDatabase::statesForLine(int line) const {
  if (!hasLine(line)) throw Error(ErrorCode::UnknownLine, "line " + std::to_string(line) + " does not exist", line);
  auto it = index_.lineStates.find(line);
  if (it == index_.lineStates.end())
    throw Error(ErrorCode::LineHasNoCode, "line " + std::to_string(line) + " has no code", line);
  return it->second;
}

StateId DebugDatabase::breakpointState(int line) const {
  statesForLine(line);
  return index_.lineBreakState.at(line);
}

std::vector<IrRecord> DebugDatabase::irForState(StateId id) const {
  std::vector<IrRecord> out;
  for (InstrId i : state(id).activeInstrs) out.push_back(irRecord(i));
  return out;
}

const IrRecord& DebugDatabase::irRecord(InstrId id) const {
  auto it = index_.irPos.find(id);
  if (it == index_.irPos.end()) throw Error(ErrorCode::InvalidParams, "unknown instruction " + std::to_string(id));
  return ir[it->second];
}

const ScheduleRecord& DebugDatabase::scheduleOf(InstrId id) const {
  auto it = index_.schedPos.find(id);
  if (it == index_.schedPos.end()) throw Error(ErrorCode::InvalidParams, "unknown instruction " + std::to_string(id));
  return schedule[it->second];
}

const FunctionRecord& DebugDatabase::function(std::string_view name) const {
  auto it = index_.fnPos.find(name);
  if (it == index_.fnPos.end()) throw Error(ErrorCode::InvalidParams, "unknown function " + std::string(name));
  return functions[it->second];
}

std::vector<const VariableRecord*> DebugDatabase::findVariables(std::string_view name,
                                                                std::string_view scope) const {
  std::vector<const VariableRecord*> out;
  for (const auto& v : variables)
    if (v.name == name && (scope.empty() || v.scope == scope)) out.push_back(&v);
  return out;
}

// ---------------------------------------------------------------- validation

void validate(const DebugDatabase& db) {
  if (db.version != kFormatVersion) corrupt("unsupported version");
  if (static_cast<int>(db.lines.size()) != db.source.lineCount()) corrupt("line table does not cover the source");
  for (size_t i = 0; i < db.lines.size(); ++i) {
    if (db.lines[i].lineNo != static_cast<int>(i) + 1) corrupt("line numbers are not contiguous");
    if (db.lines[i].text != db.source.lines[i]) corrupt("line text disagrees with the source");
  }
  auto lineOk = [&](int l) { return l >= 1 && l <= static_cast<int>(db.lines.size()); };

  std::map<RegId, const sched::RegisterBinding*> regs;
  for (const auto& r : db.registers)
    if (!regs.emplace(r.id, &r).second) corrupt("duplicate register " + std::to_string(r.id));
  std::map<MemId, const sched::MemoryBinding*> mems;
  for (const auto& m : db.memories) {
    if (!mems.emplace(m.id, &m).second) corrupt("duplicate memory " + std::to_string(m.id));
    if (m.length < 1 || m.length > 65535) corrupt("memory length out of range");
  }
  std::set<std::string> typeNames;
  std::set<std::string> usedTypes;
  for (const auto& t : db.types) typeNames.insert(t.name);

  std::map<std::string, const FunctionRecord*> fns;
  for (const auto& f : db.functions) {
    if (!fns.emplace(f.name, &f).second) corrupt("duplicate function " + f.name);
    if (!typeNames.count(f.returnType)) corrupt("function " + f.name + " has an unknown return type");
    usedTypes.insert(f.returnType);
  }
  if (!fns.count("main")) corrupt("no main function");

  // Variables: dense ids, resolvable locations, listed by their function.
  std::set<RegId> claimedRegs;
  std::set<MemId> claimedMems;
  for (size_t i = 0; i < db.variables.size(); ++i) {
    const auto& v = db.variables[i];
    if (v.id != static_cast<int>(i)) corrupt("variable ids are not contiguous");
    auto f = fns.find(v.scope);
    if (f == fns.end()) corrupt("variable " + v.name + " has an unknown scope");
    const auto& listed = f->second->variables;
    if (std::find(listed.begin(), listed.end(), v.id) == listed.end())
      corrupt("variable " + v.name + " is not listed by its function");
    if (!typeNames.count(v.type)) corrupt("variable " + v.name + " has an unknown type");
    usedTypes.insert(v.type);
    switch (v.location.kind) {
      case LocationKind::Register:
        if (!regs.count(v.location.id)) corrupt("variable " + v.name + " names a missing register");
        if (v.type != "int") corrupt("array variable in a register");
        claimedRegs.insert(v.location.id);
        break;
      case LocationKind::Memory: {
        auto m = mems.find(v.location.id);
        if (m == mems.end()) corrupt("variable " + v.name + " names a missing memory");
        if (v.type != typeName(true, m->second->length)) corrupt("array type disagrees with its memory");
        claimedMems.insert(v.location.id);
        break;
      }
      case LocationKind::OptimizedOut:
        if (v.type != "int") corrupt("array variables always have a memory");
        break;
    }
  }
  for (const auto& t : db.types) {
    if (!usedTypes.count(t.name)) corrupt("type " + t.name + " is not referenced");
    if (t.name != typeName(t.length > 0, t.length)) corrupt("type " + t.name + " is malformed");
  }
  for (const auto& r : db.registers)
    if (r.kind == ir::RegKind::Variable && !claimedRegs.count(r.id))
      corrupt("register " + std::to_string(r.id) + " belongs to no variable");
  for (const auto& m : db.memories)
    if (!claimedMems.count(m.id)) corrupt("memory " + std::to_string(m.id) + " belongs to no variable");

  // States.
  if (db.states.empty()) corrupt("no states");
  auto stateOk = [&](StateId s) { return s >= 0 && s < static_cast<StateId>(db.states.size()); };
  if (!stateOk(db.entryState) || !stateOk(db.haltState)) corrupt("entry or halt state is missing");
  std::map<BlockId, const BlockRecord*> blocks;
  for (const auto& b : db.blocks)
    if (!blocks.emplace(b.id, &b).second) corrupt("duplicate block " + std::to_string(b.id));
  std::set<BlockId> blocksWithStates;
  for (size_t i = 0; i < db.states.size(); ++i) {
    const auto& st = db.states[i];
    if (st.id != static_cast<StateId>(i)) corrupt("state ids are not contiguous");
    if (!fns.count(st.function)) corrupt("state " + std::to_string(st.id) + " names an unknown function");
    if (st.blockId >= 0) {
      auto b = blocks.find(st.blockId);
      if (b == blocks.end()) corrupt("state " + std::to_string(st.id) + " names a missing block");
      if (b->second->function != st.function) corrupt("state and block disagree on the function");
      blocksWithStates.insert(st.blockId);
    } else if (st.kind != sched::TransitionKind::Halt) {
      corrupt("state " + std::to_string(st.id) + " has no block");
    }
    for (StateId s : {st.defaultNext, st.returnState})
      if (s != -1 && !stateOk(s)) corrupt("state " + std::to_string(st.id) + " has a dangling successor");
    if (st.branch) {
      if (!stateOk(st.branch->takenNext)) corrupt("dangling branch target");
      if (!regs.count(st.branch->cond)) corrupt("branch on a missing register");
    }
    if (st.kind == sched::TransitionKind::Call && !fns.count(st.callee)) corrupt("call to an unknown function");
  }
  for (const auto& b : db.blocks)
    if (!blocksWithStates.count(b.id)) corrupt("block " + std::to_string(b.id) + " has no states");

  // IR and schedule.
  std::map<InstrId, const IrRecord*> irs;
  for (const auto& r : db.ir) {
    if (!irs.emplace(r.id, &r).second) corrupt("duplicate instruction " + std::to_string(r.id));
    if (!ir::opcodeFromName(r.opcode)) corrupt("unknown opcode " + r.opcode);
    if (!lineOk(r.sourceLine)) corrupt("instruction " + std::to_string(r.id) + " names a missing line");
    auto b = blocks.find(r.block);
    if (b == blocks.end()) corrupt("instruction " + std::to_string(r.id) + " names a missing block");
    const auto& list = b->second->instrs;
    if (std::find(list.begin(), list.end(), r.id) == list.end()) corrupt("instruction not listed by its block");
    if (r.function != b->second->function) corrupt("instruction and block disagree on the function");
    if (!fns.count(r.scope)) corrupt("instruction " + std::to_string(r.id) + " has an unknown scope");
    if (r.result && !regs.count(*r.result)) corrupt("instruction writes a missing register");
    for (const auto& a : r.args)
      if (a.isReg() && !regs.count(a.value)) corrupt("instruction reads a missing register");
    if ((r.opcode == "load" || r.opcode == "store") && !mems.count(r.memory)) corrupt("access to a missing memory");
    if (r.opcode == "call" && !fns.count(r.callee)) corrupt("call to an unknown function");
    for (BlockId p : r.phiBlocks)
      if (!blocks.count(p)) corrupt("phi names a missing block");
    if (r.opcode == "phi-lite" && r.phiBlocks.size() != r.args.size()) corrupt("phi arity mismatch");
  }
  std::set<InstrId> scheduled;
  for (const auto& s : db.schedule) {
    if (!irs.count(s.irId)) corrupt("schedule names missing instruction " + std::to_string(s.irId));
    if (!scheduled.insert(s.irId).second) corrupt("instruction scheduled twice");
    if (!stateOk(s.stateStart) || !stateOk(s.stateEnd) || s.stateStart > s.stateEnd)
      corrupt("schedule interval out of range");
  }
  if (scheduled.size() != irs.size()) corrupt("an instruction has no schedule");
  for (const auto& st : db.states)
    for (InstrId id : st.activeInstrs)
      if (!irs.count(id)) corrupt("state lists a missing instruction");

  for (const auto& b : db.blocks) {
    if (!fns.count(b.function)) corrupt("block names an unknown function");
    for (InstrId id : b.instrs)
      if (!irs.count(id)) corrupt("block lists a missing instruction");
    for (BlockId t : ir::successors(b.term))
      if (!blocks.count(t)) corrupt("block " + std::to_string(b.id) + " jumps to a missing block");
    if (b.term.kind == ir::TermKind::Branch && b.term.cond.isReg() && !regs.count(b.term.cond.value))
      corrupt("branch on a missing register");
  }
  std::set<std::string> referencedFns;
  for (const auto& v : db.variables) referencedFns.insert(v.scope);
  for (const auto& r : db.ir) referencedFns.insert(r.scope);
  for (const auto& f : db.functions) {
    if (!lineOk(f.line) || !lineOk(f.endLine)) corrupt("function " + f.name + " names a missing line");
    auto regOk = [&](RegId r) { return regs.count(r) || (f.inlined && r == -1); };
    if (f.inlined) {
      if (f.entryState != -1 || f.entryBlock != -1 || !f.blocks.empty())
        corrupt("inlined function " + f.name + " has its own states");
      if (!referencedFns.count(f.name)) corrupt("inlined function " + f.name + " is not referenced");
    } else {
      if (!stateOk(f.entryState)) corrupt("function " + f.name + " has a missing entry state");
      if (!blocks.count(f.entryBlock)) corrupt("function " + f.name + " has a missing entry block");
    }
    if (!regOk(f.returnReg)) corrupt("function " + f.name + " has a missing return register");
    if (f.params.size() != f.paramRegs.size()) corrupt("function " + f.name + " parameter arity mismatch");
    for (RegId r : f.paramRegs)
      if (!regOk(r)) corrupt("function " + f.name + " has a missing parameter register");
    for (BlockId b : f.blocks) {
      auto it = blocks.find(b);
      if (it == blocks.end() || it->second->function != f.name) corrupt("function " + f.name + " lists a foreign block");
    }
    for (int v : f.variables)
      if (v < 0 || v >= static_cast<int>(db.variables.size()) || db.variables[static_cast<size_t>(v)].scope != f.name)
        corrupt("function " + f.name + " lists a foreign variable");
  }
  size_t listedBlocks = 0;
  for (const auto& f : db.functions) listedBlocks += f.blocks.size();
  if (listedBlocks != db.blocks.size()) corrupt("a block belongs to no function");
}

// ---------------------------------------------------------------- JSON

namespace {

json operandJson(const ir::Operand& o) {
  return o.isReg() ? json{{"reg", o.value}} : json{{"imm", o.value}};
}

ir::Operand operandFrom(const json& j) {
  if (j.contains("reg")) return ir::Operand::reg(j.at("reg").get<int32_t>());
  return ir::Operand::imm(j.at("imm").get<int32_t>());
}

json termJson(const ir::Terminator& t) {
  json j{{"kind", termName(t.kind)}, {"target", t.target}, {"elseTarget", t.elseTarget}, {"line", t.line}};
  j["cond"] = t.kind == ir::TermKind::Branch ? operandJson(t.cond) : json(nullptr);
  return j;
}

ir::Terminator termFrom(const json& j) {
  ir::Terminator t;
  auto kind = j.at("kind").get<std::string>();
  if (kind == "jump") t.kind = ir::TermKind::Jump;
  else if (kind == "branch") t.kind = ir::TermKind::Branch;
  else if (kind == "return") t.kind = ir::TermKind::Return;
  else corrupt("unknown terminator " + kind);
  t.target = j.at("target").get<BlockId>();
  t.elseTarget = j.at("elseTarget").get<BlockId>();
  t.line = j.at("line").get<int>();
  if (!j.at("cond").is_null()) t.cond = operandFrom(j.at("cond"));
  return t;
}

json stateJson(const sched::FsmState& s) {
  json j{{"id", s.id},
         {"blockId", s.blockId},
         {"function", s.function},
         {"activeInstrs", s.activeInstrs},
         {"kind", sched::transitionName(s.kind)},
         {"defaultNext", s.defaultNext},
         {"callee", s.callee},
         {"returnState", s.returnState}};
  j["branch"] = s.branch ? json{{"cond", s.branch->cond}, {"takenNext", s.branch->takenNext}} : json(nullptr);
  return j;
}

sched::FsmState stateFrom(const json& j) {
  sched::FsmState s;
  s.id = j.at("id").get<StateId>();
  s.blockId = j.at("blockId").get<BlockId>();
  s.function = j.at("function").get<std::string>();
  s.activeInstrs = j.at("activeInstrs").get<std::vector<InstrId>>();
  auto kind = sched::transitionFromName(j.at("kind").get<std::string>());
  if (!kind) corrupt("unknown transition kind");
  s.kind = *kind;
  s.defaultNext = j.at("defaultNext").get<StateId>();
  s.callee = j.at("callee").get<std::string>();
  s.returnState = j.at("returnState").get<StateId>();
  if (!j.at("branch").is_null())
    s.branch = sched::BranchEdge{j.at("branch").at("cond").get<RegId>(), j.at("branch").at("takenNext").get<StateId>()};
  return s;
}

}  // namespace

std::string toJson(const DebugDatabase& db, int indent) {
  json j;
  j["version"] = db.version;
  j["source"] = {{"path", db.source.path}, {"text", db.source.text()}};
  j["optLevel"] = frontend::optLevelName(db.optLevel);
  j["entryState"] = db.entryState;
  j["haltState"] = db.haltState;

  json fns = json::array();
  for (const auto& f : db.functions)
    fns.push_back({{"name", f.name},
                   {"line", f.line},
                   {"endLine", f.endLine},
                   {"returnType", f.returnType},
                   {"params", f.params},
                   {"paramRegs", f.paramRegs},
                   {"returnReg", f.returnReg},
                   {"inlined", f.inlined},
                   {"entryBlock", f.entryBlock},
                   {"entryState", f.entryState},
                   {"blocks", f.blocks},
                   {"variables", f.variables}});
  j["functions"] = std::move(fns);

  json lines = json::array();
  for (const auto& l : db.lines) lines.push_back({{"lineNo", l.lineNo}, {"text", l.text}});
  j["lines"] = std::move(lines);

  json vars = json::array();
  for (const auto& v : db.variables) {
    json loc{{"kind", locationName(v.location.kind)}};
    if (v.location.kind == LocationKind::Register) loc["regId"] = v.location.id;
    if (v.location.kind == LocationKind::Memory) {
      loc["memId"] = v.location.id;
      loc["baseOffset"] = v.location.baseOffset;
    }
    vars.push_back({{"id", v.id}, {"name", v.name}, {"scope", v.scope}, {"type", v.type}, {"location", loc}});
  }
  j["variables"] = std::move(vars);

  json irs = json::array();
  for (const auto& r : db.ir) {
    json args = json::array();
    for (const auto& a : r.args) args.push_back(operandJson(a));
    irs.push_back({{"id", r.id},
                   {"opcode", r.opcode},
                   {"operands", r.operands},
                   {"sourceLine", r.sourceLine},
                   {"origin", r.origin},
                   {"function", r.function},
                   {"scope", r.scope},
                   {"block", r.block},
                   {"stmt", r.stmt},
                   {"result", r.result ? json(*r.result) : json(nullptr)},
                   {"args", args},
                   {"memory", r.memory},
                   {"callee", r.callee},
                   {"phiBlocks", r.phiBlocks}});
  }
  j["ir"] = std::move(irs);

  json states = json::array();
  for (const auto& s : db.states) states.push_back(stateJson(s));
  j["states"] = std::move(states);

  json sched = json::array();
  for (const auto& s : db.schedule)
    sched.push_back({{"irId", s.irId}, {"stateStart", s.stateStart}, {"stateEnd", s.stateEnd}});
  j["schedule"] = std::move(sched);

  json regs = json::array();
  for (const auto& r : db.registers)
    regs.push_back({{"id", r.id}, {"name", r.name}, {"function", r.function}, {"kind", regKindName(r.kind)}});
  j["registers"] = std::move(regs);

  json mems = json::array();
  for (const auto& m : db.memories)
    mems.push_back({{"id", m.id}, {"name", m.name}, {"function", m.function}, {"length", m.length}});
  j["memories"] = std::move(mems);

  json blocks = json::array();
  for (const auto& b : db.blocks)
    blocks.push_back({{"id", b.id}, {"function", b.function}, {"instrs", b.instrs}, {"term", termJson(b.term)}});
  j["blocks"] = std::move(blocks);

  json types = json::array();
  for (const auto& t : db.types) types.push_back({{"name", t.name}, {"length", t.length}});
  j["types"] = std::move(types);

  return j.dump(indent);
}

DebugDatabase fromJson(std::string_view text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) corrupt("not a JSON document");
  if (!j.contains("version") || !j["version"].is_number_integer()) corrupt("missing version");
  if (j["version"].get<int>() != kFormatVersion)
    throw Error(ErrorCode::FormatVersionMismatch,
                "debug database version " + std::to_string(j["version"].get<int>()) + " is not supported (expected " +
                    std::to_string(kFormatVersion) + ")");
  DebugDatabase db;
  try {
    db.version = j.at("version").get<int>();
    db.source = frontend::SourceProgram::fromText(j.at("source").at("path").get<std::string>(),
                                                  j.at("source").at("text").get<std::string>());
    db.optLevel = frontend::optLevelFromName(j.at("optLevel").get<std::string>());
    db.entryState = j.at("entryState").get<StateId>();
    db.haltState = j.at("haltState").get<StateId>();
    for (const auto& f : j.at("functions")) {
      FunctionRecord r;
      r.name = f.at("name").get<std::string>();
      r.line = f.at("line").get<int>();
      r.endLine = f.at("endLine").get<int>();
      r.returnType = f.at("returnType").get<std::string>();
      r.params = f.at("params").get<std::vector<std::string>>();
      r.paramRegs = f.at("paramRegs").get<std::vector<RegId>>();
      r.returnReg = f.at("returnReg").get<RegId>();
      r.inlined = f.at("inlined").get<bool>();
      r.entryBlock = f.at("entryBlock").get<BlockId>();
      r.entryState = f.at("entryState").get<StateId>();
      r.blocks = f.at("blocks").get<std::vector<BlockId>>();
      r.variables = f.at("variables").get<std::vector<int>>();
      db.functions.push_back(std::move(r));
    }
    for (const auto& l : j.at("lines")) db.lines.push_back({l.at("lineNo").get<int>(), l.at("text").get<std::string>()});
    for (const auto& v : j.at("variables")) {
      VariableRecord r;
      r.id = v.at("id").get<int>();
      r.name = v.at("name").get<std::string>();
      r.scope = v.at("scope").get<std::string>();
      r.type = v.at("type").get<std::string>();
      const auto& loc = v.at("location");
      auto kind = loc.at("kind").get<std::string>();
      if (kind == "register") {
        r.location = {LocationKind::Register, loc.at("regId").get<int>(), 0};
      } else if (kind == "memory") {
        r.location = {LocationKind::Memory, loc.at("memId").get<int>(), loc.at("baseOffset").get<int>()};
      } else if (kind == "optimized-out") {
        r.location = {};
      } else {
        corrupt("unknown location kind " + kind);
      }
      db.variables.push_back(std::move(r));
    }
    for (const auto& i : j.at("ir")) {
      IrRecord r;
      r.id = i.at("id").get<InstrId>();
      r.opcode = i.at("opcode").get<std::string>();
      r.operands = i.at("operands").get<std::string>();
      r.sourceLine = i.at("sourceLine").get<int>();
      r.origin = i.at("origin").get<InstrId>();
      r.function = i.at("function").get<std::string>();
      r.scope = i.at("scope").get<std::string>();
      r.block = i.at("block").get<BlockId>();
      r.stmt = i.at("stmt").get<int>();
      if (!i.at("result").is_null()) r.result = i.at("result").get<RegId>();
      for (const auto& a : i.at("args")) r.args.push_back(operandFrom(a));
      r.memory = i.at("memory").get<MemId>();
      r.callee = i.at("callee").get<std::string>();
      r.phiBlocks = i.at("phiBlocks").get<std::vector<BlockId>>();
      db.ir.push_back(std::move(r));
    }
    for (const auto& s : j.at("states")) db.states.push_back(stateFrom(s));
    for (const auto& s : j.at("schedule"))
      db.schedule.push_back({s.at("irId").get<InstrId>(), s.at("stateStart").get<StateId>(), s.at("stateEnd").get<StateId>()});
    for (const auto& r : j.at("registers")) {
      sched::RegisterBinding b;
      b.id = r.at("id").get<RegId>();
      b.name = r.at("name").get<std::string>();
      b.function = r.at("function").get<std::string>();
      auto kind = r.at("kind").get<std::string>();
      if (kind == "variable") b.kind = ir::RegKind::Variable;
      else if (kind == "temp") b.kind = ir::RegKind::Temp;
      else if (kind == "return") b.kind = ir::RegKind::Return;
      else corrupt("unknown register kind " + kind);
      if (b.id < 0) corrupt("negative register id");
      db.registers.push_back(std::move(b));
    }
    for (const auto& m : j.at("memories"))
      db.memories.push_back({m.at("id").get<MemId>(), m.at("name").get<std::string>(),
                             m.at("function").get<std::string>(), m.at("length").get<int>()});
    for (const auto& b : j.at("blocks"))
      db.blocks.push_back({b.at("id").get<BlockId>(), b.at("function").get<std::string>(),
                           b.at("instrs").get<std::vector<InstrId>>(), termFrom(b.at("term"))});
    for (const auto& t : j.at("types")) db.types.push_back({t.at("name").get<std::string>(), t.at("length").get<int>()});
  } catch (const json::exception& e) {
    corrupt(e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::CorruptDatabase) throw;
    corrupt(e.what());
  }
  db.reindex();
  return db;
}

void save(const DebugDatabase& db, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << toJson(db, 1) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "write to " + path + " failed");
}

DebugDatabase load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return fromJson(ss.str());
}

}  // namespace hlsdbg::debugdb
