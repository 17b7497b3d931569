// SPDX-License-Identifier: Apache-2.0
#include "scheduler/scheduler.hpp"

#include <algorithm>
#include <set>

#include "common/error.hpp"
#include "frontend/cfg.hpp"

namespace hlsdbg::sched {

using ir::Opcode;

std::string_view transitionName(TransitionKind k) noexcept {
  switch (k) {
    case TransitionKind::Jump: return "jump";
    case TransitionKind::Branch: return "branch";
    case TransitionKind::Call: return "call";
    case TransitionKind::Return: return "return";
    case TransitionKind::Halt: return "halt";
  }
  return "?";
}

std::optional<TransitionKind> transitionFromName(std::string_view name) noexcept {
  for (auto k : {TransitionKind::Jump, TransitionKind::Branch, TransitionKind::Call,
                 TransitionKind::Return, TransitionKind::Halt})
    if (transitionName(k) == name) return k;
  return std::nullopt;
}

const FsmState& ScheduledDesign::state(StateId id) const {
  if (!hasState(id)) throw Error(ErrorCode::UnknownState, "unknown state " + std::to_string(id));
  return states[static_cast<size_t>(id)];
}

std::map<std::string, StateId> ScheduledDesign::functionEntries() const {
  std::map<std::string, StateId> out;
  for (const auto& fn : ir.functions)
    for (const auto& st : states)
      if (st.blockId == fn.entry) {
        out[fn.name] = st.id;
        break;
      }
  return out;
}

int latency(Opcode op) noexcept {
  switch (op) {
    case Opcode::Mul: return 2;
    case Opcode::Load: return 2;
    case Opcode::Div:
    case Opcode::Mod: return 8;
    default: return 1;
  }
}

std::unordered_map<InstrId, const ir::Instr*> indexInstrs(const ir::Program& prog) {
  std::unordered_map<InstrId, const ir::Instr*> out;
  for (const auto& fn : prog.functions)
    for (const auto& b : fn.blocks)
      for (const auto& in : b.instrs) out[in.id] = &in;
  return out;
}

namespace {

[[noreturn]] void unschedulable(const std::string& what) {
  throw Error(ErrorCode::UnschedulableDesign, what);
}

bool accessesMemory(const ir::Instr& in) {
  return in.op == Opcode::Load || in.op == Opcode::Store;
}

struct LocalSlot {
  int start = 0;
  int end = 0;
};

// ASAP placement in program order. Dependences are tracked per register and
// per memory so the cost stays linear in the block size.
std::vector<LocalSlot> scheduleBlock(const ir::Block& block, OptLevel level) {
  std::vector<LocalSlot> slots;
  std::map<RegId, int> lastWriteEnd;
  std::map<RegId, int> lastReadStart;
  std::map<MemId, int> lastMemEnd;
  // Statement ordinal -> latest start of its instructions so far. At O0 no
  // instruction starts before any instruction of an earlier statement.
  std::map<int, int> stmtLatestStart;
  int lastCallEnd = -1;
  int maxEnd = -1;
  for (const auto& in : block.instrs) {
    int start = 0;
    if (in.op != Opcode::Phi) {
      for (RegId r : ir::readsOf(in))
        if (auto it = lastWriteEnd.find(r); it != lastWriteEnd.end()) start = std::max(start, it->second + 1);
      if (auto w = ir::writeOf(in)) {
        if (auto it = lastWriteEnd.find(*w); it != lastWriteEnd.end()) start = std::max(start, it->second + 1);
        if (auto it = lastReadStart.find(*w); it != lastReadStart.end()) start = std::max(start, it->second);
      }
      if (accessesMemory(in))
        if (auto it = lastMemEnd.find(in.memory); it != lastMemEnd.end()) start = std::max(start, it->second + 1);
      start = std::max(start, lastCallEnd + 1);
      if (in.op == Opcode::Call) start = std::max(start, maxEnd);
      if (level == OptLevel::O0)
        for (auto [stmt, latest] : stmtLatestStart)
          if (stmt < in.stmt) start = std::max(start, latest);
    } else if (!slots.empty() && block.instrs[slots.size() - 1].op != Opcode::Phi) {
      unschedulable("phi after a non-phi instruction");
    }
    int end = start + latency(in.op) - 1;
    slots.push_back({start, end});
    for (RegId r : ir::readsOf(in)) lastReadStart[r] = std::max(lastReadStart[r], start);
    if (auto w = ir::writeOf(in)) lastWriteEnd[*w] = end;
    if (accessesMemory(in)) lastMemEnd[in.memory] = end;
    if (in.op == Opcode::Call) lastCallEnd = end;
    auto& latest = stmtLatestStart[in.stmt];
    latest = std::max(latest, start);
    maxEnd = std::max(maxEnd, end);
  }
  return slots;
}

std::vector<const ir::Block*> layout(const ir::Function& fn) {
  std::vector<const ir::Block*> out;
  const ir::Block* entry = fn.block(fn.entry);
  if (!entry) unschedulable("function " + fn.name + " has no entry block");
  out.push_back(entry);
  for (const auto& b : fn.blocks)
    if (b.id != fn.entry) out.push_back(&b);
  return out;
}

std::set<RegId> referencedRegisters(const ir::Program& prog) {
  std::set<RegId> regs;
  for (const auto& fn : prog.functions) {
    regs.insert(fn.returnReg);
    regs.insert(fn.params.begin(), fn.params.end());
    for (const auto& b : fn.blocks) {
      for (const auto& in : b.instrs) {
        for (RegId r : ir::readsOf(in)) regs.insert(r);
        if (auto w = ir::writeOf(in)) regs.insert(*w);
        if (in.op == Opcode::Call) {
          const ir::Function* callee = prog.function(in.callee);
          if (callee) regs.insert(callee->params.begin(), callee->params.end());
        }
      }
      if (b.term.kind == ir::TermKind::Branch && b.term.cond.isReg()) regs.insert(b.term.cond.value);
    }
  }
  return regs;
}

}  // namespace

void hoistFromJoins(ir::Program& prog) {
  for (auto& fn : prog.functions) {
    auto dom = ir::dominatorTree(fn);
    auto pdom = ir::postDominatorTree(fn);
    std::map<BlockId, ir::Block*> byId;
    for (auto& b : fn.blocks) byId[b.id] = &b;
    for (auto it = fn.blocks.rbegin(); it != fn.blocks.rend(); ++it) {
      ir::Block& d = *it;
      if (d.term.kind != ir::TermKind::Branch) continue;
      auto ip = pdom.idom.find(d.id);
      if (ip == pdom.idom.end() || ip->second == d.id) continue;
      BlockId jid = ip->second;
      if (!dom.dominates(d.id, jid)) continue;
      ir::Block& join = *byId.at(jid);

      // Region strictly between the branch and the join.
      std::set<BlockId> region;
      std::vector<BlockId> work = ir::successors(d.term);
      bool sideEntry = false;
      while (!work.empty()) {
        BlockId n = work.back();
        work.pop_back();
        if (n == d.id) sideEntry = true;  // loop back to the branch
        if (n == jid || n == d.id || !region.insert(n).second) continue;
        if (!dom.dominates(d.id, n)) sideEntry = true;
        for (BlockId s : ir::successors(byId.at(n)->term)) work.push_back(s);
      }
      if (sideEntry) continue;

      std::set<RegId> reads;
      std::set<RegId> writes;
      std::set<MemId> mems;
      bool hasCall = false;
      for (BlockId r : region) {
        const ir::Block& b = *byId.at(r);
        for (const auto& in : b.instrs) {
          for (RegId x : ir::readsOf(in)) reads.insert(x);
          if (auto w = ir::writeOf(in)) writes.insert(*w);
          if (accessesMemory(in)) mems.insert(in.memory);
          hasCall |= in.op == Opcode::Call;
          if (in.op == Opcode::Phi) hasCall = true;  // keep phi regions intact
        }
        if (b.term.kind == ir::TermKind::Branch && b.term.cond.isReg()) reads.insert(b.term.cond.value);
      }
      if (hasCall) continue;
      if (d.term.cond.isReg()) reads.insert(d.term.cond.value);

      bool joinHasPhi = std::any_of(join.instrs.begin(), join.instrs.end(),
                                    [](const ir::Instr& in) { return in.op == Opcode::Phi; });
      if (joinHasPhi) continue;

      std::vector<ir::Instr> kept;
      std::vector<ir::Instr> hoisted;
      for (auto& in : join.instrs) {
        auto ins = ir::readsOf(in);
        auto w = ir::writeOf(in);
        bool ok = ir::isPure(in.op) && w.has_value();
        for (RegId r : ins) ok = ok && !writes.count(r);
        if (w) ok = ok && !writes.count(*w) && !reads.count(*w);
        if (ok) {
          hoisted.push_back(std::move(in));
          continue;
        }
        // Later instructions must not be hoisted above this one.
        for (RegId r : ins) reads.insert(r);
        if (w) writes.insert(*w);
        if (accessesMemory(in)) mems.insert(in.memory);
        kept.push_back(std::move(in));
      }
      join.instrs = std::move(kept);
      if (hoisted.empty()) continue;
      for (auto& in : hoisted) d.instrs.push_back(std::move(in));
    }
  }
}

ScheduledDesign schedule(ir::Program prog, OptLevel level) {
  if (level == OptLevel::O2) hoistFromJoins(prog);
  const ir::Function* mainFn = prog.function("main");
  if (!mainFn) unschedulable("no main function");

  ScheduledDesign design;
  design.optLevel = level;

  std::vector<const ir::Function*> order{mainFn};
  for (const auto& fn : prog.functions)
    if (fn.name != "main") order.push_back(&fn);

  // Pass 1: local schedules and state numbering.
  struct Placed {
    const ir::Function* fn;
    const ir::Block* block;
    std::vector<LocalSlot> slots;
    StateId base;
    int steps;
  };
  std::vector<Placed> placed;
  std::map<BlockId, StateId> firstState;
  StateId next = 0;
  for (const ir::Function* fn : order) {
    for (const ir::Block* b : layout(*fn)) {
      auto slots = scheduleBlock(*b, level);
      int steps = 1;
      for (const auto& s : slots) steps = std::max(steps, s.end + 1);
      firstState[b->id] = next;
      placed.push_back({fn, b, std::move(slots), next, steps});
      next += steps;
    }
  }
  design.haltState = next;
  design.entryState = firstState.at(mainFn->entry);
  std::map<std::string, StateId> entries;
  for (const ir::Function* fn : order) entries[fn->name] = firstState.at(fn->entry);

  // Pass 2: states and transitions.
  design.states.resize(static_cast<size_t>(next) + 1);
  for (const auto& p : placed) {
    for (int k = 0; k < p.steps; ++k) {
      FsmState& st = design.states[static_cast<size_t>(p.base + k)];
      st.id = p.base + k;
      st.blockId = p.block->id;
      st.function = p.fn->name;
      st.kind = TransitionKind::Jump;
      st.defaultNext = st.id + 1;
    }
    for (size_t i = 0; i < p.block->instrs.size(); ++i) {
      const ir::Instr& in = p.block->instrs[i];
      Interval iv{p.base + p.slots[i].start, p.base + p.slots[i].end};
      design.scheduleOf[in.id] = iv;
      for (StateId s = iv.start; s <= iv.end; ++s)
        design.states[static_cast<size_t>(s)].activeInstrs.push_back(in.id);
      if (in.op == Opcode::Call) {
        FsmState& st = design.states[static_cast<size_t>(iv.end)];
        if (iv.end == p.base + p.steps - 1) unschedulable("call in the last state of its block");
        auto e = entries.find(in.callee);
        if (e == entries.end()) unschedulable("call to unknown function " + in.callee);
        st.kind = TransitionKind::Call;
        st.callee = in.callee;
        st.returnState = st.id + 1;
        st.defaultNext = e->second;
      }
    }
    FsmState& last = design.states[static_cast<size_t>(p.base + p.steps - 1)];
    const ir::Terminator& t = p.block->term;
    switch (t.kind) {
      case ir::TermKind::Jump:
        last.kind = TransitionKind::Jump;
        last.defaultNext = firstState.at(t.target);
        break;
      case ir::TermKind::Branch:
        if (t.cond.isImm()) {
          last.kind = TransitionKind::Jump;
          last.defaultNext = firstState.at(t.cond.value != 0 ? t.target : t.elseTarget);
        } else {
          last.kind = TransitionKind::Branch;
          last.defaultNext = firstState.at(t.elseTarget);
          last.branch = BranchEdge{t.cond.value, firstState.at(t.target)};
        }
        break;
      case ir::TermKind::Return:
        last.kind = TransitionKind::Return;
        last.defaultNext = p.fn == mainFn ? design.haltState : -1;
        break;
    }
  }
  FsmState& halt = design.states.back();
  halt.id = design.haltState;
  halt.blockId = -1;
  halt.function = "main";
  halt.kind = TransitionKind::Halt;
  halt.defaultNext = -1;
  for (auto& st : design.states) std::sort(st.activeInstrs.begin(), st.activeInstrs.end());

  auto regs = referencedRegisters(prog);
  for (RegId r : regs) {
    const auto& reg = prog.registers.at(static_cast<size_t>(r));
    design.registers.push_back({reg.id, reg.name, reg.function, reg.kind});
  }
  for (const auto& a : prog.arrays) design.memories.push_back({a.id, a.name, a.function, a.length});

  design.ir = std::move(prog);
  validate(design);
  return design;
}

void validate(const ScheduledDesign& d) {
  auto fail = [](const std::string& what) { unschedulable(what); };
  if (d.states.empty()) fail("no states");
  if (!d.hasState(d.entryState) || !d.hasState(d.haltState)) fail("entry or halt state out of range");
  if (d.state(d.haltState).kind != TransitionKind::Halt) fail("halt state has the wrong kind");

  std::set<RegId> bound;
  for (const auto& r : d.registers) {
    if (r.id < 0 || r.id >= 65536) fail("register id " + std::to_string(r.id) + " exceeds the trace encoding");
    bound.insert(r.id);
  }
  std::map<MemId, int> memLen;
  for (const auto& m : d.memories) memLen[m.id] = m.length;

  std::map<BlockId, std::pair<StateId, StateId>> blockRange;
  for (size_t i = 0; i < d.states.size(); ++i) {
    const FsmState& st = d.states[i];
    if (st.id != static_cast<StateId>(i)) fail("state ids are not dense");
    auto target = [&](StateId s) {
      if (!d.hasState(s)) fail("state " + std::to_string(st.id) + " has a dangling successor");
    };
    switch (st.kind) {
      case TransitionKind::Jump: target(st.defaultNext); break;
      case TransitionKind::Branch:
        if (!st.branch) fail("branch state without condition");
        target(st.defaultNext);
        target(st.branch->takenNext);
        if (!bound.count(st.branch->cond)) fail("branch on unbound register");
        break;
      case TransitionKind::Call:
        target(st.defaultNext);
        target(st.returnState);
        break;
      case TransitionKind::Return:
        if (st.defaultNext != -1) target(st.defaultNext);
        break;
      case TransitionKind::Halt:
        if (st.id != d.haltState) fail("extra halt state");
        if (!st.activeInstrs.empty()) fail("halt state has active instructions");
        break;
    }
    if (st.blockId >= 0) {
      auto [it, fresh] = blockRange.emplace(st.blockId, std::make_pair(st.id, st.id));
      if (!fresh) {
        if (it->second.second + 1 != st.id) fail("states of a block are not contiguous");
        it->second.second = st.id;
      }
    }
  }

  auto index = indexInstrs(d.ir);
  std::map<StateId, std::map<MemId, int>> portUse;
  std::map<StateId, std::set<RegId>> writers;
  for (const auto& [id, in] : index) {
    auto it = d.scheduleOf.find(id);
    if (it == d.scheduleOf.end()) fail("instruction " + std::to_string(id) + " is not scheduled");
    const Interval iv = it->second;
    if (iv.end - iv.start + 1 != latency(in->op)) fail("instruction " + std::to_string(id) + " has the wrong latency");
    if (!d.hasState(iv.start) || !d.hasState(iv.end)) fail("schedule outside the FSM");
    BlockId b = d.state(iv.start).blockId;
    if (d.state(iv.end).blockId != b) fail("instruction spans two blocks");
    for (StateId s = iv.start; s <= iv.end; ++s) {
      const auto& act = d.state(s).activeInstrs;
      if (!std::binary_search(act.begin(), act.end(), id)) fail("active set disagrees with schedule");
      if (accessesMemory(*in) && ++portUse[s][in->memory] > 1)
        fail("memory port used twice in state " + std::to_string(s));
    }
    if (auto w = ir::writeOf(*in)) {
      if (!bound.count(*w)) fail("write to unbound register");
      for (StateId s = iv.start; s <= iv.end; ++s)
        if (!writers[s].insert(*w).second) fail("two writers of one register share a state");
    }
    for (RegId r : ir::readsOf(*in))
      if (!bound.count(r)) fail("read of unbound register");
    if (accessesMemory(*in) && !memLen.count(in->memory)) fail("access to unbound memory");
  }
  if (d.scheduleOf.size() != index.size()) fail("schedule names unknown instructions");

  // Data dependences inside each block, in program order.
  for (const auto& fn : d.ir.functions)
    for (const auto& b : fn.blocks) {
      std::map<RegId, Interval> lastWrite;
      for (const auto& in : b.instrs) {
        const Interval iv = d.scheduleOf.at(in.id);
        if (in.op != Opcode::Phi)
          for (RegId r : ir::readsOf(in))
            if (auto w = lastWrite.find(r); w != lastWrite.end() && iv.start <= w->second.end)
              fail("instruction " + std::to_string(in.id) + " reads before its producer finishes");
        if (auto w = ir::writeOf(in)) lastWrite[*w] = iv;
      }
    }
}

}  // namespace hlsdbg::sched
