// SPDX-License-Identifier: Apache-2.0
#include "frontend/optimize.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "common/error.hpp"
#include "frontend/cfg.hpp"

namespace hlsdbg::frontend {

using ir::Opcode;
using ir::Operand;

std::string_view optLevelName(OptLevel level) noexcept {
  return level == OptLevel::O0 ? "O0" : "O2";
}

OptLevel optLevelFromName(std::string_view name) {
  if (name == "O0" || name == "-O0" || name == "0") return OptLevel::O0;
  if (name == "O2" || name == "-O2" || name == "2") return OptLevel::O2;
  throw Error(ErrorCode::InvalidParams, "unknown optimization level '" + std::string(name) + "'");
}

namespace passes {

namespace {

void renameUses(ir::Instr& in, const std::map<RegId, RegId>& renames) {
  for (auto& a : in.args) {
    if (!a.isReg()) continue;
    auto it = renames.find(a.value);
    if (it != renames.end()) a.value = it->second;
  }
  if (in.result) {
    auto it = renames.find(*in.result);
    if (it != renames.end()) in.result = it->second;
  }
}

bool isTemp(const ir::Program& prog, const Operand& o) {
  return o.isReg() && prog.registers[static_cast<size_t>(o.value)].kind == ir::RegKind::Temp;
}

bool isTempReg(const ir::Program& prog, RegId r) {
  return prog.registers[static_cast<size_t>(r)].kind == ir::RegKind::Temp;
}

// Clones `blocks` with fresh block ids, instruction ids and temporaries.
// Targets outside the cloned set are left as-is.
struct CloneResult {
  std::vector<ir::Block> blocks;
  std::map<BlockId, BlockId> blockMap;
};

CloneResult cloneBlocks(ir::Program& prog, const std::vector<ir::Block>& blocks,
                        std::string_view ownerFn) {
  CloneResult out;
  std::map<RegId, RegId> temps;
  for (const auto& b : blocks) out.blockMap[b.id] = prog.nextBlockId++;
  for (const auto& b : blocks)
    for (const auto& in : b.instrs)
      if (in.result && isTempReg(prog, *in.result) && !temps.count(*in.result))
        temps[*in.result] = prog.newTemp(ownerFn);
  auto mapBlock = [&](BlockId id) {
    auto it = out.blockMap.find(id);
    return it == out.blockMap.end() ? id : it->second;
  };
  for (const auto& b : blocks) {
    ir::Block nb = b;
    nb.id = out.blockMap[b.id];
    for (auto& in : nb.instrs) {
      in.id = prog.nextInstrId++;
      renameUses(in, temps);
      for (auto& pb : in.phiBlocks) pb = mapBlock(pb);
    }
    if (nb.term.cond.isReg()) {
      auto it = temps.find(nb.term.cond.value);
      if (it != temps.end()) nb.term.cond.value = it->second;
    }
    if (nb.term.target >= 0) nb.term.target = mapBlock(nb.term.target);
    if (nb.term.elseTarget >= 0) nb.term.elseTarget = mapBlock(nb.term.elseTarget);
    out.blocks.push_back(std::move(nb));
  }
  return out;
}

void renamePhiPred(ir::Function& fn, BlockId inBlock, BlockId from, BlockId to) {
  ir::Block* b = fn.block(inBlock);
  if (!b) return;
  for (auto& in : b->instrs)
    if (in.op == Opcode::Phi)
      for (auto& pb : in.phiBlocks)
        if (pb == from) pb = to;
}

size_t blockIndex(const ir::Function& fn, BlockId id) {
  for (size_t i = 0; i < fn.blocks.size(); ++i)
    if (fn.blocks[i].id == id) return i;
  throw Error(ErrorCode::Internal, "unknown block");
}

bool hasCalls(const ir::Function& fn) {
  for (const auto& b : fn.blocks)
    for (const auto& in : b.instrs)
      if (in.op == Opcode::Call) return true;
  return false;
}

// Returns true when a call was inlined.
bool inlineOne(ir::Program& prog, ir::Function& fn) {
  for (size_t bi = 0; bi < fn.blocks.size(); ++bi) {
    for (size_t k = 0; k < fn.blocks[bi].instrs.size(); ++k) {
      const ir::Instr call = fn.blocks[bi].instrs[k];
      if (call.op != Opcode::Call) continue;
      const ir::Function* callee = prog.function(call.callee);
      if (hasCalls(*callee)) continue;  // inline leaves first

      ir::Block& x = fn.blocks[bi];
      ir::Block tail;
      tail.id = prog.nextBlockId++;
      tail.instrs.assign(x.instrs.begin() + static_cast<std::ptrdiff_t>(k) + 1, x.instrs.end());
      tail.term = x.term;
      x.instrs.resize(k);
      for (BlockId s : ir::successors(tail.term)) renamePhiPred(fn, s, x.id, tail.id);

      for (size_t p = 0; p < call.args.size(); ++p) {
        ir::Instr bind;
        bind.id = prog.nextInstrId++;
        bind.origin = call.origin;
        bind.op = call.args[p].isImm() ? Opcode::Const : Opcode::Move;
        bind.result = callee->params[p];
        bind.args = {call.args[p]};
        bind.line = call.line;
        bind.stmt = call.stmt;
        x.instrs.push_back(std::move(bind));
      }

      CloneResult body = cloneBlocks(prog, callee->blocks, fn.name);
      for (auto& b : body.blocks) {
        for (auto& in : b.instrs) in.stmt = call.stmt;
        if (b.term.kind == ir::TermKind::Return)
          b.term = {ir::TermKind::Jump, {}, tail.id, -1, b.term.line};
      }
      x.term = {ir::TermKind::Jump, {}, body.blockMap.at(callee->entry), -1, call.line};

      auto pos = fn.blocks.begin() + static_cast<std::ptrdiff_t>(bi) + 1;
      pos = fn.blocks.insert(pos, body.blocks.begin(), body.blocks.end());
      fn.blocks.insert(pos + static_cast<std::ptrdiff_t>(body.blocks.size()), std::move(tail));
      return true;
    }
  }
  return false;
}

// Every register read anywhere in the function, terminators included.
std::set<RegId> usedRegisters(const ir::Function& fn) {
  std::set<RegId> used;
  for (const auto& b : fn.blocks) {
    for (const auto& in : b.instrs)
      for (const auto& a : in.args)
        if (a.isReg()) used.insert(a.value);
    if (b.term.kind == ir::TermKind::Branch && b.term.cond.isReg())
      used.insert(b.term.cond.value);
  }
  return used;
}

bool foldFunction(ir::Program& prog, ir::Function& fn) {
  bool changed = false;
  // Immediate-only instructions become constants.
  for (auto& b : fn.blocks) {
    for (auto& in : b.instrs) {
      if (!in.result) continue;
      bool allImm = std::all_of(in.args.begin(), in.args.end(),
                                [](const Operand& o) { return o.isImm(); });
      if (in.op == Opcode::Const || in.op == Opcode::Load) continue;
      if (in.op == Opcode::Phi) {
        bool same = !in.args.empty() && std::all_of(in.args.begin(), in.args.end(),
                                                     [&](const Operand& o) { return o == in.args[0]; });
        if (same) {
          in.op = in.args[0].isImm() ? Opcode::Const : Opcode::Move;
          in.args = {in.args[0]};
          in.phiBlocks.clear();
          changed = true;
        }
        continue;
      }
      if (!allImm) continue;
      if ((in.op == Opcode::Div || in.op == Opcode::Mod) && in.args[1].value == 0) continue;
      int32_t v = ir::evalArith(in.op, in.args[0].value, in.args.size() > 1 ? in.args[1].value : 0);
      in.op = Opcode::Const;
      in.args = {Operand::imm(v)};
      changed = true;
    }
  }
  // Constant temporaries are propagated into their uses.
  std::map<RegId, int32_t> constTemps;
  for (const auto& b : fn.blocks)
    for (const auto& in : b.instrs)
      if (in.op == Opcode::Const && in.result && isTempReg(prog, *in.result))
        constTemps[*in.result] = in.args[0].value;
  if (!constTemps.empty()) {
    for (auto& b : fn.blocks) {
      for (auto& in : b.instrs) {
        for (auto& a : in.args) {
          if (!a.isReg()) continue;
          auto it = constTemps.find(a.value);
          if (it != constTemps.end()) {
            a = Operand::imm(it->second);
            changed = true;
          }
        }
      }
      if (b.term.kind == ir::TermKind::Branch && b.term.cond.isReg()) {
        auto it = constTemps.find(b.term.cond.value);
        if (it != constTemps.end()) {
          b.term.cond = Operand::imm(it->second);
          changed = true;
        }
      }
    }
  }
  // Constant branches become jumps.
  bool cfgChanged = false;
  for (auto& b : fn.blocks) {
    if (b.term.kind == ir::TermKind::Branch && b.term.cond.isImm()) {
      BlockId t = b.term.cond.value != 0 ? b.term.target : b.term.elseTarget;
      b.term = {ir::TermKind::Jump, {}, t, -1, b.term.line};
      cfgChanged = true;
    }
  }
  // Dead pure instructions writing temporaries are removed.
  for (bool removed = true; removed;) {
    removed = false;
    auto used = usedRegisters(fn);
    for (auto& b : fn.blocks) {
      auto dead = [&](const ir::Instr& in) {
        if (!in.result || !isTempReg(prog, *in.result) || used.count(*in.result)) return false;
        if (ir::isPure(in.op)) return true;
        return (in.op == Opcode::Div || in.op == Opcode::Mod) && in.args[1].isImm() &&
               in.args[1].value != 0;
      };
      auto before = b.instrs.size();
      std::erase_if(b.instrs, dead);
      if (b.instrs.size() != before) removed = changed = true;
    }
  }
  if (cfgChanged) {
    ir::cleanupCfg(fn);
    changed = true;
  } else {
    ir::removeEmptyBlocks(fn);
  }
  return changed;
}

void mergeFunction(ir::Function& fn) {
  auto preds = ir::predecessors(fn);
  std::map<BlockId, size_t> index;
  for (size_t i = 0; i < fn.blocks.size(); ++i) index[fn.blocks[i].id] = i;
  std::set<BlockId> removed;
  for (auto& a : fn.blocks) {
    if (removed.count(a.id)) continue;
    while (a.term.kind == ir::TermKind::Jump) {
      BlockId bid = a.term.target;
      if (bid == a.id || bid == fn.entry || preds[bid].size() != 1) break;
      ir::Block& b = fn.blocks[index.at(bid)];
      for (auto& in : b.instrs) {
        if (in.op != Opcode::Phi) continue;
        in.op = in.args[0].isImm() ? Opcode::Const : Opcode::Move;
        in.args.resize(1);
        in.phiBlocks.clear();
      }
      a.instrs.insert(a.instrs.end(), b.instrs.begin(), b.instrs.end());
      a.term = b.term;
      for (BlockId s : ir::successors(b.term)) {
        renamePhiPred(fn, s, bid, a.id);
        std::replace(preds[s].begin(), preds[s].end(), bid, a.id);
      }
      removed.insert(bid);
    }
  }
  std::erase_if(fn.blocks, [&](const ir::Block& blk) { return removed.count(blk.id) > 0; });
}

struct LoopShape {
  BlockId header = -1;
  BlockId latch = -1;
  std::set<BlockId> blocks;
};

std::vector<LoopShape> findLoops(const ir::Function& fn,
                                 std::map<BlockId, std::vector<BlockId>>& preds) {
  auto dom = ir::dominatorTree(fn);
  std::map<BlockId, LoopShape> byHeader;
  for (const auto& b : fn.blocks) {
    for (BlockId s : ir::successors(b.term)) {
      if (!dom.dominates(s, b.id)) continue;  // not a back edge
      LoopShape& loop = byHeader[s];
      loop.header = s;
      loop.latch = loop.latch == -1 ? b.id : -2;  // -2 marks multiple latches
      loop.blocks.insert(s);
      std::vector<BlockId> work{b.id};
      while (!work.empty()) {
        BlockId n = work.back();
        work.pop_back();
        if (!loop.blocks.insert(n).second) continue;
        for (BlockId p : preds[n]) work.push_back(p);
      }
    }
  }
  std::vector<LoopShape> loops;
  for (auto& [h, l] : byHeader) loops.push_back(std::move(l));
  // Innermost first: fewer blocks cannot contain more.
  std::sort(loops.begin(), loops.end(),
            [](const LoopShape& a, const LoopShape& b) { return a.blocks.size() < b.blocks.size(); });
  return loops;
}

bool unrollLoop(ir::Program& prog, ir::Function& fn, const LoopShape& loop,
                std::map<BlockId, std::vector<BlockId>>& preds, int maxTrips, size_t sizeBudget) {
  if (loop.latch < 0) return false;
  const ir::Block& header = *fn.block(loop.header);
  if (header.instrs.size() != 1 || header.term.kind != ir::TermKind::Branch) return false;
  const ir::Instr& cmp = header.instrs[0];
  if (!ir::isCompare(cmp.op) || !header.term.cond.isReg() ||
      header.term.cond.value != *cmp.result)
    return false;
  bool ivLeft = cmp.args[0].isReg() && cmp.args[1].isImm();
  bool ivRight = cmp.args[1].isReg() && cmp.args[0].isImm();
  if (!ivLeft && !ivRight) return false;
  RegId iv = ivLeft ? cmp.args[0].value : cmp.args[1].value;
  if (prog.registers[static_cast<size_t>(iv)].kind != ir::RegKind::Variable) return false;
  int32_t bound = ivLeft ? cmp.args[1].value : cmp.args[0].value;

  bool takenInside = loop.blocks.count(header.term.target) > 0;
  bool elseInside = loop.blocks.count(header.term.elseTarget) > 0;
  if (takenInside == elseInside) return false;
  BlockId bodyEntry = takenInside ? header.term.target : header.term.elseTarget;
  BlockId exit = takenInside ? header.term.elseTarget : header.term.target;

  std::vector<BlockId> outsidePreds;
  for (BlockId p : preds[loop.header])
    if (!loop.blocks.count(p)) outsidePreds.push_back(p);
  if (outsidePreds.size() != 1) return false;
  ir::Block& pre = *fn.block(outsidePreds[0]);
  if (pre.term.kind != ir::TermKind::Jump) return false;

  for (const auto& in : fn.block(exit)->instrs)
    if (in.op == Opcode::Phi) return false;
  for (BlockId id : loop.blocks)
    for (const auto& in : fn.block(id)->instrs)
      if (in.op == Opcode::Phi &&
          std::find(in.phiBlocks.begin(), in.phiBlocks.end(), loop.header) != in.phiBlocks.end())
        return false;

  // The induction variable: one constant initialisation right before the loop,
  // one `iv = iv op imm` in the latch, and no other references anywhere.
  int initIndex = -1;
  for (int i = static_cast<int>(pre.instrs.size()) - 1; i >= 0; --i) {
    const auto& in = pre.instrs[static_cast<size_t>(i)];
    if (in.result == iv) {
      if (in.op == Opcode::Const) initIndex = i;
      break;
    }
  }
  if (initIndex < 0) return false;
  const ir::Block& latch = *fn.block(loop.latch);
  int updateMove = -1;
  int updateArith = -1;
  for (size_t i = 0; i < latch.instrs.size(); ++i)
    if (latch.instrs[i].result == iv) updateMove = static_cast<int>(i);
  if (updateMove < 0) return false;
  const auto& mv = latch.instrs[static_cast<size_t>(updateMove)];
  if (mv.op != Opcode::Move || !isTemp(prog, mv.args[0])) return false;
  RegId stepTemp = mv.args[0].value;
  for (int i = 0; i < updateMove; ++i)
    if (latch.instrs[static_cast<size_t>(i)].result == stepTemp) updateArith = i;
  if (updateArith < 0) return false;
  const auto& ar = latch.instrs[static_cast<size_t>(updateArith)];
  if (ar.op != Opcode::Add && ar.op != Opcode::Sub && ar.op != Opcode::Mul) return false;
  bool stepIvLeft = ar.args[0] == Operand::reg(iv) && ar.args[1].isImm();
  bool stepIvRight = ar.op != Opcode::Sub && ar.args[1] == Operand::reg(iv) && ar.args[0].isImm();
  if (!stepIvLeft && !stepIvRight) return false;
  int32_t stepImm = stepIvLeft ? ar.args[1].value : ar.args[0].value;

  size_t loopSize = 0;
  for (const auto& b : fn.blocks) {
    bool inLoop = loop.blocks.count(b.id) > 0;
    if (inLoop) loopSize += b.instrs.size();
    for (size_t i = 0; i < b.instrs.size(); ++i) {
      const auto& in = b.instrs[i];
      bool writesIv = in.result == iv;
      bool readsIv = std::any_of(in.args.begin(), in.args.end(),
                                 [&](const Operand& o) { return o == Operand::reg(iv); });
      bool readsStep = std::any_of(in.args.begin(), in.args.end(),
                                   [&](const Operand& o) { return o == Operand::reg(stepTemp); });
      if (readsStep && !(b.id == loop.latch && static_cast<int>(i) == updateMove)) return false;
      if (!writesIv && !readsIv) continue;
      if (b.id == pre.id && static_cast<int>(i) == initIndex) continue;
      if (!inLoop) return false;
      if (writesIv && !(b.id == loop.latch && static_cast<int>(i) == updateMove)) return false;
    }
    if (b.term.kind == ir::TermKind::Branch && b.term.cond == Operand::reg(iv)) return false;
  }

  // Trip count by direct simulation.
  int32_t v = pre.instrs[static_cast<size_t>(initIndex)].args[0].value;
  std::vector<int32_t> values{v};
  auto continues = [&](int32_t x) {
    int32_t c = ivLeft ? ir::evalArith(cmp.op, x, bound) : ir::evalArith(cmp.op, bound, x);
    return (c != 0) == takenInside;
  };
  int trips = 0;
  while (continues(v)) {
    if (++trips > maxTrips) return false;
    v = ir::evalArith(ar.op, v, stepImm);
    values.push_back(v);
  }
  if (static_cast<size_t>(trips) * loopSize > sizeBudget) return false;

  // Body region (everything in the loop except the header), in layout order.
  std::vector<ir::Block> body;
  for (const auto& b : fn.blocks)
    if (loop.blocks.count(b.id) && b.id != loop.header) body.push_back(b);
  size_t headerPos = blockIndex(fn, loop.header);

  std::vector<ir::Block> unrolled;
  std::vector<BlockId> copyEntries;
  std::vector<std::pair<size_t, size_t>> latchJumps;  // (block index, copy)
  for (int k = 0; k < trips; ++k) {
    CloneResult copy = cloneBlocks(prog, body, fn.name);
    BlockId latchCopy = copy.blockMap.at(loop.latch);
    for (auto& b : copy.blocks) {
      bool isLatch = b.id == latchCopy;
      std::vector<ir::Instr> kept;
      for (size_t i = 0; i < b.instrs.size(); ++i) {
        ir::Instr in = b.instrs[i];
        if (isLatch && (static_cast<int>(i) == updateMove || static_cast<int>(i) == updateArith))
          continue;
        int32_t ivValue = (isLatch && static_cast<int>(i) > updateMove)
                              ? values[static_cast<size_t>(k) + 1]
                              : values[static_cast<size_t>(k)];
        for (auto& a : in.args)
          if (a == Operand::reg(iv)) a = Operand::imm(ivValue);
        kept.push_back(std::move(in));
      }
      b.instrs = std::move(kept);
      if (isLatch) latchJumps.emplace_back(unrolled.size(), static_cast<size_t>(k));
      unrolled.push_back(std::move(b));
    }
    copyEntries.push_back(copy.blockMap.at(bodyEntry));
  }
  for (auto [idx, k] : latchJumps) {
    ir::Block& b = unrolled[idx];
    BlockId next = k + 1 < copyEntries.size() ? copyEntries[k + 1] : exit;
    if (b.term.target == loop.header) b.term.target = next;
    if (b.term.elseTarget == loop.header) b.term.elseTarget = next;
  }

  pre.instrs.erase(pre.instrs.begin() + initIndex);
  BlockId preId = pre.id;
  fn.block(preId)->term.target = copyEntries.empty() ? exit : copyEntries.front();
  std::vector<ir::Block> rebuilt;
  for (size_t i = 0; i < fn.blocks.size(); ++i) {
    if (i == headerPos) rebuilt.insert(rebuilt.end(), unrolled.begin(), unrolled.end());
    if (!loop.blocks.count(fn.blocks[i].id)) rebuilt.push_back(std::move(fn.blocks[i]));
  }
  fn.blocks = std::move(rebuilt);
  ir::cleanupCfg(fn);
  return true;
}

}  // namespace

void inlineCalls(ir::Program& prog) {
  for (bool changed = true; changed;) {
    changed = false;
    for (auto& fn : prog.functions) {
      while (inlineOne(prog, fn)) changed = true;
    }
  }
  for (auto& f : prog.functions) {
    if (f.name == "main") continue;
    f.blocks.clear();
    f.entry = -1;
    prog.inlined.push_back(std::move(f));
  }
  std::erase_if(prog.functions, [](const ir::Function& f) { return f.name != "main"; });
}

void foldConstants(ir::Program& prog) {
  for (auto& fn : prog.functions)
    while (foldFunction(prog, fn)) {
    }
}

void mergeBlocks(ir::Program& prog) {
  for (auto& fn : prog.functions) mergeFunction(fn);
}

void unrollLoops(ir::Program& prog, int maxTrips, size_t sizeBudget) {
  for (auto& fn : prog.functions) {
    std::set<BlockId> rejected;
    for (bool changed = true; changed;) {
      changed = false;
      auto preds = ir::predecessors(fn);
      auto loops = findLoops(fn, preds);
      for (const auto& loop : loops) {
        if (rejected.count(loop.header)) continue;
        bool innermost = std::none_of(loops.begin(), loops.end(), [&](const auto& other) {
          return other.header != loop.header && loop.blocks.count(other.header);
        });
        if (!innermost) continue;
        if (unrollLoop(prog, fn, loop, preds, maxTrips, sizeBudget)) {
          changed = true;
          break;
        }
        rejected.insert(loop.header);
      }
    }
  }
}

}  // namespace passes

ir::Program optimize(ir::Program prog, OptLevel level) {
  if (level == OptLevel::O0) return prog;
  passes::inlineCalls(prog);
  passes::foldConstants(prog);
  passes::mergeBlocks(prog);
  passes::unrollLoops(prog);
  passes::foldConstants(prog);
  return prog;
}

}  // namespace hlsdbg::frontend
