// SPDX-License-Identifier: Apache-2.0
#include "frontend/cfg.hpp"

#include <algorithm>
#include <iterator>
#include <set>

namespace hlsdbg::ir {

std::map<BlockId, std::vector<BlockId>> predecessors(const Function& fn) {
  std::map<BlockId, std::vector<BlockId>> preds;
  for (const auto& b : fn.blocks) preds[b.id];
  for (const auto& b : fn.blocks)
    for (BlockId s : successors(b.term)) preds[s].push_back(b.id);
  return preds;
}

void removeUnreachable(Function& fn) {
  std::set<BlockId> seen;
  std::vector<BlockId> work{fn.entry};
  while (!work.empty()) {
    BlockId b = work.back();
    work.pop_back();
    if (!seen.insert(b).second) continue;
    if (const Block* blk = fn.block(b))
      for (BlockId s : successors(blk->term)) work.push_back(s);
  }
  std::erase_if(fn.blocks, [&](const Block& b) { return !seen.count(b.id); });
  for (auto& b : fn.blocks) {
    for (auto& in : b.instrs) {
      if (in.op != Opcode::Phi) continue;
      for (size_t i = in.phiBlocks.size(); i-- > 0;) {
        if (!seen.count(in.phiBlocks[i])) {
          in.phiBlocks.erase(in.phiBlocks.begin() + static_cast<std::ptrdiff_t>(i));
          in.args.erase(in.args.begin() + static_cast<std::ptrdiff_t>(i));
        }
      }
    }
  }
}

void prunePhiInputs(Function& fn) {
  auto preds = predecessors(fn);
  for (auto& b : fn.blocks) {
    const auto& live = preds[b.id];
    for (auto& in : b.instrs) {
      if (in.op != Opcode::Phi) continue;
      for (size_t i = in.phiBlocks.size(); i-- > 0;) {
        if (std::find(live.begin(), live.end(), in.phiBlocks[i]) == live.end()) {
          in.phiBlocks.erase(in.phiBlocks.begin() + static_cast<std::ptrdiff_t>(i));
          in.args.erase(in.args.begin() + static_cast<std::ptrdiff_t>(i));
        }
      }
    }
  }
}

void retarget(Function& fn, BlockId from, BlockId to) {
  for (auto& b : fn.blocks) {
    if (b.term.target == from) b.term.target = to;
    if (b.term.elseTarget == from) b.term.elseTarget = to;
  }
  if (fn.entry == from) fn.entry = to;
}

void removeEmptyBlocks(Function& fn) {
  auto preds = predecessors(fn);
  std::map<BlockId, size_t> index;
  for (size_t i = 0; i < fn.blocks.size(); ++i) index[fn.blocks[i].id] = i;
  std::set<BlockId> removed;
  for (bool changed = true; changed;) {
    changed = false;
    for (auto& e : fn.blocks) {
      if (removed.count(e.id)) continue;
      if (!e.instrs.empty() || e.term.kind != TermKind::Jump || e.term.target == e.id) continue;
      BlockId from = e.id;
      BlockId to = e.term.target;
      std::vector<BlockId> fromPreds = preds[from];
      Block& target = fn.blocks[index.at(to)];
      auto& toPreds = preds[to];
      bool hasPhi = std::any_of(target.instrs.begin(), target.instrs.end(),
                                [](const Instr& in) { return in.op == Opcode::Phi; });
      // A phi cannot tell apart two edges from the same block.
      if (hasPhi && (fromPreds.empty() || std::any_of(fromPreds.begin(), fromPreds.end(), [&](BlockId p) {
            return std::find(toPreds.begin(), toPreds.end(), p) != toPreds.end();
          })))
        continue;
      // Phi inputs that named the removed block now name each of its predecessors.
      for (auto& in : target.instrs) {
        if (in.op != Opcode::Phi) continue;
        std::vector<Operand> args;
        std::vector<BlockId> blocks;
        for (size_t k = 0; k < in.phiBlocks.size(); ++k) {
          if (in.phiBlocks[k] != from) {
            args.push_back(in.args[k]);
            blocks.push_back(in.phiBlocks[k]);
            continue;
          }
          for (BlockId p : fromPreds) {
            args.push_back(in.args[k]);
            blocks.push_back(p);
          }
        }
        in.args = std::move(args);
        in.phiBlocks = std::move(blocks);
      }
      for (BlockId p : fromPreds) {
        Block& pb = fn.blocks[index.at(p)];
        if (pb.term.target == from) pb.term.target = to;
        if (pb.term.elseTarget == from) pb.term.elseTarget = to;
      }
      if (fn.entry == from) fn.entry = to;
      std::erase(toPreds, from);
      for (BlockId p : fromPreds)
        if (std::find(toPreds.begin(), toPreds.end(), p) == toPreds.end()) toPreds.push_back(p);
      preds.erase(from);
      removed.insert(from);
      changed = true;
    }
  }
  std::erase_if(fn.blocks, [&](const Block& b) { return removed.count(b.id) > 0; });
}

void cleanupCfg(Function& fn) {
  removeUnreachable(fn);
  prunePhiInputs(fn);
  removeEmptyBlocks(fn);
  removeUnreachable(fn);
}

}  // namespace hlsdbg::ir

namespace hlsdbg::ir {

namespace {

constexpr BlockId kVirtualRoot = -1;

// Cooper, Harvey and Kennedy's iterative algorithm over reverse postorder. A
// virtual root joins multiple roots into one tree.
DomTree solveDominance(const std::set<BlockId>& roots,
                       const std::map<BlockId, std::vector<BlockId>>& forward,
                       const std::map<BlockId, std::vector<BlockId>>& backward) {
  std::vector<BlockId> postorder;
  std::set<BlockId> seen{kVirtualRoot};
  std::vector<std::pair<BlockId, size_t>> stack{{kVirtualRoot, 0}};
  std::vector<BlockId> rootList(roots.begin(), roots.end());
  auto next = [&](BlockId n) -> const std::vector<BlockId>& {
    static const std::vector<BlockId> none;
    if (n == kVirtualRoot) return rootList;
    auto it = forward.find(n);
    return it == forward.end() ? none : it->second;
  };
  while (!stack.empty()) {
    auto& [n, k] = stack.back();
    const auto& succ = next(n);
    if (k < succ.size()) {
      BlockId s = succ[k++];
      if (seen.insert(s).second) stack.emplace_back(s, 0);
    } else {
      postorder.push_back(n);
      stack.pop_back();
    }
  }
  std::map<BlockId, int> order;
  for (size_t i = 0; i < postorder.size(); ++i) order[postorder[i]] = static_cast<int>(i);

  DomTree tree;
  auto& idom = tree.idom;
  idom[kVirtualRoot] = kVirtualRoot;
  auto intersect = [&](BlockId a, BlockId b) {
    while (a != b) {
      while (order[a] < order[b]) a = idom[a];
      while (order[b] < order[a]) b = idom[b];
    }
    return a;
  };
  for (bool changed = true; changed;) {
    changed = false;
    for (auto it = postorder.rbegin(); it != postorder.rend(); ++it) {
      BlockId n = *it;
      if (n == kVirtualRoot) continue;
      BlockId best = kVirtualRoot - 1;  // unset
      auto consider = [&](BlockId p) {
        if (!idom.count(p)) return;
        best = best == kVirtualRoot - 1 ? p : intersect(p, best);
      };
      if (roots.count(n)) consider(kVirtualRoot);
      if (auto bw = backward.find(n); bw != backward.end())
        for (BlockId p : bw->second)
          if (order.count(p)) consider(p);
      if (best != kVirtualRoot - 1 && (!idom.count(n) || idom[n] != best)) {
        idom[n] = best;
        changed = true;
      }
    }
  }

  // Pre/post numbering of the tree answers dominance queries in O(1).
  std::map<BlockId, std::vector<BlockId>> children;
  for (auto [n, d] : idom)
    if (n != kVirtualRoot) children[d].push_back(n);
  int clock = 0;
  std::vector<std::pair<BlockId, size_t>> walk{{kVirtualRoot, 0}};
  tree.enter[kVirtualRoot] = clock++;
  while (!walk.empty()) {
    auto& [n, k] = walk.back();
    auto& kids = children[n];
    if (k < kids.size()) {
      BlockId c = kids[k++];
      tree.enter[c] = clock++;
      walk.emplace_back(c, 0);
    } else {
      tree.exit[n] = clock++;
      walk.pop_back();
    }
  }
  tree.idom.erase(kVirtualRoot);
  for (auto& [n, d] : tree.idom)
    if (d == kVirtualRoot) d = n;
  return tree;
}

std::map<BlockId, std::set<BlockId>> expand(const Function& fn, const DomTree& tree) {
  std::map<BlockId, std::set<BlockId>> out;
  for (const auto& b : fn.blocks) {
    auto& set = out[b.id];
    set.insert(b.id);
    if (!tree.idom.count(b.id)) continue;
    for (BlockId n = b.id; tree.idom.at(n) != n; n = tree.idom.at(n)) set.insert(tree.idom.at(n));
  }
  return out;
}

}  // namespace

bool DomTree::dominates(BlockId a, BlockId b) const {
  if (a == b) return true;
  auto ea = enter.find(a);
  auto eb = enter.find(b);
  if (ea == enter.end() || eb == enter.end()) return false;
  return ea->second <= eb->second && exit.at(b) <= exit.at(a);
}

DomTree dominatorTree(const Function& fn) {
  std::map<BlockId, std::vector<BlockId>> succs;
  for (const auto& b : fn.blocks) succs[b.id] = successors(b.term);
  return solveDominance({fn.entry}, succs, predecessors(fn));
}

DomTree postDominatorTree(const Function& fn) {
  std::set<BlockId> exits;
  std::map<BlockId, std::vector<BlockId>> succs;
  for (const auto& b : fn.blocks) {
    if (b.term.kind == TermKind::Return) exits.insert(b.id);
    succs[b.id] = successors(b.term);
  }
  return solveDominance(exits, predecessors(fn), succs);
}

std::map<BlockId, std::set<BlockId>> dominators(const Function& fn) {
  return expand(fn, dominatorTree(fn));
}

std::map<BlockId, std::set<BlockId>> postDominators(const Function& fn) {
  return expand(fn, postDominatorTree(fn));
}

}  // namespace hlsdbg::ir
