// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <set>
#include <vector>

#include "frontend/ir.hpp"

namespace hlsdbg::ir {

std::map<BlockId, std::vector<BlockId>> predecessors(const Function& fn);

/// Drops blocks unreachable from the entry and prunes their phi inputs.
void removeUnreachable(Function& fn);
/// Drops phi inputs from blocks that are no longer predecessors.
void prunePhiInputs(Function& fn);
/// Removes instruction-free blocks that only jump elsewhere.
void removeEmptyBlocks(Function& fn);
void cleanupCfg(Function& fn);

/// Rewrites every terminator reference to block `from` as `to`.
void retarget(Function& fn, BlockId from, BlockId to);

/// Immediate-dominator tree; roots map to themselves. Blocks unreachable
/// from the roots are absent.
struct DomTree {
  std::map<BlockId, BlockId> idom;
  std::map<BlockId, int> enter;
  std::map<BlockId, int> exit;

  bool dominates(BlockId a, BlockId b) const;
};

DomTree dominatorTree(const Function& fn);
DomTree postDominatorTree(const Function& fn);

/// dom[b] = blocks that dominate b (including b).
std::map<BlockId, std::set<BlockId>> dominators(const Function& fn);
/// pdom[b] = blocks that post-dominate b (including b); exits are Return blocks.
std::map<BlockId, std::set<BlockId>> postDominators(const Function& fn);

}  // namespace hlsdbg::ir
