// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string_view>

#include "frontend/ir.hpp"

namespace hlsdbg::frontend {

enum class OptLevel { O0, O2 };

std::string_view optLevelName(OptLevel level) noexcept;
OptLevel optLevelFromName(std::string_view name);

/// O0 returns the program unchanged. O2 runs inline -> fold -> merge ->
/// unroll -> fold.
ir::Program optimize(ir::Program prog, OptLevel level);

namespace passes {

/// Inlines every call; leaves only `main` behind.
void inlineCalls(ir::Program& prog);
/// Folds immediate-only arithmetic, propagates constant temporaries, folds
/// constant branches and deletes dead pure instructions, to a fixpoint.
void foldConstants(ir::Program& prog);
/// Merges a block into its only predecessor when that predecessor jumps to it.
void mergeBlocks(ir::Program& prog);
/// Fully unrolls innermost counted loops with at most `maxTrips` iterations.
void unrollLoops(ir::Program& prog, int maxTrips = 64, size_t sizeBudget = 4096);

}  // namespace passes

}  // namespace hlsdbg::frontend
