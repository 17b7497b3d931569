// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "frontend/ast.hpp"

namespace hlsdbg::frontend {

/// Parses MiniC and checks the call graph.
///
/// Throws Error with SyntaxError, EmptyProgram, NoMainFunction or
/// RecursionUnsupported.
Ast parse(const SourceProgram& source);

}  // namespace hlsdbg::frontend
