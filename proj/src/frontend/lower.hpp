// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "frontend/ast.hpp"
#include "frontend/ir.hpp"

namespace hlsdbg::frontend {

/// Lowers a checked AST to three-address IR. Every instruction carries the
/// line of the statement it came from; calls stay as call instructions.
///
/// Throws Error with UndefinedVariable, TypeMismatch, SyntaxError
/// (conflicting declarations) or ArrayBoundsStatic.
ir::Program lower(const Ast& ast);

}  // namespace hlsdbg::frontend
