// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hlsdbg::frontend {

/// Raw program text, 1-indexed by line.
struct SourceProgram {
  std::string path;
  std::vector<std::string> lines;

  static SourceProgram fromText(std::string path, std::string_view text);
  std::string text() const;
  int lineCount() const { return static_cast<int>(lines.size()); }

  bool operator==(const SourceProgram&) const = default;
};

struct Expr {
  enum class Kind { Number, Var, Index, Call, Unary, Binary };

  Kind kind = Kind::Number;
  int line = 0;
  int32_t value = 0;      // Number
  std::string name;       // Var, Index (array), Call (callee)
  std::string op;         // Unary, Binary
  std::vector<Expr> args; // operands / index / call arguments
};

struct Stmt {
  enum class Kind {
    VarDecl,      // int name = exprs[0];
    ArrayDecl,    // int name[arrayLength];
    Assign,       // name = exprs[0];
    ArrayAssign,  // name[exprs[0]] = exprs[1];
    If,           // if (exprs[0]) body else elseBody
    While,        // while (exprs[0]) body
    For,          // for (init; exprs[0]; step) body
    Return,       // return exprs[0];
    ExprStmt,     // exprs[0];
    Block,        // { body }
  };

  Kind kind = Kind::ExprStmt;
  int line = 0;
  std::string name;
  int arrayLength = 0;
  std::vector<Expr> exprs;
  std::vector<Stmt> body;
  std::vector<Stmt> elseBody;
  bool hasElse = false;
  std::vector<Stmt> init;  // For: zero or one statement
  std::vector<Stmt> step;  // For: zero or one statement
};

struct FunctionDecl {
  std::string name;
  std::vector<std::string> params;
  std::vector<Stmt> body;
  int line = 0;
  int endLine = 0;  // line of the closing brace
};

struct Ast {
  std::vector<FunctionDecl> functions;

  const FunctionDecl* find(std::string_view name) const;
};

/// Structural equality that ignores line numbers.
bool sameShape(const Expr& a, const Expr& b);
bool sameShape(const Stmt& a, const Stmt& b);
bool sameShape(const Ast& a, const Ast& b);

/// Renders the tree back to MiniC, one statement per line.
std::string print(const Ast& ast);

}  // namespace hlsdbg::frontend
