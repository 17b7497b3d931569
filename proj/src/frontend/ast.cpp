// SPDX-License-Identifier: Apache-2.0
#include "frontend/ast.hpp"

#include <algorithm>
#include <sstream>

namespace hlsdbg::frontend {

SourceProgram SourceProgram::fromText(std::string path, std::string_view text) {
  SourceProgram src;
  src.path = std::move(path);
  std::string current;
  for (char c : text) {
    if (c == '\n') {
      if (!current.empty() && current.back() == '\r') current.pop_back();
      src.lines.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) src.lines.push_back(std::move(current));
  return src;
}

std::string SourceProgram::text() const {
  std::string out;
  for (const auto& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

const FunctionDecl* Ast::find(std::string_view name) const {
  auto it = std::find_if(functions.begin(), functions.end(),
                         [&](const FunctionDecl& f) { return f.name == name; });
  return it == functions.end() ? nullptr : &*it;
}

namespace {

template <typename T>
bool sameSeq(const std::vector<T>& a, const std::vector<T>& b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end(),
                    [](const T& x, const T& y) { return sameShape(x, y); });
}

}  // namespace

bool sameShape(const Expr& a, const Expr& b) {
  return a.kind == b.kind && a.value == b.value && a.name == b.name && a.op == b.op &&
         sameSeq(a.args, b.args);
}

bool sameShape(const Stmt& a, const Stmt& b) {
  return a.kind == b.kind && a.name == b.name && a.arrayLength == b.arrayLength &&
         a.hasElse == b.hasElse && sameSeq(a.exprs, b.exprs) && sameSeq(a.body, b.body) &&
         sameSeq(a.elseBody, b.elseBody) && sameSeq(a.init, b.init) && sameSeq(a.step, b.step);
}

bool sameShape(const Ast& a, const Ast& b) {
  return std::equal(a.functions.begin(), a.functions.end(), b.functions.begin(),
                    b.functions.end(), [](const FunctionDecl& x, const FunctionDecl& y) {
                      return x.name == y.name && x.params == y.params && sameSeq(x.body, y.body);
                    });
}

namespace {

int precedence(const std::string& op) {
  if (op == "||") return 1;
  if (op == "&&") return 2;
  if (op == "==" || op == "!=") return 3;
  if (op == "<" || op == "<=" || op == ">" || op == ">=") return 4;
  if (op == "+" || op == "-") return 5;
  return 6;  // * / %
}

void printExpr(std::ostream& os, const Expr& e, int parentPrec) {
  switch (e.kind) {
    case Expr::Kind::Number:
      // INT32_MIN has no literal form; the parser folds -(2147483648) back.
      if (e.value < 0) {
        os << "(-" << -static_cast<int64_t>(e.value) << ")";
      } else {
        os << e.value;
      }
      return;
    case Expr::Kind::Var:
      os << e.name;
      return;
    case Expr::Kind::Index:
      os << e.name << "[";
      printExpr(os, e.args[0], 0);
      os << "]";
      return;
    case Expr::Kind::Call:
      os << e.name << "(";
      for (size_t i = 0; i < e.args.size(); ++i) {
        if (i) os << ", ";
        printExpr(os, e.args[i], 0);
      }
      os << ")";
      return;
    case Expr::Kind::Unary:
      os << "(" << e.op;
      printExpr(os, e.args[0], 7);
      os << ")";
      return;
    case Expr::Kind::Binary: {
      int prec = precedence(e.op);
      bool paren = prec <= parentPrec;
      if (paren) os << "(";
      printExpr(os, e.args[0], prec - 1);
      os << " " << e.op << " ";
      printExpr(os, e.args[1], prec);
      if (paren) os << ")";
      return;
    }
  }
}

void printStmts(std::ostream& os, const std::vector<Stmt>& stmts, int depth);

void printSimple(std::ostream& os, const Stmt& s) {
  switch (s.kind) {
    case Stmt::Kind::VarDecl:
      os << "int " << s.name << " = ";
      printExpr(os, s.exprs[0], 0);
      break;
    case Stmt::Kind::Assign:
      os << s.name << " = ";
      printExpr(os, s.exprs[0], 0);
      break;
    case Stmt::Kind::ArrayAssign:
      os << s.name << "[";
      printExpr(os, s.exprs[0], 0);
      os << "] = ";
      printExpr(os, s.exprs[1], 0);
      break;
    default:
      break;
  }
}

void printStmt(std::ostream& os, const Stmt& s, int depth) {
  std::string pad(static_cast<size_t>(depth) * 2, ' ');
  switch (s.kind) {
    case Stmt::Kind::VarDecl:
    case Stmt::Kind::Assign:
    case Stmt::Kind::ArrayAssign:
      os << pad;
      printSimple(os, s);
      os << ";\n";
      return;
    case Stmt::Kind::ArrayDecl:
      os << pad << "int " << s.name << "[" << s.arrayLength << "];\n";
      return;
    case Stmt::Kind::Return:
      os << pad << "return ";
      printExpr(os, s.exprs[0], 0);
      os << ";\n";
      return;
    case Stmt::Kind::ExprStmt:
      os << pad;
      printExpr(os, s.exprs[0], 0);
      os << ";\n";
      return;
    case Stmt::Kind::Block:
      os << pad << "{\n";
      printStmts(os, s.body, depth + 1);
      os << pad << "}\n";
      return;
    case Stmt::Kind::If:
      os << pad << "if (";
      printExpr(os, s.exprs[0], 0);
      os << ") {\n";
      printStmts(os, s.body, depth + 1);
      if (s.hasElse) {
        os << pad << "} else {\n";
        printStmts(os, s.elseBody, depth + 1);
      }
      os << pad << "}\n";
      return;
    case Stmt::Kind::While:
      os << pad << "while (";
      printExpr(os, s.exprs[0], 0);
      os << ") {\n";
      printStmts(os, s.body, depth + 1);
      os << pad << "}\n";
      return;
    case Stmt::Kind::For:
      os << pad << "for (";
      if (!s.init.empty()) printSimple(os, s.init[0]);
      os << "; ";
      printExpr(os, s.exprs[0], 0);
      os << "; ";
      if (!s.step.empty()) printSimple(os, s.step[0]);
      os << ") {\n";
      printStmts(os, s.body, depth + 1);
      os << pad << "}\n";
      return;
  }
}

void printStmts(std::ostream& os, const std::vector<Stmt>& stmts, int depth) {
  for (const auto& s : stmts) printStmt(os, s, depth);
}

}  // namespace

std::string print(const Ast& ast) {
  std::ostringstream os;
  for (size_t i = 0; i < ast.functions.size(); ++i) {
    const auto& f = ast.functions[i];
    if (i) os << "\n";
    os << "int " << f.name << "(";
    for (size_t p = 0; p < f.params.size(); ++p) {
      if (p) os << ", ";
      os << "int " << f.params[p];
    }
    os << ") {\n";
    printStmts(os, f.body, 1);
    os << "}\n";
  }
  return os.str();
}

}  // namespace hlsdbg::frontend
