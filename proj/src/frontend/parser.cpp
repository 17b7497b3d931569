// SPDX-License-Identifier: Apache-2.0
#include "frontend/parser.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <set>

#include "common/error.hpp"

namespace hlsdbg::frontend {

namespace {

enum class Tok { Ident, Number, Punct, Keyword, End };

struct Token {
  Tok kind;
  std::string text;
  int line;
  uint32_t number = 0;
};

const std::set<std::string, std::less<>> kKeywords = {"int", "if", "else", "while", "for",
                                                      "return"};

std::vector<Token> lex(const SourceProgram& source) {
  std::vector<Token> out;
  bool inBlockComment = false;
  for (int ln = 1; ln <= source.lineCount(); ++ln) {
    const std::string& s = source.lines[static_cast<size_t>(ln - 1)];
    size_t i = 0;
    while (i < s.size()) {
      if (inBlockComment) {
        size_t end = s.find("*/", i);
        if (end == std::string::npos) {
          i = s.size();
        } else {
          inBlockComment = false;
          i = end + 2;
        }
        continue;
      }
      unsigned char c = static_cast<unsigned char>(s[i]);
      if (std::isspace(c)) {
        ++i;
      } else if (s.compare(i, 2, "//") == 0) {
        break;
      } else if (s.compare(i, 2, "/*") == 0) {
        inBlockComment = true;
        i += 2;
      } else if (std::isalpha(c) || c == '_') {
        size_t j = i;
        while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
        std::string word = s.substr(i, j - i);
        out.push_back({kKeywords.count(word) ? Tok::Keyword : Tok::Ident, word, ln});
        i = j;
      } else if (std::isdigit(c)) {
        size_t j = i;
        uint64_t v = 0;
        while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) {
          v = v * 10 + static_cast<uint64_t>(s[j] - '0');
          if (v > 0xFFFFFFFFull) throw Error(ErrorCode::SyntaxError, "integer literal too large", ln);
          ++j;
        }
        if (j < s.size() && (std::isalpha(static_cast<unsigned char>(s[j])) || s[j] == '_'))
          throw Error(ErrorCode::SyntaxError, "malformed number", ln);
        out.push_back({Tok::Number, s.substr(i, j - i), ln, static_cast<uint32_t>(v)});
        i = j;
      } else {
        static const char* two[] = {"<=", ">=", "==", "!=", "&&", "||"};
        bool matched = false;
        for (const char* t : two) {
          if (s.compare(i, 2, t) == 0) {
            out.push_back({Tok::Punct, t, ln});
            i += 2;
            matched = true;
            break;
          }
        }
        if (matched) continue;
        if (std::string_view("+-*/%<>=!(){}[];,").find(static_cast<char>(c)) ==
            std::string_view::npos) {
          throw Error(ErrorCode::SyntaxError,
                      std::string("unexpected character '") + static_cast<char>(c) + "'", ln);
        }
        out.push_back({Tok::Punct, std::string(1, static_cast<char>(c)), ln});
        ++i;
      }
    }
  }
  if (inBlockComment)
    throw Error(ErrorCode::SyntaxError, "unterminated comment", source.lineCount());
  int lastLine = out.empty() ? 1 : out.back().line;
  out.push_back({Tok::End, "<eof>", lastLine});
  return out;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Ast program() {
    Ast ast;
    while (peek().kind != Tok::End) ast.functions.push_back(function());
    return ast;
  }

 private:
  const Token& peek(size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  bool is(std::string_view text, size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return (t.kind == Tok::Punct || t.kind == Tok::Keyword) && t.text == text;
  }
  const Token& advance() { return toks_[std::min(pos_++, toks_.size() - 1)]; }

  [[noreturn]] void fail(const std::string& what) const {
    const Token& t = peek();
    throw Error(ErrorCode::SyntaxError, "expected " + what + " before '" + t.text + "'", t.line);
  }

  const Token& expect(std::string_view text) {
    if (!is(text)) fail("'" + std::string(text) + "'");
    return advance();
  }

  std::string ident() {
    if (peek().kind != Tok::Ident) fail("identifier");
    return advance().text;
  }

  FunctionDecl function() {
    FunctionDecl f;
    f.line = expect("int").line;
    f.name = ident();
    expect("(");
    if (!is(")")) {
      expect("int");
      f.params.push_back(ident());
      while (is(",")) {
        advance();
        expect("int");
        f.params.push_back(ident());
      }
    }
    expect(")");
    f.body = block(&f.endLine);
    return f;
  }

  std::vector<Stmt> block(int* endLine = nullptr) {
    expect("{");
    std::vector<Stmt> out;
    while (!is("}")) {
      if (peek().kind == Tok::End) fail("'}'");
      out.push_back(statement());
    }
    const Token& close = advance();
    if (endLine) *endLine = close.line;
    return out;
  }

  std::vector<Stmt> body() {
    if (is("{")) return block();
    std::vector<Stmt> out;
    out.push_back(statement());
    return out;
  }

  // Declarations, assignments and element stores: the forms allowed in a
  // for-header as well as in statement position.
  Stmt simple(bool allowDecl) {
    Stmt s;
    s.line = peek().line;
    if (is("int")) {
      if (!allowDecl) fail("assignment");
      advance();
      s.name = ident();
      if (is("[")) {
        advance();
        if (peek().kind != Tok::Number) fail("array length");
        uint32_t len = advance().number;
        if (len == 0 || len > 65535)
          throw Error(ErrorCode::SyntaxError, "array length must be 1..65535", s.line);
        s.kind = Stmt::Kind::ArrayDecl;
        s.arrayLength = static_cast<int>(len);
        expect("]");
        return s;
      }
      s.kind = Stmt::Kind::VarDecl;
      expect("=");
      s.exprs.push_back(expr());
      return s;
    }
    if (peek().kind == Tok::Ident && is("=", 1)) {
      s.kind = Stmt::Kind::Assign;
      s.name = ident();
      advance();
      s.exprs.push_back(expr());
      return s;
    }
    if (peek().kind == Tok::Ident && is("[", 1)) {
      // Either an element store or an expression statement starting with a load.
      size_t save = pos_;
      std::string name = ident();
      advance();
      Expr index = expr();
      expect("]");
      if (is("=")) {
        advance();
        s.kind = Stmt::Kind::ArrayAssign;
        s.name = name;
        s.exprs.push_back(std::move(index));
        s.exprs.push_back(expr());
        return s;
      }
      pos_ = save;
    }
    if (!allowDecl) fail("assignment");
    s.kind = Stmt::Kind::ExprStmt;
    s.exprs.push_back(expr());
    return s;
  }

  Stmt statement() {
    Stmt s;
    s.line = peek().line;
    if (is("{")) {
      s.kind = Stmt::Kind::Block;
      s.body = block();
      return s;
    }
    if (is("if")) {
      advance();
      s.kind = Stmt::Kind::If;
      expect("(");
      s.exprs.push_back(expr());
      expect(")");
      s.body = body();
      if (is("else")) {
        advance();
        s.hasElse = true;
        s.elseBody = body();
      }
      return s;
    }
    if (is("while")) {
      advance();
      s.kind = Stmt::Kind::While;
      expect("(");
      s.exprs.push_back(expr());
      expect(")");
      s.body = body();
      return s;
    }
    if (is("for")) {
      advance();
      s.kind = Stmt::Kind::For;
      expect("(");
      if (!is(";")) s.init.push_back(simple(true));
      expect(";");
      s.exprs.push_back(expr());
      expect(";");
      if (!is(")")) s.step.push_back(simple(false));
      expect(")");
      s.body = body();
      if (!s.init.empty() && s.init[0].kind != Stmt::Kind::VarDecl &&
          s.init[0].kind != Stmt::Kind::Assign && s.init[0].kind != Stmt::Kind::ArrayAssign)
        throw Error(ErrorCode::SyntaxError, "invalid for-loop initializer", s.line);
      return s;
    }
    if (is("return")) {
      advance();
      s.kind = Stmt::Kind::Return;
      s.exprs.push_back(expr());
      expect(";");
      return s;
    }
    Stmt simpleStmt = simple(true);
    expect(";");
    return simpleStmt;
  }

  Expr binary(int level) {
    static const std::vector<std::vector<std::string>> ops = {
        {"||"}, {"&&"}, {"==", "!="}, {"<", "<=", ">", ">="}, {"+", "-"}, {"*", "/", "%"}};
    if (level == static_cast<int>(ops.size())) return unary();
    Expr lhs = binary(level + 1);
    for (;;) {
      const auto& candidates = ops[static_cast<size_t>(level)];
      auto it = std::find_if(candidates.begin(), candidates.end(),
                             [&](const std::string& o) { return is(o); });
      if (it == candidates.end()) return lhs;
      Expr e;
      e.kind = Expr::Kind::Binary;
      e.line = peek().line;
      e.op = *it;
      advance();
      e.args.push_back(std::move(lhs));
      e.args.push_back(binary(level + 1));
      lhs = std::move(e);
    }
  }

  Expr expr() { return binary(0); }

  Expr unary() {
    if (is("-") || is("!")) {
      Expr e;
      e.kind = Expr::Kind::Unary;
      e.line = peek().line;
      e.op = advance().text;
      Expr operand = unary();
      if (e.op == "-" && operand.kind == Expr::Kind::Number) {
        operand.value = static_cast<int32_t>(0u - static_cast<uint32_t>(operand.value));
        operand.line = e.line;
        return operand;
      }
      e.args.push_back(std::move(operand));
      return e;
    }
    return primary();
  }

  Expr primary() {
    Expr e;
    e.line = peek().line;
    if (peek().kind == Tok::Number) {
      e.kind = Expr::Kind::Number;
      e.value = static_cast<int32_t>(advance().number);
      return e;
    }
    if (is("(")) {
      advance();
      Expr inner = expr();
      expect(")");
      return inner;
    }
    if (peek().kind != Tok::Ident) fail("expression");
    e.name = ident();
    if (is("[")) {
      advance();
      e.kind = Expr::Kind::Index;
      e.args.push_back(expr());
      expect("]");
    } else if (is("(")) {
      advance();
      e.kind = Expr::Kind::Call;
      if (!is(")")) {
        e.args.push_back(expr());
        while (is(",")) {
          advance();
          e.args.push_back(expr());
        }
      }
      expect(")");
    } else {
      e.kind = Expr::Kind::Var;
    }
    return e;
  }

  std::vector<Token> toks_;
  size_t pos_ = 0;
};

void collectCalls(const Expr& e, std::vector<const Expr*>& out) {
  if (e.kind == Expr::Kind::Call) out.push_back(&e);
  for (const auto& a : e.args) collectCalls(a, out);
}

void collectCalls(const std::vector<Stmt>& stmts, std::vector<const Expr*>& out) {
  for (const auto& s : stmts) {
    for (const auto& e : s.exprs) collectCalls(e, out);
    collectCalls(s.body, out);
    collectCalls(s.elseBody, out);
    collectCalls(s.init, out);
    collectCalls(s.step, out);
  }
}

void checkCallGraph(const Ast& ast) {
  std::map<std::string, const FunctionDecl*, std::less<>> byName;
  for (const auto& f : ast.functions) {
    if (!byName.emplace(f.name, &f).second)
      throw Error(ErrorCode::SyntaxError, "redefinition of function '" + f.name + "'", f.line);
  }
  std::map<std::string, std::vector<std::string>> edges;
  for (const auto& f : ast.functions) {
    std::vector<const Expr*> calls;
    collectCalls(f.body, calls);
    for (const Expr* c : calls) {
      auto it = byName.find(c->name);
      if (it == byName.end())
        throw Error(ErrorCode::SyntaxError, "call to undefined function '" + c->name + "'",
                    c->line);
      if (it->second->params.size() != c->args.size())
        throw Error(ErrorCode::SyntaxError,
                    "function '" + c->name + "' expects " +
                        std::to_string(it->second->params.size()) + " arguments",
                    c->line);
      if (c->name == "main")
        throw Error(ErrorCode::RecursionUnsupported, "main may not be called", c->line);
      edges[f.name].push_back(c->name);
    }
  }
  // Depth-first search for a cycle.
  std::map<std::string, int> color;
  std::function<void(const std::string&)> visit = [&](const std::string& n) {
    color[n] = 1;
    for (const auto& m : edges[n]) {
      if (color[m] == 1)
        throw Error(ErrorCode::RecursionUnsupported,
                    "recursive call cycle through '" + m + "'", byName.at(m)->line);
      if (color[m] == 0) visit(m);
    }
    color[n] = 2;
  };
  for (const auto& f : ast.functions)
    if (color[f.name] == 0) visit(f.name);
}

}  // namespace

Ast parse(const SourceProgram& source) {
  auto toks = lex(source);
  if (toks.size() == 1) throw Error(ErrorCode::EmptyProgram, "program contains no code");
  Ast ast = Parser(std::move(toks)).program();
  const FunctionDecl* main = ast.find("main");
  if (!main) throw Error(ErrorCode::NoMainFunction, "no function named 'main'");
  if (!main->params.empty())
    throw Error(ErrorCode::NoMainFunction, "'main' must take no parameters", main->line);
  checkCallGraph(ast);
  return ast;
}

}  // namespace hlsdbg::frontend
