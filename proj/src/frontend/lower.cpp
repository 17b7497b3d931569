// SPDX-License-Identifier: Apache-2.0
#include "frontend/lower.hpp"

#include <map>

#include "common/error.hpp"
#include "frontend/cfg.hpp"

namespace hlsdbg::frontend {

using ir::Opcode;
using ir::Operand;

namespace {

struct Binding {
  bool isArray = false;
  int storage = -1;
  int length = 0;
};

Opcode binaryOpcode(const std::string& op) {
  static const std::map<std::string, Opcode, std::less<>> table = {
      {"+", Opcode::Add},    {"-", Opcode::Sub},    {"*", Opcode::Mul},
      {"/", Opcode::Div},    {"%", Opcode::Mod},    {"<", Opcode::CmpLt},
      {"<=", Opcode::CmpLe}, {">", Opcode::CmpGt},  {">=", Opcode::CmpGe},
      {"==", Opcode::CmpEq}, {"!=", Opcode::CmpNe}, {"&&", Opcode::And},
      {"||", Opcode::Or}};
  return table.at(op);
}

// True when evaluating the expression cannot fault or have side effects, so
// a logical operator may evaluate it unconditionally.
bool isSafe(const Expr& e) {
  if (e.kind == Expr::Kind::Call || e.kind == Expr::Kind::Index) return false;
  if (e.kind == Expr::Kind::Binary && (e.op == "/" || e.op == "%")) return false;
  for (const auto& a : e.args)
    if (!isSafe(a)) return false;
  return true;
}

class FunctionLowerer {
 public:
  FunctionLowerer(ir::Program& prog, const FunctionDecl& decl, ir::Function& fn)
      : prog_(prog), decl_(decl), fn_(fn) {}

  void run() {
    scopes_.emplace_back();
    for (size_t i = 0; i < decl_.params.size(); ++i) {
      const std::string& p = decl_.params[i];
      if (scopes_.back().count(p))
        throw Error(ErrorCode::SyntaxError, "duplicate parameter '" + p + "'", decl_.line);
      scopes_.back()[p] = Binding{false, fn_.params[i], 0};
      known_[p] = Binding{false, fn_.params[i], 0};
    }
    cur_ = newBlock();
    fn_.entry = cur_;
    scopes_.emplace_back();
    lowerStmts(decl_.body);
    scopes_.pop_back();
    if (open()) {
      stmt_ = ++stmtCounter_;
      line_ = decl_.endLine;
      emit(Opcode::Const, fn_.returnReg, {Operand::imm(0)});
      close({ir::TermKind::Return, {}, -1, -1, decl_.endLine});
    }
    ir::cleanupCfg(fn_);
  }

 private:
  BlockId newBlock() {
    ir::Block b;
    b.id = prog_.nextBlockId++;
    fn_.blocks.push_back(std::move(b));
    closed_.push_back(false);
    return fn_.blocks.back().id;
  }

  size_t index(BlockId id) const {
    for (size_t i = 0; i < fn_.blocks.size(); ++i)
      if (fn_.blocks[i].id == id) return i;
    throw Error(ErrorCode::Internal, "unknown block");
  }

  bool open() const { return !closed_[index(cur_)]; }

  void close(ir::Terminator t) {
    size_t i = index(cur_);
    fn_.blocks[i].term = t;
    closed_[i] = true;
  }

  ir::Instr& emit(Opcode op, std::optional<RegId> result, std::vector<Operand> args) {
    ir::Instr in;
    in.id = prog_.nextInstrId++;
    in.origin = in.id;
    in.op = op;
    in.result = result;
    in.args = std::move(args);
    in.line = line_;
    in.stmt = stmt_;
    auto& instrs = fn_.blocks[index(cur_)].instrs;
    instrs.push_back(std::move(in));
    return instrs.back();
  }

  RegId temp() { return prog_.newTemp(fn_.name); }

  const Binding& lookup(const std::string& name, int line) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->find(name);
      if (f != it->end()) return f->second;
    }
    throw Error(ErrorCode::UndefinedVariable, "use of undeclared variable '" + name + "'", line);
  }

  void declare(const std::string& name, bool isArray, int length, int line) {
    for (const auto& scope : scopes_)
      if (scope.count(name))
        throw Error(ErrorCode::SyntaxError, "redeclaration of '" + name + "' shadows an outer one",
                    line);
    // Sequential re-declarations of a name share one storage location.
    auto prev = known_.find(name);
    if (prev != known_.end()) {
      if (prev->second.isArray != isArray || prev->second.length != length)
        throw Error(ErrorCode::SyntaxError, "conflicting redeclaration of '" + name + "'", line);
      scopes_.back()[name] = prev->second;
      return;
    }
    Binding b{isArray, -1, length};
    if (isArray) {
      b.storage = static_cast<int>(prog_.arrays.size());
      prog_.arrays.push_back({b.storage, name, fn_.name, length});
    } else {
      b.storage = static_cast<int>(prog_.registers.size());
      prog_.registers.push_back({b.storage, name, fn_.name, ir::RegKind::Variable});
    }
    prog_.variables.push_back({name, fn_.name, isArray, length, b.storage});
    known_[name] = b;
    scopes_.back()[name] = b;
  }

  const Binding& scalar(const std::string& name, int line) {
    const Binding& b = lookup(name, line);
    if (b.isArray)
      throw Error(ErrorCode::TypeMismatch, "array '" + name + "' used as a scalar", line);
    return b;
  }

  const Binding& array(const std::string& name, int line) {
    const Binding& b = lookup(name, line);
    if (!b.isArray)
      throw Error(ErrorCode::TypeMismatch, "'" + name + "' is not an array", line);
    return b;
  }

  Operand index(const Binding& arr, const Expr& e, const std::string& name) {
    Operand idx = lowerExpr(e);
    if (idx.isImm() && (idx.value < 0 || idx.value >= arr.length))
      throw Error(ErrorCode::ArrayBoundsStatic,
                  "index " + std::to_string(idx.value) + " is outside '" + name + "[" +
                      std::to_string(arr.length) + "]'",
                  e.line);
    return idx;
  }

  Operand lowerExpr(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::Number:
        return Operand::imm(e.value);
      case Expr::Kind::Var:
        return Operand::reg(scalar(e.name, e.line).storage);
      case Expr::Kind::Index: {
        const Binding& arr = array(e.name, e.line);
        Operand idx = index(arr, e.args[0], e.name);
        RegId t = temp();
        emit(Opcode::Load, t, {idx}).memory = arr.storage;
        return Operand::reg(t);
      }
      case Expr::Kind::Call: {
        std::vector<Operand> args;
        for (const auto& a : e.args) args.push_back(lowerExpr(a));
        emit(Opcode::Call, std::nullopt, std::move(args)).callee = e.name;
        RegId t = temp();
        emit(Opcode::Move, t, {Operand::reg(prog_.function(e.name)->returnReg)});
        return Operand::reg(t);
      }
      case Expr::Kind::Unary: {
        Operand v = lowerExpr(e.args[0]);
        RegId t = temp();
        if (e.op == "-")
          emit(Opcode::Sub, t, {Operand::imm(0), v});
        else
          emit(Opcode::Not, t, {v});
        return Operand::reg(t);
      }
      case Expr::Kind::Binary: {
        if ((e.op == "&&" || e.op == "||") && !isSafe(e.args[1])) return shortCircuit(e);
        Operand l = lowerExpr(e.args[0]);
        Operand r = lowerExpr(e.args[1]);
        RegId t = temp();
        emit(binaryOpcode(e.op), t, {l, r});
        return Operand::reg(t);
      }
    }
    return Operand::imm(0);
  }

  Operand shortCircuit(const Expr& e) {
    bool isAnd = e.op == "&&";
    Operand l = lowerExpr(e.args[0]);
    RegId lhsTruth = temp();
    emit(Opcode::CmpNe, lhsTruth, {l, Operand::imm(0)});
    BlockId from = cur_;
    BlockId rhsBlock = newBlock();
    BlockId join = newBlock();
    if (isAnd)
      close({ir::TermKind::Branch, Operand::reg(lhsTruth), rhsBlock, join, e.line});
    else
      close({ir::TermKind::Branch, Operand::reg(lhsTruth), join, rhsBlock, e.line});
    cur_ = rhsBlock;
    Operand r = lowerExpr(e.args[1]);
    RegId rhsTruth = temp();
    emit(Opcode::CmpNe, rhsTruth, {r, Operand::imm(0)});
    BlockId rhsEnd = cur_;
    close({ir::TermKind::Jump, {}, join, -1, e.line});
    cur_ = join;
    RegId t = temp();
    auto& phi = emit(Opcode::Phi, t, {Operand::imm(isAnd ? 0 : 1), Operand::reg(rhsTruth)});
    phi.phiBlocks = {from, rhsEnd};
    return Operand::reg(t);
  }

  // Branch conditions are always a register computed in the current block.
  Operand condition(const Expr& e) {
    Operand c = lowerExpr(e);
    if (c.isImm() || prog_.registers[static_cast<size_t>(c.value)].kind != ir::RegKind::Temp) {
      RegId t = temp();
      emit(Opcode::CmpNe, t, {c, Operand::imm(0)});
      return Operand::reg(t);
    }
    return c;
  }

  void assign(RegId dst, const Expr& value) {
    Operand v = lowerExpr(value);
    if (v.isImm())
      emit(Opcode::Const, dst, {v});
    else
      emit(Opcode::Move, dst, {v});
  }

  void beginStmt(const Stmt& s) {
    stmt_ = ++stmtCounter_;
    line_ = s.line;
  }

  void lowerStmts(const std::vector<Stmt>& stmts) {
    for (const auto& s : stmts) lowerStmt(s);
  }

  void lowerScoped(const std::vector<Stmt>& stmts) {
    scopes_.emplace_back();
    lowerStmts(stmts);
    scopes_.pop_back();
  }

  void lowerStmt(const Stmt& s) {
    if (!open()) cur_ = newBlock();  // code after a return is unreachable
    beginStmt(s);
    switch (s.kind) {
      case Stmt::Kind::VarDecl: {
        Operand v = lowerExpr(s.exprs[0]);
        declare(s.name, false, 0, s.line);
        RegId dst = scalar(s.name, s.line).storage;
        if (v.isImm())
          emit(Opcode::Const, dst, {v});
        else
          emit(Opcode::Move, dst, {v});
        return;
      }
      case Stmt::Kind::ArrayDecl:
        declare(s.name, true, s.arrayLength, s.line);
        return;
      case Stmt::Kind::Assign:
        assign(scalar(s.name, s.line).storage, s.exprs[0]);
        return;
      case Stmt::Kind::ArrayAssign: {
        const Binding& arr = array(s.name, s.line);
        Operand idx = index(arr, s.exprs[0], s.name);
        Operand v = lowerExpr(s.exprs[1]);
        emit(Opcode::Store, std::nullopt, {idx, v}).memory = arr.storage;
        return;
      }
      case Stmt::Kind::ExprStmt: {
        size_t before = fn_.blocks[index(cur_)].instrs.size();
        BlockId start = cur_;
        Operand v = lowerExpr(s.exprs[0]);
        if (cur_ == start && fn_.blocks[index(cur_)].instrs.size() == before) {
          if (v.isImm())
            emit(Opcode::Const, temp(), {v});
          else
            emit(Opcode::Move, temp(), {v});
        }
        return;
      }
      case Stmt::Kind::Return: {
        assign(fn_.returnReg, s.exprs[0]);
        close({ir::TermKind::Return, {}, -1, -1, s.line});
        return;
      }
      case Stmt::Kind::Block:
        lowerScoped(s.body);
        return;
      case Stmt::Kind::If: {
        Operand c = condition(s.exprs[0]);
        BlockId thenB = newBlock();
        BlockId elseB = s.hasElse ? newBlock() : -1;
        BlockId join = newBlock();
        close({ir::TermKind::Branch, c, thenB, s.hasElse ? elseB : join, s.line});
        cur_ = thenB;
        lowerScoped(s.body);
        if (open()) close({ir::TermKind::Jump, {}, join, -1, s.line});
        if (s.hasElse) {
          cur_ = elseB;
          lowerScoped(s.elseBody);
          if (open()) close({ir::TermKind::Jump, {}, join, -1, s.line});
        }
        cur_ = join;
        return;
      }
      case Stmt::Kind::While: {
        BlockId header = newBlock();
        close({ir::TermKind::Jump, {}, header, -1, s.line});
        cur_ = header;
        Operand c = condition(s.exprs[0]);
        BlockId bodyB = newBlock();
        BlockId exit = newBlock();
        close({ir::TermKind::Branch, c, bodyB, exit, s.line});
        cur_ = bodyB;
        lowerScoped(s.body);
        if (open()) close({ir::TermKind::Jump, {}, header, -1, s.line});
        cur_ = exit;
        return;
      }
      case Stmt::Kind::For: {
        scopes_.emplace_back();
        if (!s.init.empty()) lowerStmt(s.init[0]);
        stmt_ = ++stmtCounter_;
        line_ = s.line;
        BlockId header = newBlock();
        close({ir::TermKind::Jump, {}, header, -1, s.line});
        cur_ = header;
        Operand c = condition(s.exprs[0]);
        BlockId bodyB = newBlock();
        BlockId latch = newBlock();
        BlockId exit = newBlock();
        close({ir::TermKind::Branch, c, bodyB, exit, s.line});
        cur_ = bodyB;
        lowerScoped(s.body);
        if (open()) close({ir::TermKind::Jump, {}, latch, -1, s.line});
        cur_ = latch;
        if (!s.step.empty()) lowerStmt(s.step[0]);
        if (!open()) cur_ = newBlock();
        close({ir::TermKind::Jump, {}, header, -1, s.line});
        cur_ = exit;
        scopes_.pop_back();
        return;
      }
    }
  }

  ir::Program& prog_;
  const FunctionDecl& decl_;
  ir::Function& fn_;
  std::vector<std::map<std::string, Binding, std::less<>>> scopes_;
  std::map<std::string, Binding, std::less<>> known_;
  std::vector<bool> closed_;
  BlockId cur_ = -1;
  int stmtCounter_ = 0;
  int stmt_ = 0;
  int line_ = 0;
};

}  // namespace

ir::Program lower(const Ast& ast) {
  ir::Program prog;
  std::vector<const FunctionDecl*> order;
  for (const auto& f : ast.functions)
    if (f.name == "main") order.push_back(&f);
  for (const auto& f : ast.functions)
    if (f.name != "main") order.push_back(&f);

  for (const FunctionDecl* decl : order) {
    ir::Function fn;
    fn.name = decl->name;
    fn.line = decl->line;
    fn.endLine = decl->endLine;
    for (const auto& p : decl->params) {
      auto id = static_cast<RegId>(prog.registers.size());
      prog.registers.push_back({id, p, fn.name, ir::RegKind::Variable});
      prog.variables.push_back({p, fn.name, false, 0, id});
      fn.params.push_back(id);
    }
    fn.returnReg = static_cast<RegId>(prog.registers.size());
    prog.registers.push_back({fn.returnReg, "$ret", fn.name, ir::RegKind::Return});
    prog.functions.push_back(std::move(fn));
  }
  for (size_t i = 0; i < order.size(); ++i) {
    FunctionLowerer(prog, *order[i], prog.functions[i]).run();
  }
  return prog;
}

}  // namespace hlsdbg::frontend
