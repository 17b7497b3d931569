// SPDX-License-Identifier: Apache-2.0
#include "frontend/ir.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <sstream>

namespace hlsdbg::ir {

namespace {

constexpr std::array<std::string_view, 20> kNames = {
    "const",  "add",    "sub",    "mul",    "div",    "mod", "cmp-lt",
    "cmp-le", "cmp-gt", "cmp-ge", "cmp-eq", "cmp-ne", "and", "or",
    "not",    "load",   "store",  "call",   "phi-lite", "move"};

}  // namespace

std::string_view opcodeName(Opcode op) noexcept { return kNames[static_cast<size_t>(op)]; }

std::optional<Opcode> opcodeFromName(std::string_view name) noexcept {
  for (size_t i = 0; i < kNames.size(); ++i)
    if (kNames[i] == name) return static_cast<Opcode>(i);
  return std::nullopt;
}

bool isCompare(Opcode op) noexcept { return op >= Opcode::CmpLt && op <= Opcode::CmpNe; }

bool isPure(Opcode op) noexcept {
  switch (op) {
    case Opcode::Div:
    case Opcode::Mod:
    case Opcode::Load:
    case Opcode::Store:
    case Opcode::Call:
      return false;
    default:
      return true;
  }
}

int32_t evalArith(Opcode op, int32_t a, int32_t b) noexcept {
  auto ua = static_cast<uint32_t>(a);
  auto ub = static_cast<uint32_t>(b);
  switch (op) {
    case Opcode::Add: return static_cast<int32_t>(ua + ub);
    case Opcode::Sub: return static_cast<int32_t>(ua - ub);
    case Opcode::Mul: return static_cast<int32_t>(ua * ub);
    case Opcode::Div:
      if (b == 0) return 0;
      if (a == std::numeric_limits<int32_t>::min() && b == -1) return a;
      return a / b;
    case Opcode::Mod:
      if (b == 0) return 0;
      if (a == std::numeric_limits<int32_t>::min() && b == -1) return 0;
      return a % b;
    case Opcode::CmpLt: return a < b;
    case Opcode::CmpLe: return a <= b;
    case Opcode::CmpGt: return a > b;
    case Opcode::CmpGe: return a >= b;
    case Opcode::CmpEq: return a == b;
    case Opcode::CmpNe: return a != b;
    case Opcode::And: return a != 0 && b != 0;
    case Opcode::Or: return a != 0 || b != 0;
    case Opcode::Not: return a == 0;
    case Opcode::Const:
    case Opcode::Move: return a;
    default: return 0;
  }
}

Block* Function::block(BlockId id) {
  for (auto& b : blocks)
    if (b.id == id) return &b;
  return nullptr;
}

const Block* Function::block(BlockId id) const {
  return const_cast<Function*>(this)->block(id);
}

Function* Program::function(std::string_view name) {
  for (auto& f : functions)
    if (f.name == name) return &f;
  return nullptr;
}

const Function* Program::function(std::string_view name) const {
  return const_cast<Program*>(this)->function(name);
}

RegId Program::newTemp(std::string_view fn) {
  auto id = static_cast<RegId>(registers.size());
  registers.push_back({id, "%t" + std::to_string(id), std::string(fn), RegKind::Temp});
  return id;
}

std::vector<RegId> readsOf(const Instr& in) {
  std::vector<RegId> out;
  for (const auto& a : in.args)
    if (a.isReg()) out.push_back(a.value);
  return out;
}

std::optional<RegId> writeOf(const Instr& in) { return in.result; }

std::vector<BlockId> successors(const Terminator& t) {
  switch (t.kind) {
    case TermKind::Jump: return {t.target};
    case TermKind::Branch:
      if (t.target == t.elseTarget) return {t.target};
      return {t.target, t.elseTarget};
    case TermKind::Return: return {};
  }
  return {};
}

namespace {

std::string operandText(const Operand& o, const Program& prog) {
  if (o.isImm()) return std::to_string(o.value);
  if (o.value >= 0 && static_cast<size_t>(o.value) < prog.registers.size())
    return prog.registers[static_cast<size_t>(o.value)].name;
  return "r" + std::to_string(o.value);
}

std::string memName(MemId m, const Program& prog) {
  if (m >= 0 && static_cast<size_t>(m) < prog.arrays.size())
    return prog.arrays[static_cast<size_t>(m)].name;
  return "m" + std::to_string(m);
}

}  // namespace

std::string formatOperands(const Instr& in, const Program& prog) {
  std::ostringstream os;
  switch (in.op) {
    case Opcode::Load:
      os << memName(in.memory, prog) << "[" << operandText(in.args.at(0), prog) << "]";
      break;
    case Opcode::Store:
      os << memName(in.memory, prog) << "[" << operandText(in.args.at(0), prog)
         << "], " << operandText(in.args.at(1), prog);
      break;
    case Opcode::Call:
      os << in.callee << "(";
      for (size_t i = 0; i < in.args.size(); ++i)
        os << (i ? ", " : "") << operandText(in.args[i], prog);
      os << ")";
      break;
    case Opcode::Phi:
      for (size_t i = 0; i < in.args.size(); ++i)
        os << (i ? ", " : "") << "[bb" << in.phiBlocks.at(i) << ": "
           << operandText(in.args[i], prog) << "]";
      break;
    default:
      for (size_t i = 0; i < in.args.size(); ++i)
        os << (i ? ", " : "") << operandText(in.args[i], prog);
  }
  return os.str();
}

std::string formatInstr(const Instr& in, const Program& prog) {
  std::string s;
  if (in.result) s = operandText(Operand::reg(*in.result), prog) + " = ";
  s += opcodeName(in.op);
  std::string ops = formatOperands(in, prog);
  if (!ops.empty()) s += " " + ops;
  return s;
}

std::string print(const Program& prog) {
  std::ostringstream os;
  for (const auto& f : prog.functions) {
    os << "function " << f.name << " (entry bb" << f.entry << ")\n";
    for (const auto& b : f.blocks) {
      os << "bb" << b.id << ":\n";
      for (const auto& in : b.instrs)
        os << "  [" << in.id << "] " << formatInstr(in, prog) << "    ; line " << in.line
           << "\n";
      switch (b.term.kind) {
        case TermKind::Jump: os << "  jump bb" << b.term.target << "\n"; break;
        case TermKind::Branch:
          os << "  br " << operandText(b.term.cond, prog) << ", bb" << b.term.target << ", bb"
             << b.term.elseTarget << "\n";
          break;
        case TermKind::Return: os << "  ret\n"; break;
      }
    }
  }
  return os.str();
}

}  // namespace hlsdbg::ir
