// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hlsdbg {

using InstrId = int32_t;
using BlockId = int32_t;
using RegId = int32_t;
using MemId = int32_t;
using StateId = int32_t;

}  // namespace hlsdbg

namespace hlsdbg::ir {

enum class Opcode : uint8_t {
  Const, Add, Sub, Mul, Div, Mod,
  CmpLt, CmpLe, CmpGt, CmpGe, CmpEq, CmpNe,
  And, Or, Not,
  Load, Store, Call, Phi, Move,
};

std::string_view opcodeName(Opcode op) noexcept;
std::optional<Opcode> opcodeFromName(std::string_view name) noexcept;
bool isCompare(Opcode op) noexcept;
/// Side-effect free and unable to fault; safe to delete when unused.
bool isPure(Opcode op) noexcept;

/// Two's-complement evaluation of a binary or unary opcode. Division by zero
/// is the caller's problem; INT32_MIN / -1 wraps.
int32_t evalArith(Opcode op, int32_t a, int32_t b) noexcept;

struct Operand {
  enum class Kind : uint8_t { Reg, Imm };
  Kind kind = Kind::Imm;
  int32_t value = 0;  // register id or immediate

  static Operand reg(RegId r) { return {Kind::Reg, r}; }
  static Operand imm(int32_t v) { return {Kind::Imm, v}; }
  bool isReg() const { return kind == Kind::Reg; }
  bool isImm() const { return kind == Kind::Imm; }

  bool operator==(const Operand&) const = default;
};

// Operand layout by opcode:
//   const:  args = [imm]                 result = dst
//   unary/binary arith, cmp, move:       args = operands, result = dst
//   load:   args = [index]               memory, result = dst
//   store:  args = [index, value]        memory
//   call:   args = actual arguments      callee (writes callee params)
//   phi:    args[i] flows in from phiBlocks[i]
struct Instr {
  InstrId id = 0;
  InstrId origin = 0;  // id of the unoptimized instruction this derives from
  Opcode op = Opcode::Const;
  std::optional<RegId> result;
  std::vector<Operand> args;
  MemId memory = -1;
  std::string callee;
  std::vector<BlockId> phiBlocks;
  int line = 0;
  int stmt = 0;  // statement ordinal within the function, for O0 ordering

  bool operator==(const Instr&) const = default;
};

enum class TermKind : uint8_t { Jump, Branch, Return };

struct Terminator {
  TermKind kind = TermKind::Return;
  Operand cond;           // Branch
  BlockId target = -1;    // Jump target / Branch taken target
  BlockId elseTarget = -1;
  int line = 0;

  bool operator==(const Terminator&) const = default;
};

struct Block {
  BlockId id = 0;
  std::vector<Instr> instrs;
  Terminator term;

  bool operator==(const Block&) const = default;
};

struct Function {
  std::string name;
  std::vector<RegId> params;
  RegId returnReg = -1;
  BlockId entry = -1;
  std::vector<Block> blocks;
  int line = 0;
  int endLine = 0;

  Block* block(BlockId id);
  const Block* block(BlockId id) const;
  bool operator==(const Function&) const = default;
};

enum class RegKind : uint8_t { Variable, Temp, Return };

struct Register {
  RegId id = 0;
  std::string name;
  std::string function;
  RegKind kind = RegKind::Temp;

  bool operator==(const Register&) const = default;
};

struct Array {
  MemId id = 0;
  std::string name;
  std::string function;
  int length = 0;

  bool operator==(const Array&) const = default;
};

/// A declared source variable and the storage lowering assigned to it.
struct VariableDecl {
  std::string name;
  std::string function;
  bool isArray = false;
  int length = 0;
  int storage = -1;  // RegId for scalars, MemId for arrays

  bool operator==(const VariableDecl&) const = default;
};

struct Program {
  std::vector<Function> functions;
  std::vector<Register> registers;  // indexed by RegId
  std::vector<Array> arrays;        // indexed by MemId
  std::vector<VariableDecl> variables;
  // Functions whose bodies were inlined everywhere; kept without blocks so
  // their names, lines and storage stay describable.
  std::vector<Function> inlined;
  InstrId nextInstrId = 0;
  BlockId nextBlockId = 0;

  Function* function(std::string_view name);
  const Function* function(std::string_view name) const;
  RegId newTemp(std::string_view fn);

  bool operator==(const Program&) const = default;
};

std::vector<RegId> readsOf(const Instr& in);
std::optional<RegId> writeOf(const Instr& in);
std::vector<BlockId> successors(const Terminator& t);

std::string formatOperands(const Instr& in, const Program& prog);
std::string formatInstr(const Instr& in, const Program& prog);
std::string print(const Program& prog);

}  // namespace hlsdbg::ir
