// SPDX-License-Identifier: Apache-2.0
#include "frontend/ir_eval.hpp"

#include <map>

namespace hlsdbg::ir {

namespace {

struct Fault {
  EvalResult::Status status;
};

class Interpreter {
 public:
  Interpreter(const Program& prog, uint64_t limit) : prog_(prog), limit_(limit) {
    regs_.assign(prog.registers.size(), 0);
    for (const auto& a : prog.arrays) mems_.emplace_back(static_cast<size_t>(a.length), 0);
  }

  EvalResult run() {
    const Function* main = prog_.function("main");
    try {
      call(*main);
    } catch (const Fault& f) {
      return {f.status, 0};
    }
    return {EvalResult::Status::Ok, regs_[static_cast<size_t>(main->returnReg)]};
  }

 private:
  int32_t value(const Operand& o) const {
    return o.isImm() ? o.value : regs_[static_cast<size_t>(o.value)];
  }

  void tick() {
    if (++steps_ > limit_) throw Fault{EvalResult::Status::StepLimit};
  }

  void call(const Function& fn) {
    BlockId pred = -1;
    BlockId cur = fn.entry;
    for (;;) {
      const Block* b = fn.block(cur);
      // Phi inputs are all read before any phi result is written.
      std::vector<std::pair<RegId, int32_t>> phis;
      for (const auto& in : b->instrs) {
        if (in.op != Opcode::Phi) continue;
        for (size_t k = 0; k < in.phiBlocks.size(); ++k)
          if (in.phiBlocks[k] == pred) phis.emplace_back(*in.result, value(in.args[k]));
      }
      for (auto [r, v] : phis) regs_[static_cast<size_t>(r)] = v;
      for (const auto& in : b->instrs) {
        tick();
        exec(in);
      }
      tick();
      switch (b->term.kind) {
        case TermKind::Return: return;
        case TermKind::Jump: pred = cur; cur = b->term.target; break;
        case TermKind::Branch:
          pred = cur;
          cur = value(b->term.cond) != 0 ? b->term.target : b->term.elseTarget;
          break;
      }
    }
  }

  void exec(const Instr& in) {
    auto set = [&](int32_t v) { regs_[static_cast<size_t>(*in.result)] = v; };
    switch (in.op) {
      case Opcode::Phi:
        return;
      case Opcode::Const:
      case Opcode::Move:
        set(value(in.args[0]));
        return;
      case Opcode::Not:
        set(evalArith(in.op, value(in.args[0]), 0));
        return;
      case Opcode::Div:
      case Opcode::Mod:
        if (value(in.args[1]) == 0) throw Fault{EvalResult::Status::DivideByZero};
        set(evalArith(in.op, value(in.args[0]), value(in.args[1])));
        return;
      case Opcode::Load: {
        auto& mem = mems_[static_cast<size_t>(in.memory)];
        int32_t idx = value(in.args[0]);
        if (idx < 0 || static_cast<size_t>(idx) >= mem.size())
          throw Fault{EvalResult::Status::MemoryOutOfBounds};
        set(mem[static_cast<size_t>(idx)]);
        return;
      }
      case Opcode::Store: {
        auto& mem = mems_[static_cast<size_t>(in.memory)];
        int32_t idx = value(in.args[0]);
        if (idx < 0 || static_cast<size_t>(idx) >= mem.size())
          throw Fault{EvalResult::Status::MemoryOutOfBounds};
        mem[static_cast<size_t>(idx)] = value(in.args[1]);
        return;
      }
      case Opcode::Call: {
        const Function* callee = prog_.function(in.callee);
        for (size_t i = 0; i < in.args.size(); ++i)
          regs_[static_cast<size_t>(callee->params[i])] = value(in.args[i]);
        call(*callee);
        return;
      }
      default:
        set(evalArith(in.op, value(in.args[0]), value(in.args[1])));
        return;
    }
  }

  const Program& prog_;
  uint64_t limit_;
  uint64_t steps_ = 0;
  std::vector<int32_t> regs_;
  std::vector<std::vector<int32_t>> mems_;
};

}  // namespace

EvalResult interpret(const Program& prog, uint64_t stepLimit) {
  return Interpreter(prog, stepLimit).run();
}

}  // namespace hlsdbg::ir
