// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "frontend/ir.hpp"

namespace hlsdbg::ir {

struct EvalResult {
  enum class Status { Ok, DivideByZero, MemoryOutOfBounds, StepLimit };
  Status status = Status::Ok;
  int32_t value = 0;

  bool operator==(const EvalResult&) const = default;
};

/// Sequential reference execution of the IR, one instruction at a time.
/// Storage is static (one register per variable, one memory per array) and
/// zero-initialised, matching the hardware model.
EvalResult interpret(const Program& prog, uint64_t stepLimit = 50'000'000);

}  // namespace hlsdbg::ir
