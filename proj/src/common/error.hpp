// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hlsdbg {

// Error names double as protocol error codes, so keep them stable.
enum class ErrorCode {
  SyntaxError,
  EmptyProgram,
  NoMainFunction,
  RecursionUnsupported,
  UndefinedVariable,
  TypeMismatch,
  ArrayBoundsStatic,
  UnschedulableDesign,
  IoError,
  FormatVersionMismatch,
  CorruptDatabase,
  UnknownState,
  UnknownLine,
  LineHasNoCode,
  ReadWhileRunning,
  UnknownRegister,
  UnknownMemory,
  OffsetOutOfRange,
  CorruptTrace,
  CycleOutsideWindow,
  OutOfBreakpointUnits,
  InvalidState,
  WindowOverflow,
  WindowUnderflow,
  EmptyTrace,
  NondeterministicBackend,
  TargetBeforeReset,
  UnknownVariable,
  RangeOutsideWindow,
  PortInUse,
  MalformedRequest,
  MethodNotFound,
  InvalidParams,
  Internal,
};

std::string_view errorName(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, int line = 0)
      : std::runtime_error(message), code_(code), line_(line) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view name() const noexcept { return errorName(code_); }
  /// Source line for compile errors, 0 when not applicable.
  int line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  int line_;
};

}  // namespace hlsdbg
