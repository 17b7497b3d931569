// SPDX-License-Identifier: Apache-2.0
#include "common/error.hpp"

namespace hlsdbg {

std::string_view errorName(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::EmptyProgram: return "EmptyProgram";
    case ErrorCode::NoMainFunction: return "NoMainFunction";
    case ErrorCode::RecursionUnsupported: return "RecursionUnsupported";
    case ErrorCode::UndefinedVariable: return "UndefinedVariable";
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::ArrayBoundsStatic: return "ArrayBoundsStatic";
    case ErrorCode::UnschedulableDesign: return "UnschedulableDesign";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::FormatVersionMismatch: return "FormatVersionMismatch";
    case ErrorCode::CorruptDatabase: return "CorruptDatabase";
    case ErrorCode::UnknownState: return "UnknownState";
    case ErrorCode::UnknownLine: return "UnknownLine";
    case ErrorCode::LineHasNoCode: return "LineHasNoCode";
    case ErrorCode::ReadWhileRunning: return "ReadWhileRunning";
    case ErrorCode::UnknownRegister: return "UnknownRegister";
    case ErrorCode::UnknownMemory: return "UnknownMemory";
    case ErrorCode::OffsetOutOfRange: return "OffsetOutOfRange";
    case ErrorCode::CorruptTrace: return "CorruptTrace";
    case ErrorCode::CycleOutsideWindow: return "CycleOutsideWindow";
    case ErrorCode::OutOfBreakpointUnits: return "OutOfBreakpointUnits";
    case ErrorCode::InvalidState: return "InvalidState";
    case ErrorCode::WindowOverflow: return "WindowOverflow";
    case ErrorCode::WindowUnderflow: return "WindowUnderflow";
    case ErrorCode::EmptyTrace: return "EmptyTrace";
    case ErrorCode::NondeterministicBackend: return "NondeterministicBackend";
    case ErrorCode::TargetBeforeReset: return "TargetBeforeReset";
    case ErrorCode::UnknownVariable: return "UnknownVariable";
    case ErrorCode::RangeOutsideWindow: return "RangeOutsideWindow";
    case ErrorCode::PortInUse: return "PortInUse";
    case ErrorCode::MalformedRequest: return "MalformedRequest";
    case ErrorCode::MethodNotFound: return "MethodNotFound";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::Internal: return "Internal";
  }
  return "Internal";
}

}  // namespace hlsdbg
