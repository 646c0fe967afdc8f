#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ranklq {

enum class ErrorCode {
  InvalidArgument,
  TiesPresent,
  UnsupportedKind,
  TooLargeForReference,
  BadPermutation,
  DegenerateColumn,
  TooLarge,
  Infeasible,
  MissingOmega,
  CalibrationUnavailable,
  CalibrationMismatch,
  InfeasibleB,
  SchemaMismatch,
  CorruptFile,
  DimensionTooSmall,
  MissingSpectral,
  BadWeights,
  NotPositiveDefinite,
  RaggedRows,
  NonNumericCell,
  EmptyFile,
  Internal,
};

std::string_view error_code_name(ErrorCode code);

/// Library error. `code()` identifies the failure class; `what()` carries the
/// human readable detail, prefixed with the code name.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& detail) { throw Error(code, detail); }

}  // namespace ranklq
