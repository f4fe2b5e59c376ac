#pragma once

#include <stdexcept>
#include <string>

namespace topoproto {

// Error taxonomy shared across the library. Each category carries a stable
// process exit code so CLI failures are scriptable.
enum class ErrorCode : int {
  kZeroNorm = 10,
  kDimensionMismatch = 11,
  kAntipodalInputs = 12,
  kEmptyInput = 13,
  kEmptyState = 14,
  kSampleMismatch = 15,
  kDegenerateMatrix = 16,
  kMissingClass = 17,
  kClassSetMismatch = 18,
  kParseError = 19,
  kVersionMismatch = 20,
  kInvalidPartition = 21,
  kUnknownKind = 22,
  kConfigError = 23,
  kIoError = 24,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  int exit_code() const noexcept { return static_cast<int>(code_); }

 private:
  ErrorCode code_;
};

#define TOPOPROTO_DEFINE_ERROR(NAME, CODE)                 \
  class NAME : public Error {                              \
   public:                                                 \
    explicit NAME(const std::string& message)              \
        : Error(ErrorCode::CODE, message) {}               \
  }

TOPOPROTO_DEFINE_ERROR(ZeroNormError, kZeroNorm);
TOPOPROTO_DEFINE_ERROR(DimensionMismatchError, kDimensionMismatch);
TOPOPROTO_DEFINE_ERROR(AntipodalInputsError, kAntipodalInputs);
TOPOPROTO_DEFINE_ERROR(EmptyInputError, kEmptyInput);
TOPOPROTO_DEFINE_ERROR(EmptyStateError, kEmptyState);
TOPOPROTO_DEFINE_ERROR(SampleMismatchError, kSampleMismatch);
TOPOPROTO_DEFINE_ERROR(DegenerateMatrixError, kDegenerateMatrix);
TOPOPROTO_DEFINE_ERROR(MissingClassError, kMissingClass);
TOPOPROTO_DEFINE_ERROR(ClassSetMismatchError, kClassSetMismatch);
TOPOPROTO_DEFINE_ERROR(ParseError, kParseError);
TOPOPROTO_DEFINE_ERROR(VersionMismatchError, kVersionMismatch);
TOPOPROTO_DEFINE_ERROR(InvalidPartitionError, kInvalidPartition);
TOPOPROTO_DEFINE_ERROR(UnknownKindError, kUnknownKind);
TOPOPROTO_DEFINE_ERROR(ConfigError, kConfigError);
TOPOPROTO_DEFINE_ERROR(IoError, kIoError);

#undef TOPOPROTO_DEFINE_ERROR

}  // namespace topoproto
