#pragma once

#include <stdexcept>
#include <string>

namespace archdelta {

enum class ErrorCode {
  kNotAGitRepository,
  kGitFailure,
  kUnknownTag,
  kUnknownScope,
  kVariantMismatch,
  kSnapshotNotCached,
  kSchemaMismatch,
  kCorruptPayload,
  kIo,
  kInvalidArgument,
};

// Every failure surfaced by the library is an Error carrying a code the CLI
// and HTTP layers map onto exit codes / status codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace archdelta
