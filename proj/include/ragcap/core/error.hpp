#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ragcap {

enum class ErrorCode {
  kInvalidArgument,
  kUnknownLanguage,
  kZeroVector,
  kDuplicateId,
  kEmptyCorpus,
  kDimMismatch,
  kCorruptFile,
  kIoError,
  kInvalidUtf8,
  kMissingTemplate,
  kLanguageMismatch,
  kPivotMiss,
  kModeMismatch,
  kMissingReference,
  kKeyCollision,
  kEndpointUnreachable,
  kMalformedResponse,
  kManifestMismatch,
};

std::string_view error_name(ErrorCode code) noexcept;

// All library failures surface as ragcap::Error. what() is "<Name>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace ragcap
