#include "ragcap/core/error.hpp"

namespace ragcap {

std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kUnknownLanguage: return "UnknownLanguage";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kCorruptFile: return "CorruptFile";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kInvalidUtf8: return "InvalidUtf8";
    case ErrorCode::kMissingTemplate: return "MissingTemplate";
    case ErrorCode::kLanguageMismatch: return "LanguageMismatch";
    case ErrorCode::kPivotMiss: return "PivotMiss";
    case ErrorCode::kModeMismatch: return "ModeMismatch";
    case ErrorCode::kMissingReference: return "MissingReference";
    case ErrorCode::kKeyCollision: return "KeyCollision";
    case ErrorCode::kEndpointUnreachable: return "EndpointUnreachable";
    case ErrorCode::kMalformedResponse: return "MalformedResponse";
    case ErrorCode::kManifestMismatch: return "ManifestMismatch";
  }
  return "Error";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(error_name(code)) + ": " + detail),
      code_(code),
      detail_(detail) {}

}  // namespace ragcap
