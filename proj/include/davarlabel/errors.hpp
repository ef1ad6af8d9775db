#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace davar {

// Stable error codes. CLI maps MalformedJson/SchemaShapeError to exit 2
// (unreadable input), everything else to exit 1 (domain failure).
enum class Errc {
  MalformedJson,
  SchemaShapeError,
  DuplicateImagePath,
  DegenerateBox,
  MissingRequiredKey,
  SubtaskIndexOutOfRange,
  UnknownStage,
  BadStageParams,
  BadTarget,
  BadK,
  MissingTexts,
  NonQuadBox,
  TokenTagLengthMismatch,
  DanglingReference,
  DuplicateId,
  LengthMismatch,
  NotAPermutation,
  NonConvexPolygon,
  IoError,
};

std::string_view errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code),
        message_(message) {}

  Errc code() const { return code_; }
  std::string_view code_name() const { return errc_name(code_); }
  /// Message without the code prefix.
  const std::string& message() const { return message_; }

 private:
  Errc code_;
  std::string message_;
};

}  // namespace davar
