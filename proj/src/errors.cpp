#include "davarlabel/errors.hpp"

namespace davar {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::MalformedJson: return "MalformedJson";
    case Errc::SchemaShapeError: return "SchemaShapeError";
    case Errc::DuplicateImagePath: return "DuplicateImagePath";
    case Errc::DegenerateBox: return "DegenerateBox";
    case Errc::MissingRequiredKey: return "MissingRequiredKey";
    case Errc::SubtaskIndexOutOfRange: return "SubtaskIndexOutOfRange";
    case Errc::UnknownStage: return "UnknownStage";
    case Errc::BadStageParams: return "BadStageParams";
    case Errc::BadTarget: return "BadTarget";
    case Errc::BadK: return "BadK";
    case Errc::MissingTexts: return "MissingTexts";
    case Errc::NonQuadBox: return "NonQuadBox";
    case Errc::TokenTagLengthMismatch: return "TokenTagLengthMismatch";
    case Errc::DanglingReference: return "DanglingReference";
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::NotAPermutation: return "NotAPermutation";
    case Errc::NonConvexPolygon: return "NonConvexPolygon";
    case Errc::IoError: return "IoError";
  }
  return "UnknownError";
}

}  // namespace davar
