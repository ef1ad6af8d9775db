#pragma once

#include <map>
#include <string>
#include <vector>

#include "davarlabel/schema.hpp"

namespace davar {

enum class Severity { Error, Warning };

std::string_view severity_name(Severity s);

// Fixed diagnostic catalog; codes are stable strings for CI grepping.
//   LENGTH_MISMATCH (Error)   parallel arrays differ in outer length
//   LABELS_NOT_2D   (Error)   a labels element is not a list
//   BAD_POLYGON     (Error)   GeoBox length/area invariant failure
//   OUT_OF_BOUNDS   (Warning) vertex outside [0,width] x [0,height]
//   BAD_CELL        (Error)   cell span violates start <= end (or negative)
//   EMPTY_RECORD    (Warning) record has zero instances
struct Diagnostic {
  Severity severity = Severity::Error;
  std::string code;
  std::string image_path;
  std::string location;  // e.g. "content_ann.bboxes[3]"
  std::string message;

  nlohmann::json to_json() const;
  bool operator==(const Diagnostic&) const = default;
};

struct ValidationReport {
  std::vector<Diagnostic> diagnostics;

  std::size_t error_count() const;
  std::size_t warning_count() const;
  std::map<std::string, std::size_t> counts() const;
  bool clean() const { return diagnostics.empty(); }

  /// One diagnostic per line, canonical compact JSON.
  std::string to_json_lines() const;
};

/// Validate a single record; diagnostics are the output, never exceptions.
/// Emission order is deterministic: per level (content_ann, content_ann2),
/// checks run in catalog order, instances in index order.
std::vector<Diagnostic> validate_record(const std::string& path,
                                        const ImageRecord& r);

/// Concatenation of validate_record over canonical (lexicographic) key order.
ValidationReport validate_set(const AnnotationSet& s);

}  // namespace davar
