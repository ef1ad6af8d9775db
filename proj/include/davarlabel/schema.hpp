#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "davarlabel/geometry.hpp"

namespace davar {

/// One entry of the two-dimensional "labels" list. Well-formed entries are
/// lists of category strings; a bare string is kept as parsed (is_list =
/// false) so the validator can report LABELS_NOT_2D instead of the parser
/// rejecting the file.
struct LabelEntry {
  std::vector<std::string> values;
  bool is_list = true;

  bool operator==(const LabelEntry&) const = default;
};

/// Table cell indexes [start_row, start_col, end_row, end_col].
using CellSpan = std::array<std::int64_t, 4>;

/// The parallel-array instance table of one annotation level. Every present
/// list shares the outer length N (the number of instances); the validator
/// reports violations, construction does not enforce them.
struct ContentAnn {
  std::vector<GeoBox> bboxes;
  bool has_bboxes = false;  // distinguishes [] from an absent key
  std::optional<std::vector<std::string>> texts;
  std::optional<std::vector<LabelEntry>> labels;
  std::optional<std::vector<CellSpan>> cells;
  // Any unrecognized key is kept as an extras array (parallel, any values).
  std::map<std::string, nlohmann::json> extras;

  /// Instance count: bboxes' length when the key is present, otherwise the
  /// first present array in canonical key order.
  std::size_t instance_count() const;
  bool has_key(const std::string& key) const;

  bool operator==(const ContentAnn&) const = default;
};

/// One image's record: dimensions plus one or two annotation levels.
struct ImageRecord {
  std::int64_t height = 0;
  std::int64_t width = 0;
  ContentAnn content_ann;
  std::optional<ContentAnn> content_ann2;
  // Unknown record-level keys, preserved verbatim for round-tripping.
  std::map<std::string, nlohmann::json> extra_fields;

  bool operator==(const ImageRecord&) const = default;
};

/// The on-disk JSON unit: image path -> record, iterated in lexicographic
/// key order.
struct AnnotationSet {
  std::map<std::string, ImageRecord> records;

  bool empty() const { return records.empty(); }
  std::size_t size() const { return records.size(); }

  bool operator==(const AnnotationSet&) const = default;
};

/// Parse the unified annotation file. Structural violations (top level not
/// an object, record not an object, height/width missing/non-integer/non-
/// positive, content_ann not an object of arrays, malformed box/text/cell
/// element types) are rejected here with MalformedJson / SchemaShapeError;
/// semantic violations (length mismatches, bad polygons, 1-D labels) are
/// left to the validator.
AnnotationSet parse_annotation_file(const std::string& utf8_text);

/// Parse one already-decoded record object (the value under an image path).
ImageRecord parse_record(const nlohmann::json& value, const std::string& path);

/// Canonical serialization; see canonical_json.hpp for the byte rules.
std::string serialize_canonical(const AnnotationSet& set);

nlohmann::json record_to_json(const ImageRecord& r);
nlohmann::json set_to_json(const AnnotationSet& s);
nlohmann::json content_ann_to_json(const ContentAnn& ann);

/// Union of two sets; throws Error(DuplicateImagePath) naming the first
/// colliding key in lexicographic order.
AnnotationSet merge_sets(const AnnotationSet& a, const AnnotationSet& b);

}  // namespace davar
