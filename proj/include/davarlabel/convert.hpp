#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "davarlabel/schema.hpp"

namespace davar {

// ---------------------------------------------------------------------------
// COCO-style detection
// ---------------------------------------------------------------------------

struct CocoImage {
  std::int64_t id = 0;
  std::string file_name;
  std::int64_t width = 0;
  std::int64_t height = 0;
};

struct CocoAnnotation {
  std::int64_t id = 0;
  std::int64_t image_id = 0;
  std::int64_t category_id = 0;
  std::array<double, 4> bbox{};            // [x, y, w, h]
  std::vector<std::vector<double>> segmentation;  // flat polygons
  double area = 0.0;
};

struct CocoCategory {
  std::int64_t id = 0;
  std::string name;
};

struct CocoDetectionDoc {
  std::vector<CocoImage> images;
  std::vector<CocoAnnotation> annotations;
  std::vector<CocoCategory> categories;

  nlohmann::json to_json() const;
  static CocoDetectionDoc from_json(const nlohmann::json& doc);
};

/// Export: one image per record, one annotation per box, category taken
/// from labels[i][subtask_index], ids assigned by sorted category name.
/// Polygon boxes carry their vertices as segmentation with the axis hull
/// as bbox; 4-form boxes export with empty segmentation.
CocoDetectionDoc to_coco_detection(const AnnotationSet& s,
                                   std::size_t subtask_index);

/// Inverse of to_coco_detection up to ordering. Throws
/// Error(DanglingReference) for unknown image/category ids and
/// Error(DuplicateId) for repeated ids.
AnnotationSet from_coco_detection(const CocoDetectionDoc& d);

// ---------------------------------------------------------------------------
// ICDAR-style spotting (one text file per image)
// ---------------------------------------------------------------------------

/// Lines "x1,y1,x2,y2,x3,y3,x4,y4,transcription" per box; quadrilaterals
/// only (4-form boxes export as their 4-corner quad). An instance whose
/// extras.cares flag is 0 exports as transcription "###". Throws
/// Error(NonQuadBox) and Error(MissingRequiredKey).
std::map<std::string, std::string> to_icdar_spotting(const AnnotationSet& s);

/// Dims are not representable in ICDAR files: supply them per image path,
/// or the tight integer hull of the quads (minimum 1) is used.
AnnotationSet from_icdar_spotting(
    const std::map<std::string, std::string>& files,
    const std::map<std::string, std::pair<std::int64_t, std::int64_t>>&
        dims_by_path = {});

// ---------------------------------------------------------------------------
// CoNLL-style NER
// ---------------------------------------------------------------------------

/// One "token<TAB>tag" line per token, a blank line between sentences
/// (instances), trailing newline. Requires extras.tokens / extras.tags;
/// throws Error(TokenTagLengthMismatch) when a sentence's lists differ.
std::string ner_to_conll(const ImageRecord& r);

/// Inverse: a record with width = height = 1, one full-image box
/// [0,0,1,1] per sentence, and extras.tokens/extras.tags.
ImageRecord conll_from(const std::string& text);

}  // namespace davar
