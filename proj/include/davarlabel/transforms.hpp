#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "davarlabel/schema.hpp"
#include "davarlabel/tasks.hpp"

namespace davar {

/// Character-level segmentation grid: 0 = background, k >= 1 = index + 1
/// into the character vocabulary. Cells are row-major.
struct CharGrid {
  std::int64_t height = 0;
  std::int64_t width = 0;
  std::vector<std::int32_t> cells;

  std::int32_t at(std::int64_t row, std::int64_t col) const {
    return cells[static_cast<std::size_t>(row * width + col)];
  }
  nlohmann::json to_json() const;
  bool operator==(const CharGrid&) const = default;
};

/// Ordered character vocabulary; code for a character is its index + 1,
/// characters are Unicode code points. Absent characters paint background.
class CharVocab {
 public:
  CharVocab() = default;
  /// One entry per element; each element must be a single code point.
  explicit CharVocab(const std::vector<std::string>& chars);
  /// Each code point of `chars` becomes one entry, in order.
  static CharVocab from_string(const std::string& chars);

  std::size_t size() const { return codes_.size(); }
  bool empty() const { return codes_.empty(); }
  /// 1-based code of a code point, 0 when absent.
  std::int32_t code_of(char32_t cp) const;

 private:
  std::map<char32_t, std::int32_t> codes_;
};

/// Split UTF-8 text into Unicode code points. Invalid bytes decode as
/// U+FFFD, one per offending byte.
std::vector<char32_t> utf8_codepoints(const std::string& text);

// ---------------------------------------------------------------------------
// Standalone record transforms
// ---------------------------------------------------------------------------

/// Scale every box of both annotation levels by (target_w/width,
/// target_h/height) and replace the dimensions; everything else untouched.
/// Throws Error(BadTarget) for non-positive targets.
ImageRecord apply_resize(const ImageRecord& r, std::int64_t target_w,
                         std::int64_t target_h);

/// Mirror horizontally: x -> width - x. Polygons keep their first vertex
/// and reverse the rest of the cycle so the winding stays canonical; the
/// transform is an exact involution.
ImageRecord apply_hflip(const ImageRecord& r);

/// Mirror vertically: y -> height - y. Same winding rule as apply_hflip.
ImageRecord apply_vflip(const ImageRecord& r);

/// Rotate by k quarter-turns clockwise (k in {1,2,3}); dims swap for odd k.
/// Throws Error(BadK) otherwise.
ImageRecord apply_rotate90(const ImageRecord& r, int k);

/// Rasterize per-box texts into an out_w x out_h grid. Each box's text of
/// length L is split into L equal-width slices across the box's axis-
/// aligned extent; a cell is painted when its center falls in the slice.
/// Boxes paint in annotation order, last writer wins. Throws
/// Error(MissingTexts) when the record has no texts and
/// Error(BadStageParams) for an empty vocabulary or non-positive size.
CharGrid chargrid_rasterize(const ImageRecord& r, const CharVocab& vocab,
                            std::int64_t out_w, std::int64_t out_h);

/// Delegates to task-views project().
TaskSample select_keys(const ImageRecord& r, TaskKind task);

// ---------------------------------------------------------------------------
// Config-driven pipeline
// ---------------------------------------------------------------------------

struct StageConfig {
  std::string type;
  nlohmann::json params = nlohmann::json::object();
};

struct PipelineConfig {
  std::vector<StageConfig> stages;
  std::uint64_t seed = 0;

  /// Parse {"seed": u64, "stages": [{"type": name, ...params}]}.
  static PipelineConfig from_json(const nlohmann::json& doc);
};

/// What flows between stages: the record, plus a chargrid and/or task
/// sample once the corresponding stages have run.
struct PipelineValue {
  ImageRecord record;
  std::optional<CharGrid> chargrid;
  std::optional<TaskSample> sample;

  nlohmann::json to_json() const;
};

/// Context a stage may consult; v1 stages are deterministic, but any future
/// randomized stage must derive its randomness from (seed, image_path).
struct StageContext {
  std::uint64_t seed = 0;
  std::string image_path;
};

using StageFn = std::function<void(PipelineValue&, const StageContext&)>;
using StageFactory = std::function<StageFn(const nlohmann::json& params)>;

/// Register a stage factory under a name; returns false when the name is
/// taken. Built-ins: Resize, HFlip, VFlip, Rotate90, ChargridRasterize,
/// SelectKeys.
bool register_stage(const std::string& name, StageFactory factory);
std::vector<std::string> registered_stage_names();

class Pipeline {
 public:
  /// Run all stages in order; stage errors are rethrown with the stage
  /// index and name attached, keeping the original code.
  PipelineValue run(const ImageRecord& r,
                    const std::string& image_path = {}) const;

  std::size_t stage_count() const { return stages_.size(); }
  std::uint64_t seed() const { return seed_; }

 private:
  friend Pipeline build_pipeline(const PipelineConfig& config);
  std::vector<std::pair<std::string, StageFn>> stages_;
  std::uint64_t seed_ = 0;
};

/// Build an executable pipeline; side-effect free. Throws
/// Error(UnknownStage) or Error(BadStageParams).
Pipeline build_pipeline(const PipelineConfig& config);

}  // namespace davar
