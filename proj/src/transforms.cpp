#include "davarlabel/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <set>

#include "davarlabel/errors.hpp"

namespace davar {

// ---------------------------------------------------------------------------
// UTF-8 / vocabulary
// ---------------------------------------------------------------------------

std::vector<char32_t> utf8_codepoints(const std::string& text) {
  std::vector<char32_t> out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    const unsigned char b0 = text[i];
    std::size_t len = 1;
    char32_t cp = 0xFFFD;
    if (b0 < 0x80) {
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    } else {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    if (i + len > n) {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    bool ok = true;
    for (std::size_t k = 1; k < len; ++k) {
      const unsigned char bk = text[i + k];
      if ((bk & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (bk & 0x3F);
    }
    if (!ok) {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

CharVocab::CharVocab(const std::vector<std::string>& chars) {
  std::int32_t next = 1;
  for (const auto& s : chars) {
    const auto cps = utf8_codepoints(s);
    if (cps.size() != 1) {
      throw Error(Errc::BadStageParams,
                  "vocabulary entry '" + s + "' is not a single character");
    }
    if (codes_.emplace(cps[0], next).second) ++next;
  }
}

CharVocab CharVocab::from_string(const std::string& chars) {
  CharVocab v;
  std::int32_t next = 1;
  for (char32_t cp : utf8_codepoints(chars)) {
    if (v.codes_.emplace(cp, next).second) ++next;
  }
  return v;
}

std::int32_t CharVocab::code_of(char32_t cp) const {
  auto it = codes_.find(cp);
  return it == codes_.end() ? 0 : it->second;
}

nlohmann::json CharGrid::to_json() const {
  return {{"height", height}, {"width", width}, {"cells", cells}};
}

// ---------------------------------------------------------------------------
// Geometric transforms
// ---------------------------------------------------------------------------

namespace {

// Apply fn to every box of both levels, leaving all other arrays alone.
template <typename Fn>
ImageRecord map_boxes(const ImageRecord& r, Fn&& fn) {
  ImageRecord out = r;
  for (auto& b : out.content_ann.bboxes) b = fn(b);
  if (out.content_ann2) {
    for (auto& b : out.content_ann2->bboxes) b = fn(b);
  }
  return out;
}

// Keep the first vertex, reverse the rest of the cycle. Restores canonical
// winding after a mirror while staying an exact involution.
void reverse_cycle_keep_first(std::vector<double>& flat) {
  const std::size_t n = flat.size() / 2;
  for (std::size_t i = 1, j = n - 1; i < j; ++i, --j) {
    std::swap(flat[2 * i], flat[2 * j]);
    std::swap(flat[2 * i + 1], flat[2 * j + 1]);
  }
}

GeoBox flip_box(const GeoBox& b, bool horizontal, double extent) {
  if (b.is_axis_aligned()) {
    GeoBox out = b;
    if (horizontal) {
      out.points[0] = extent - b.points[2];
      out.points[2] = extent - b.points[0];
    } else {
      out.points[1] = extent - b.points[3];
      out.points[3] = extent - b.points[1];
    }
    return out;
  }
  GeoBox out = b;
  for (std::size_t i = horizontal ? 0 : 1; i < out.points.size(); i += 2) {
    out.points[i] = extent - out.points[i];
  }
  reverse_cycle_keep_first(out.points);
  return out;
}

// One clockwise quarter-turn: (x, y) -> (h - y, x), dims (w, h) -> (h, w).
GeoBox rotate_box_cw(const GeoBox& b, double height) {
  if (b.is_axis_aligned()) {
    const double x1 = height - b.points[3];
    const double x2 = height - b.points[1];
    return GeoBox{{x1, b.points[0], x2, b.points[2]}};
  }
  GeoBox out = b;
  for (std::size_t i = 0; i + 1 < b.points.size(); i += 2) {
    out.points[i] = height - b.points[i + 1];
    out.points[i + 1] = b.points[i];
  }
  return out;
}

}  // namespace

ImageRecord apply_resize(const ImageRecord& r, std::int64_t target_w,
                         std::int64_t target_h) {
  if (target_w <= 0 || target_h <= 0) {
    throw Error(Errc::BadTarget, "resize target must be positive, got " +
                                     std::to_string(target_w) + "x" +
                                     std::to_string(target_h));
  }
  const double sx = static_cast<double>(target_w) / static_cast<double>(r.width);
  const double sy =
      static_cast<double>(target_h) / static_cast<double>(r.height);
  ImageRecord out = map_boxes(r, [&](const GeoBox& b) {
    GeoBox scaled = b;
    for (std::size_t i = 0; i < scaled.points.size(); i += 2) {
      scaled.points[i] *= sx;
      if (i + 1 < scaled.points.size()) scaled.points[i + 1] *= sy;
    }
    return scaled;
  });
  out.width = target_w;
  out.height = target_h;
  return out;
}

ImageRecord apply_hflip(const ImageRecord& r) {
  const double w = static_cast<double>(r.width);
  return map_boxes(r, [&](const GeoBox& b) { return flip_box(b, true, w); });
}

ImageRecord apply_vflip(const ImageRecord& r) {
  const double h = static_cast<double>(r.height);
  return map_boxes(r, [&](const GeoBox& b) { return flip_box(b, false, h); });
}

ImageRecord apply_rotate90(const ImageRecord& r, int k) {
  if (k < 1 || k > 3) {
    throw Error(Errc::BadK, "quarter-turn count must be in {1,2,3}, got " +
                                std::to_string(k));
  }
  ImageRecord out = r;
  for (int turn = 0; turn < k; ++turn) {
    const double h = static_cast<double>(out.height);
    ImageRecord next =
        map_boxes(out, [&](const GeoBox& b) { return rotate_box_cw(b, h); });
    std::swap(next.width, next.height);
    out = std::move(next);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Chargrid
// ---------------------------------------------------------------------------

CharGrid chargrid_rasterize(const ImageRecord& r, const CharVocab& vocab,
                            std::int64_t out_w, std::int64_t out_h) {
  if (vocab.empty()) {
    throw Error(Errc::BadStageParams, "character vocabulary is empty");
  }
  if (out_w <= 0 || out_h <= 0) {
    throw Error(Errc::BadStageParams, "grid size must be positive");
  }
  if (!r.content_ann.texts) {
    throw Error(Errc::MissingTexts, "chargrid requires texts");
  }
  CharGrid grid;
  grid.width = out_w;
  grid.height = out_h;
  grid.cells.assign(static_cast<std::size_t>(out_w * out_h), 0);

  const double sx = static_cast<double>(out_w) / static_cast<double>(r.width);
  const double sy = static_cast<double>(out_h) / static_cast<double>(r.height);
  const auto& texts = *r.content_ann.texts;
  const std::size_t n =
      std::min(r.content_ann.bboxes.size(), texts.size());

  for (std::size_t i = 0; i < n; ++i) {
    const auto hull = axis_hull(r.content_ann.bboxes[i]);
    const double gx0 = hull[0] * sx, gx1 = hull[2] * sx;
    const double gy0 = hull[1] * sy, gy1 = hull[3] * sy;
    const auto cps = utf8_codepoints(texts[i]);
    if (cps.empty()) continue;
    const double slice_w = (gx1 - gx0) / static_cast<double>(cps.size());
    // Rows whose center can fall inside the box, padded by one for safety;
    // the per-cell predicate below is what actually decides.
    const std::int64_t row_lo =
        std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(gy0)) - 1);
    const std::int64_t row_hi = std::min<std::int64_t>(
        out_h - 1, static_cast<std::int64_t>(std::ceil(gy1)) + 1);
    for (std::size_t c = 0; c < cps.size(); ++c) {
      const std::int32_t code = vocab.code_of(cps[c]);
      const double x_lo = gx0 + slice_w * static_cast<double>(c);
      const double x_hi = gx0 + slice_w * static_cast<double>(c + 1);
      const std::int64_t col_lo = std::max<std::int64_t>(
          0, static_cast<std::int64_t>(std::floor(x_lo)) - 1);
      const std::int64_t col_hi = std::min<std::int64_t>(
          out_w - 1, static_cast<std::int64_t>(std::ceil(x_hi)) + 1);
      for (std::int64_t row = row_lo; row <= row_hi; ++row) {
        const double cy = static_cast<double>(row) + 0.5;
        if (!(cy >= gy0 && cy < gy1)) continue;
        for (std::int64_t col = col_lo; col <= col_hi; ++col) {
          const double cx = static_cast<double>(col) + 0.5;
          if (cx >= x_lo && cx < x_hi) {
            grid.cells[static_cast<std::size_t>(row * out_w + col)] = code;
          }
        }
      }
    }
  }
  return grid;
}

TaskSample select_keys(const ImageRecord& r, TaskKind task) {
  return project(r, task);
}

// ---------------------------------------------------------------------------
// Stage registry and pipeline
// ---------------------------------------------------------------------------

namespace {

struct Registry {
  std::map<std::string, StageFactory> factories;
  std::mutex mutex;

  Registry();  // seeds the built-in stages
};

Registry& registry() {
  static Registry reg;
  return reg;
}

[[noreturn]] void bad_params(const std::string& stage, const std::string& why) {
  throw Error(Errc::BadStageParams, stage + ": " + why);
}

// Strict param reader: every declared key consumed, no strays tolerated.
class ParamReader {
 public:
  ParamReader(const std::string& stage, const nlohmann::json& params)
      : stage_(stage), params_(params) {
    if (!params.is_object()) bad_params(stage_, "params must be an object");
  }

  std::int64_t require_int(const std::string& key) {
    seen_.insert(key);
    if (!params_.contains(key)) bad_params(stage_, "missing param '" + key + "'");
    const auto& v = params_.at(key);
    if (!v.is_number_integer() && !v.is_number_unsigned()) {
      bad_params(stage_, "param '" + key + "' must be an integer");
    }
    return v.get<std::int64_t>();
  }

  std::string require_string(const std::string& key) {
    seen_.insert(key);
    if (!params_.contains(key)) bad_params(stage_, "missing param '" + key + "'");
    const auto& v = params_.at(key);
    if (!v.is_string()) bad_params(stage_, "param '" + key + "' must be a string");
    return v.get<std::string>();
  }

  nlohmann::json take(const std::string& key) {
    seen_.insert(key);
    if (!params_.contains(key)) bad_params(stage_, "missing param '" + key + "'");
    return params_.at(key);
  }

  void finish() {
    for (const auto& [key, value] : params_.items()) {
      if (!seen_.count(key)) bad_params(stage_, "unknown param '" + key + "'");
    }
  }

 private:
  std::string stage_;
  const nlohmann::json& params_;
  std::set<std::string> seen_;
};

const ImageRecord& require_record_input(const PipelineValue& v,
                                        const std::string& stage) {
  if (v.sample) {
    bad_params(stage, "stage requires a record input but a task sample was "
                      "already selected");
  }
  return v.record;
}

CharVocab vocab_from_param(const std::string& stage, const nlohmann::json& v) {
  if (v.is_string()) return CharVocab::from_string(v.get<std::string>());
  if (v.is_array()) {
    std::vector<std::string> chars;
    for (const auto& item : v) {
      if (!item.is_string()) {
        bad_params(stage, "vocab entries must be strings");
      }
      chars.push_back(item.get<std::string>());
    }
    return CharVocab(chars);
  }
  bad_params(stage, "vocab must be a string or an array of characters");
}

void add_builtins(std::map<std::string, StageFactory>& factories);

Registry::Registry() { add_builtins(factories); }

void add_builtins(std::map<std::string, StageFactory>& factories) {
  const auto add = [&factories](const std::string& name, StageFactory f) {
    factories.emplace(name, std::move(f));
  };
  add("Resize", [](const nlohmann::json& params) -> StageFn {
    ParamReader reader("Resize", params);
    const auto w = reader.require_int("width");
    const auto h = reader.require_int("height");
    reader.finish();
    if (w <= 0 || h <= 0) bad_params("Resize", "width/height must be positive");
    return [w, h](PipelineValue& v, const StageContext&) {
      v.record = apply_resize(require_record_input(v, "Resize"), w, h);
    };
  });
  add("HFlip", [](const nlohmann::json& params) -> StageFn {
    ParamReader("HFlip", params).finish();
    return [](PipelineValue& v, const StageContext&) {
      v.record = apply_hflip(require_record_input(v, "HFlip"));
    };
  });
  add("VFlip", [](const nlohmann::json& params) -> StageFn {
    ParamReader("VFlip", params).finish();
    return [](PipelineValue& v, const StageContext&) {
      v.record = apply_vflip(require_record_input(v, "VFlip"));
    };
  });
  add("Rotate90", [](const nlohmann::json& params) -> StageFn {
    ParamReader reader("Rotate90", params);
    const auto k = reader.require_int("k");
    reader.finish();
    if (k < 1 || k > 3) bad_params("Rotate90", "k must be in {1,2,3}");
    return [k](PipelineValue& v, const StageContext&) {
      v.record = apply_rotate90(require_record_input(v, "Rotate90"),
                                static_cast<int>(k));
    };
  });
  add("ChargridRasterize", [](const nlohmann::json& params) -> StageFn {
    ParamReader reader("ChargridRasterize", params);
    const auto w = reader.require_int("width");
    const auto h = reader.require_int("height");
    const auto vocab = vocab_from_param("ChargridRasterize", reader.take("vocab"));
    reader.finish();
    if (w <= 0 || h <= 0) {
      bad_params("ChargridRasterize", "width/height must be positive");
    }
    if (vocab.empty()) bad_params("ChargridRasterize", "vocab is empty");
    return [w, h, vocab](PipelineValue& v, const StageContext&) {
      v.chargrid = chargrid_rasterize(require_record_input(v, "ChargridRasterize"),
                                      vocab, w, h);
    };
  });
  add("SelectKeys", [](const nlohmann::json& params) -> StageFn {
    ParamReader reader("SelectKeys", params);
    const auto name = reader.require_string("task");
    reader.finish();
    const auto task = task_from_name(name);
    if (!task) bad_params("SelectKeys", "unknown task '" + name + "'");
    return [task](PipelineValue& v, const StageContext&) {
      v.sample = select_keys(v.record, *task);
    };
  });
}

}  // namespace

bool register_stage(const std::string& name, StageFactory factory) {
  std::lock_guard lock(registry().mutex);
  return registry().factories.emplace(name, std::move(factory)).second;
}

std::vector<std::string> registered_stage_names() {
  std::lock_guard lock(registry().mutex);
  std::vector<std::string> names;
  for (const auto& [name, factory] : registry().factories) {
    names.push_back(name);
  }
  return names;
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) {
    throw Error(Errc::BadStageParams, "pipeline config must be an object");
  }
  PipelineConfig config;
  if (doc.contains("seed")) {
    const auto& seed = doc.at("seed");
    if (!seed.is_number_unsigned() && !seed.is_number_integer()) {
      throw Error(Errc::BadStageParams, "seed must be an unsigned integer");
    }
    config.seed = seed.get<std::uint64_t>();
  }
  if (!doc.contains("stages") || !doc.at("stages").is_array()) {
    throw Error(Errc::BadStageParams, "config requires a 'stages' array");
  }
  for (const auto& stage : doc.at("stages")) {
    if (!stage.is_object() || !stage.contains("type") ||
        !stage.at("type").is_string()) {
      throw Error(Errc::BadStageParams,
                  "each stage needs a string 'type' field");
    }
    StageConfig sc;
    sc.type = stage.at("type").get<std::string>();
    sc.params = nlohmann::json::object();
    for (const auto& [key, value] : stage.items()) {
      if (key != "type") sc.params[key] = value;
    }
    config.stages.push_back(std::move(sc));
  }
  return config;
}

Pipeline build_pipeline(const PipelineConfig& config) {
  if (config.stages.empty()) {
    throw Error(Errc::BadStageParams, "pipeline requires at least one stage");
  }
  Pipeline p;
  p.seed_ = config.seed;
  for (const auto& stage : config.stages) {
    StageFactory factory;
    {
      std::lock_guard lock(registry().mutex);
      auto it = registry().factories.find(stage.type);
      if (it == registry().factories.end()) {
        throw Error(Errc::UnknownStage,
                    "no stage registered under '" + stage.type + "'");
      }
      factory = it->second;
    }
    p.stages_.emplace_back(stage.type, factory(stage.params));
  }
  return p;
}

PipelineValue Pipeline::run(const ImageRecord& r,
                            const std::string& image_path) const {
  PipelineValue value{r, std::nullopt, std::nullopt};
  StageContext ctx{seed_, image_path};
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    try {
      stages_[i].second(value, ctx);
    } catch (const Error& e) {
      throw Error(e.code(), "stage " + std::to_string(i) + " (" +
                                stages_[i].first + "): " + e.message());
    }
  }
  return value;
}

nlohmann::json PipelineValue::to_json() const {
  if (sample) {
    nlohmann::json obj = sample->to_json();
    if (chargrid) obj["chargrid"] = chargrid->to_json();
    return obj;
  }
  nlohmann::json obj = record_to_json(record);
  if (chargrid) obj["chargrid"] = chargrid->to_json();
  return obj;
}

}  // namespace davar
