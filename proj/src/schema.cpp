#include "davarlabel/schema.hpp"

#include <utility>

#include "davarlabel/canonical_json.hpp"
#include "davarlabel/errors.hpp"

namespace davar {

namespace {

using nlohmann::json;

[[noreturn]] void shape_error(const std::string& path, const std::string& what) {
  throw Error(Errc::SchemaShapeError, "record '" + path + "': " + what);
}

GeoBox parse_box(const json& v, const std::string& path, const char* level,
                 std::size_t index) {
  if (!v.is_array()) {
    shape_error(path, std::string(level) + ".bboxes[" + std::to_string(index) +
                          "] is not an array");
  }
  GeoBox box;
  box.points.reserve(v.size());
  for (const auto& coord : v) {
    if (!coord.is_number()) {
      shape_error(path, std::string(level) + ".bboxes[" +
                            std::to_string(index) +
                            "] contains a non-numeric coordinate");
    }
    box.points.push_back(coord.get<double>());
  }
  return box;
}

ContentAnn parse_content_ann(const json& v, const std::string& path,
                             const char* level) {
  if (!v.is_object()) {
    shape_error(path, std::string(level) + " is not an object");
  }
  ContentAnn ann;
  for (const auto& [key, value] : v.items()) {
    if (!value.is_array()) {
      shape_error(path, std::string(level) + "." + key + " is not an array");
    }
    if (key == "bboxes") {
      ann.has_bboxes = true;
      ann.bboxes.reserve(value.size());
      for (std::size_t i = 0; i < value.size(); ++i) {
        ann.bboxes.push_back(parse_box(value[i], path, level, i));
      }
    } else if (key == "texts") {
      std::vector<std::string> texts;
      texts.reserve(value.size());
      for (std::size_t i = 0; i < value.size(); ++i) {
        if (!value[i].is_string()) {
          shape_error(path, std::string(level) + ".texts[" +
                                std::to_string(i) + "] is not a string");
        }
        texts.push_back(value[i].get<std::string>());
      }
      ann.texts = std::move(texts);
    } else if (key == "labels") {
      std::vector<LabelEntry> labels;
      labels.reserve(value.size());
      for (std::size_t i = 0; i < value.size(); ++i) {
        LabelEntry entry;
        if (value[i].is_array()) {
          for (const auto& atom : value[i]) {
            if (!atom.is_string()) {
              shape_error(path, std::string(level) + ".labels[" +
                                    std::to_string(i) +
                                    "] contains a non-string category");
            }
            entry.values.push_back(atom.get<std::string>());
          }
        } else if (value[i].is_string()) {
          // 1-D entry: kept so the validator can flag LABELS_NOT_2D.
          entry.is_list = false;
          entry.values.push_back(value[i].get<std::string>());
        } else {
          shape_error(path, std::string(level) + ".labels[" +
                                std::to_string(i) +
                                "] is neither a list nor a string");
        }
        labels.push_back(std::move(entry));
      }
      ann.labels = std::move(labels);
    } else if (key == "cells") {
      std::vector<CellSpan> cells;
      cells.reserve(value.size());
      for (std::size_t i = 0; i < value.size(); ++i) {
        const auto& cell = value[i];
        if (!cell.is_array() || cell.size() != 4) {
          shape_error(path, std::string(level) + ".cells[" +
                                std::to_string(i) +
                                "] is not a 4-integer array");
        }
        CellSpan span{};
        for (std::size_t k = 0; k < 4; ++k) {
          if (!cell[k].is_number_integer() && !cell[k].is_number_unsigned()) {
            shape_error(path, std::string(level) + ".cells[" +
                                  std::to_string(i) +
                                  "] contains a non-integer index");
          }
          span[k] = cell[k].get<std::int64_t>();
        }
        cells.push_back(span);
      }
      ann.cells = std::move(cells);
    } else {
      ann.extras.emplace(key, value);
    }
  }
  return ann;
}

json box_to_json(const GeoBox& b) {
  json arr = json::array();
  for (double v : b.points) arr.push_back(v);
  return arr;
}

}  // namespace

std::size_t ContentAnn::instance_count() const {
  if (has_bboxes) return bboxes.size();
  if (texts) return texts->size();
  if (labels) return labels->size();
  if (cells) return cells->size();
  if (!extras.empty()) return extras.begin()->second.size();
  return 0;
}

bool ContentAnn::has_key(const std::string& key) const {
  if (key == "bboxes") return has_bboxes;
  if (key == "texts") return texts.has_value();
  if (key == "labels") return labels.has_value();
  if (key == "cells") return cells.has_value();
  return extras.count(key) > 0;
}

ImageRecord parse_record(const nlohmann::json& value, const std::string& path) {
  if (!value.is_object()) {
    shape_error(path, "record value is not an object");
  }
  ImageRecord record;
  bool saw_height = false, saw_width = false, saw_ann = false;
  for (const auto& [key, v] : value.items()) {
    if (key == "height" || key == "width") {
      if (!v.is_number_integer() && !v.is_number_unsigned()) {
        shape_error(path, key + " is missing or not an integer");
      }
      const auto dim = v.get<std::int64_t>();
      if (dim <= 0) {
        shape_error(path, key + " must be a positive integer");
      }
      (key == "height" ? record.height : record.width) = dim;
      (key == "height" ? saw_height : saw_width) = true;
    } else if (key == "content_ann") {
      record.content_ann = parse_content_ann(v, path, "content_ann");
      saw_ann = true;
    } else if (key == "content_ann2") {
      record.content_ann2 = parse_content_ann(v, path, "content_ann2");
    } else {
      record.extra_fields.emplace(key, v);
    }
  }
  if (!saw_height) shape_error(path, "height is missing or not an integer");
  if (!saw_width) shape_error(path, "width is missing or not an integer");
  if (!saw_ann) shape_error(path, "content_ann is missing");
  return record;
}

AnnotationSet parse_annotation_file(const std::string& utf8_text) {
  json doc;
  try {
    doc = json::parse(utf8_text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::MalformedJson, e.what());
  }
  if (!doc.is_object()) {
    throw Error(Errc::SchemaShapeError,
                "top level must be an object keyed by image path");
  }
  AnnotationSet set;
  for (const auto& [path, value] : doc.items()) {
    set.records.emplace(path, parse_record(value, path));
  }
  return set;
}

nlohmann::json content_ann_to_json(const ContentAnn& ann) {
  json obj = json::object();
  if (ann.has_bboxes) {
    json arr = json::array();
    for (const auto& b : ann.bboxes) arr.push_back(box_to_json(b));
    obj["bboxes"] = std::move(arr);
  }
  if (ann.texts) obj["texts"] = *ann.texts;
  if (ann.labels) {
    json arr = json::array();
    for (const auto& entry : ann.labels.value()) {
      if (entry.is_list) {
        arr.push_back(entry.values);
      } else {
        arr.push_back(entry.values.empty() ? std::string() : entry.values[0]);
      }
    }
    obj["labels"] = std::move(arr);
  }
  if (ann.cells) {
    json arr = json::array();
    for (const auto& span : ann.cells.value()) {
      arr.push_back(json::array({span[0], span[1], span[2], span[3]}));
    }
    obj["cells"] = std::move(arr);
  }
  for (const auto& [key, value] : ann.extras) obj[key] = value;
  return obj;
}

nlohmann::json record_to_json(const ImageRecord& r) {
  json obj = json::object();
  obj["height"] = r.height;
  obj["width"] = r.width;
  obj["content_ann"] = content_ann_to_json(r.content_ann);
  if (r.content_ann2) obj["content_ann2"] = content_ann_to_json(*r.content_ann2);
  for (const auto& [key, value] : r.extra_fields) obj[key] = value;
  return obj;
}

nlohmann::json set_to_json(const AnnotationSet& s) {
  json obj = json::object();
  for (const auto& [path, record] : s.records) {
    obj[path] = record_to_json(record);
  }
  return obj;
}

std::string serialize_canonical(const AnnotationSet& set) {
  return canonical_dump(set_to_json(set));
}

AnnotationSet merge_sets(const AnnotationSet& a, const AnnotationSet& b) {
  AnnotationSet out = a;
  for (const auto& [path, record] : b.records) {
    auto [it, inserted] = out.records.emplace(path, record);
    if (!inserted) {
      throw Error(Errc::DuplicateImagePath,
                  "image path '" + path + "' exists in both sets");
    }
  }
  return out;
}

}  // namespace davar
