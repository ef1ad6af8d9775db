#include "davarlabel/convert.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "davarlabel/errors.hpp"
#include "davarlabel/geometry.hpp"

namespace davar {

namespace {

using nlohmann::json;

json number_or_int(double v) {
  if (v == std::trunc(v) && std::abs(v) <= 9007199254740992.0) {
    return static_cast<std::int64_t>(v);
  }
  return v;
}

json coords_to_json(const std::vector<double>& pts) {
  json arr = json::array();
  for (double v : pts) arr.push_back(number_or_int(v));
  return arr;
}

}  // namespace

// ---------------------------------------------------------------------------
// COCO
// ---------------------------------------------------------------------------

nlohmann::json CocoDetectionDoc::to_json() const {
  json doc;
  doc["images"] = json::array();
  for (const auto& img : images) {
    doc["images"].push_back({{"id", img.id},
                             {"file_name", img.file_name},
                             {"width", img.width},
                             {"height", img.height}});
  }
  doc["annotations"] = json::array();
  for (const auto& ann : annotations) {
    json seg = json::array();
    for (const auto& poly : ann.segmentation) seg.push_back(coords_to_json(poly));
    doc["annotations"].push_back({{"id", ann.id},
                                  {"image_id", ann.image_id},
                                  {"category_id", ann.category_id},
                                  {"bbox", coords_to_json({ann.bbox[0], ann.bbox[1],
                                                           ann.bbox[2], ann.bbox[3]})},
                                  {"segmentation", seg},
                                  {"area", number_or_int(ann.area)}});
  }
  doc["categories"] = json::array();
  for (const auto& cat : categories) {
    doc["categories"].push_back({{"id", cat.id}, {"name", cat.name}});
  }
  return doc;
}

CocoDetectionDoc CocoDetectionDoc::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) {
    throw Error(Errc::SchemaShapeError, "COCO document must be an object");
  }
  CocoDetectionDoc out;
  for (const auto& img : doc.value("images", json::array())) {
    CocoImage ci;
    ci.id = img.at("id").get<std::int64_t>();
    ci.file_name = img.at("file_name").get<std::string>();
    ci.width = img.at("width").get<std::int64_t>();
    ci.height = img.at("height").get<std::int64_t>();
    out.images.push_back(std::move(ci));
  }
  for (const auto& ann : doc.value("annotations", json::array())) {
    CocoAnnotation ca;
    ca.id = ann.at("id").get<std::int64_t>();
    ca.image_id = ann.at("image_id").get<std::int64_t>();
    ca.category_id = ann.at("category_id").get<std::int64_t>();
    const auto& bbox = ann.at("bbox");
    if (!bbox.is_array() || bbox.size() != 4) {
      throw Error(Errc::SchemaShapeError, "COCO bbox must have 4 numbers");
    }
    for (std::size_t i = 0; i < 4; ++i) ca.bbox[i] = bbox[i].get<double>();
    for (const auto& poly : ann.value("segmentation", json::array())) {
      std::vector<double> flat;
      for (const auto& v : poly) flat.push_back(v.get<double>());
      ca.segmentation.push_back(std::move(flat));
    }
    ca.area = ann.value("area", 0.0);
    out.annotations.push_back(std::move(ca));
  }
  for (const auto& cat : doc.value("categories", json::array())) {
    out.categories.push_back(
        {cat.at("id").get<std::int64_t>(), cat.at("name").get<std::string>()});
  }
  return out;
}

CocoDetectionDoc to_coco_detection(const AnnotationSet& s,
                                   std::size_t subtask_index) {
  // First pass: the category universe, ids by sorted name.
  std::set<std::string> names;
  for (const auto& [path, record] : s.records) {
    const auto& ann = record.content_ann;
    if (!ann.has_bboxes || !ann.labels) {
      throw Error(Errc::MissingRequiredKey,
                  "record '" + path + "' needs bboxes and labels");
    }
    for (std::size_t i = 0; i < ann.labels->size(); ++i) {
      const auto& values = (*ann.labels)[i].values;
      if (subtask_index >= values.size()) {
        throw Error(Errc::SubtaskIndexOutOfRange,
                    "record '" + path + "' labels[" + std::to_string(i) +
                        "] has arity " + std::to_string(values.size()));
      }
      names.insert(values[subtask_index]);
    }
  }
  CocoDetectionDoc doc;
  std::map<std::string, std::int64_t> category_id;
  for (const auto& name : names) {
    const auto id = static_cast<std::int64_t>(doc.categories.size()) + 1;
    doc.categories.push_back({id, name});
    category_id[name] = id;
  }
  std::int64_t next_ann_id = 1;
  for (const auto& [path, record] : s.records) {
    const auto image_id = static_cast<std::int64_t>(doc.images.size()) + 1;
    doc.images.push_back({image_id, path, record.width, record.height});
    const auto& ann = record.content_ann;
    const std::size_t n = std::min(ann.bboxes.size(), ann.labels->size());
    for (std::size_t i = 0; i < n; ++i) {
      const GeoBox& box = ann.bboxes[i];
      CocoAnnotation ca;
      ca.id = next_ann_id++;
      ca.image_id = image_id;
      ca.category_id = category_id.at((*ann.labels)[i].values[subtask_index]);
      const auto hull = axis_hull(box);
      ca.bbox = {hull[0], hull[1], hull[2] - hull[0], hull[3] - hull[1]};
      if (box.is_polygon()) {
        ca.segmentation.push_back(box.points);
      }
      ca.area = box_area(box);
      doc.annotations.push_back(std::move(ca));
    }
  }
  return doc;
}

AnnotationSet from_coco_detection(const CocoDetectionDoc& d) {
  std::map<std::int64_t, std::string> category_name;
  for (const auto& cat : d.categories) {
    if (!category_name.emplace(cat.id, cat.name).second) {
      throw Error(Errc::DuplicateId,
                  "category id " + std::to_string(cat.id) + " repeats");
    }
  }
  std::map<std::int64_t, std::string> image_path;
  AnnotationSet set;
  for (const auto& img : d.images) {
    if (!image_path.emplace(img.id, img.file_name).second) {
      throw Error(Errc::DuplicateId,
                  "image id " + std::to_string(img.id) + " repeats");
    }
    ImageRecord record;
    record.width = img.width;
    record.height = img.height;
    record.content_ann.has_bboxes = true;
    record.content_ann.labels.emplace();
    auto [it, inserted] = set.records.emplace(img.file_name, std::move(record));
    if (!inserted) {
      throw Error(Errc::DuplicateImagePath,
                  "file_name '" + img.file_name + "' repeats");
    }
  }
  std::set<std::int64_t> ann_ids;
  for (const auto& ann : d.annotations) {
    if (!ann_ids.insert(ann.id).second) {
      throw Error(Errc::DuplicateId,
                  "annotation id " + std::to_string(ann.id) + " repeats");
    }
    const auto img = image_path.find(ann.image_id);
    if (img == image_path.end()) {
      throw Error(Errc::DanglingReference,
                  "annotation " + std::to_string(ann.id) +
                      " references unknown image_id " +
                      std::to_string(ann.image_id));
    }
    const auto cat = category_name.find(ann.category_id);
    if (cat == category_name.end()) {
      throw Error(Errc::DanglingReference,
                  "annotation " + std::to_string(ann.id) +
                      " references unknown category_id " +
                      std::to_string(ann.category_id));
    }
    auto& content = set.records.at(img->second).content_ann;
    if (!ann.segmentation.empty()) {
      content.bboxes.push_back(GeoBox{ann.segmentation[0]});
    } else {
      content.bboxes.push_back(GeoBox{{ann.bbox[0], ann.bbox[1],
                                       ann.bbox[0] + ann.bbox[2],
                                       ann.bbox[1] + ann.bbox[3]}});
    }
    LabelEntry entry;
    entry.values.push_back(cat->second);
    content.labels->push_back(std::move(entry));
  }
  return set;
}

// ---------------------------------------------------------------------------
// ICDAR spotting
// ---------------------------------------------------------------------------

namespace {

void append_coord(std::string& out, double v) {
  char buf[64];
  if (v == std::trunc(v) && std::abs(v) <= 9007199254740992.0) {
    auto [p, ec] =
        std::to_chars(buf, buf + sizeof(buf), static_cast<std::int64_t>(v));
    out.append(buf, p);
  } else {
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, p);
  }
}

std::array<double, 8> quad_of(const GeoBox& box, const std::string& path,
                              std::size_t index) {
  if (box.is_axis_aligned()) {
    const double x1 = box.points[0], y1 = box.points[1];
    const double x2 = box.points[2], y2 = box.points[3];
    return {x1, y1, x2, y1, x2, y2, x1, y2};
  }
  if (box.coord_count() != 8) {
    throw Error(Errc::NonQuadBox,
                "record '" + path + "' bboxes[" + std::to_string(index) +
                    "] has " + std::to_string(box.vertex_count()) +
                    " vertices; spotting export needs quadrilaterals");
  }
  std::array<double, 8> quad{};
  std::copy(box.points.begin(), box.points.end(), quad.begin());
  return quad;
}

}  // namespace

std::map<std::string, std::string> to_icdar_spotting(const AnnotationSet& s) {
  std::map<std::string, std::string> out;
  for (const auto& [path, record] : s.records) {
    const auto& ann = record.content_ann;
    if (!ann.has_bboxes || !ann.texts) {
      throw Error(Errc::MissingRequiredKey,
                  "record '" + path + "' needs bboxes and texts");
    }
    const auto cares = ann.extras.find("cares");
    std::string lines;
    const std::size_t n = std::min(ann.bboxes.size(), ann.texts->size());
    for (std::size_t i = 0; i < n; ++i) {
      const auto quad = quad_of(ann.bboxes[i], path, i);
      for (double v : quad) {
        append_coord(lines, v);
        lines += ',';
      }
      bool care = true;
      if (cares != ann.extras.end() && i < cares->second.size()) {
        const auto& flag = cares->second[i];
        care = !(flag.is_number() && flag.get<double>() == 0.0);
      }
      lines += care ? (*ann.texts)[i] : "###";
      lines += '\n';
    }
    out.emplace(path, std::move(lines));
  }
  return out;
}

AnnotationSet from_icdar_spotting(
    const std::map<std::string, std::string>& files,
    const std::map<std::string, std::pair<std::int64_t, std::int64_t>>&
        dims_by_path) {
  AnnotationSet set;
  for (const auto& [path, content] : files) {
    ImageRecord record;
    auto& ann = record.content_ann;
    ann.has_bboxes = true;
    ann.texts.emplace();
    std::vector<std::int64_t> cares;
    bool any_ignored = false;
    double max_x = 0.0, max_y = 0.0;

    std::istringstream stream(content);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(stream, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      GeoBox box;
      std::size_t pos = 0;
      for (int field = 0; field < 8; ++field) {
        const std::size_t comma = line.find(',', pos);
        if (comma == std::string::npos) {
          throw Error(Errc::SchemaShapeError,
                      path + ":" + std::to_string(line_no) +
                          ": expected 8 coordinates and a transcription");
        }
        const std::string token = line.substr(pos, comma - pos);
        try {
          box.points.push_back(std::stod(token));
        } catch (const std::exception&) {
          throw Error(Errc::SchemaShapeError,
                      path + ":" + std::to_string(line_no) +
                          ": bad coordinate '" + token + "'");
        }
        pos = comma + 1;
      }
      const std::string transcription = line.substr(pos);
      for (std::size_t i = 0; i < 8; i += 2) {
        max_x = std::max(max_x, box.points[i]);
        max_y = std::max(max_y, box.points[i + 1]);
      }
      ann.bboxes.push_back(std::move(box));
      ann.texts->push_back(transcription);
      const bool care = transcription != "###";
      cares.push_back(care ? 1 : 0);
      any_ignored |= !care;
    }
    if (any_ignored) {
      ann.extras["cares"] = cares;
    }
    const auto dims = dims_by_path.find(path);
    if (dims != dims_by_path.end()) {
      record.width = dims->second.first;
      record.height = dims->second.second;
    } else {
      record.width = std::max<std::int64_t>(
          1, static_cast<std::int64_t>(std::ceil(max_x)));
      record.height = std::max<std::int64_t>(
          1, static_cast<std::int64_t>(std::ceil(max_y)));
    }
    set.records.emplace(path, std::move(record));
  }
  return set;
}

// ---------------------------------------------------------------------------
// CoNLL NER
// ---------------------------------------------------------------------------

std::string ner_to_conll(const ImageRecord& r) {
  const auto tokens_it = r.content_ann.extras.find("tokens");
  const auto tags_it = r.content_ann.extras.find("tags");
  if (tokens_it == r.content_ann.extras.end() ||
      tags_it == r.content_ann.extras.end()) {
    throw Error(Errc::MissingRequiredKey,
                "NER export needs extras.tokens and extras.tags");
  }
  const auto& tokens = tokens_it->second;
  const auto& tags = tags_it->second;
  if (tokens.size() != tags.size()) {
    throw Error(Errc::TokenTagLengthMismatch,
                "tokens and tags differ in sentence count");
  }
  // Two accepted shapes: a flat list of token strings (one sentence), or
  // one token list per instance (one sentence each).
  const bool flat =
      !tokens.empty() && std::all_of(tokens.begin(), tokens.end(),
                                     [](const auto& t) { return t.is_string(); });
  nlohmann::json sentences_tokens = nlohmann::json::array();
  nlohmann::json sentences_tags = nlohmann::json::array();
  if (flat) {
    sentences_tokens.push_back(tokens);
    sentences_tags.push_back(tags);
  } else {
    sentences_tokens = tokens;
    sentences_tags = tags;
  }
  std::string out;
  for (std::size_t s = 0; s < sentences_tokens.size(); ++s) {
    const auto& sent_tokens = sentences_tokens[s];
    const auto& sent_tags = sentences_tags[s];
    if (!sent_tokens.is_array() || !sent_tags.is_array() ||
        sent_tokens.size() != sent_tags.size()) {
      throw Error(Errc::TokenTagLengthMismatch,
                  "sentence " + std::to_string(s) +
                      ": tokens and tags differ in length");
    }
    if (s > 0) out += '\n';
    for (std::size_t t = 0; t < sent_tokens.size(); ++t) {
      if (!sent_tokens[t].is_string() || !sent_tags[t].is_string()) {
        throw Error(Errc::SchemaShapeError,
                    "tokens and tags must be strings");
      }
      out += sent_tokens[t].get<std::string>();
      out += '\t';
      out += sent_tags[t].get<std::string>();
      out += '\n';
    }
  }
  return out;
}

ImageRecord conll_from(const std::string& text) {
  ImageRecord record;
  record.width = 1;
  record.height = 1;
  auto& ann = record.content_ann;
  ann.has_bboxes = true;

  nlohmann::json tokens = nlohmann::json::array();
  nlohmann::json tags = nlohmann::json::array();
  nlohmann::json sent_tokens = nlohmann::json::array();
  nlohmann::json sent_tags = nlohmann::json::array();
  auto flush = [&]() {
    if (sent_tokens.empty()) return;
    tokens.push_back(sent_tokens);
    tags.push_back(sent_tags);
    sent_tokens = nlohmann::json::array();
    sent_tags = nlohmann::json::array();
  };

  std::istringstream stream(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(Errc::SchemaShapeError,
                  "line " + std::to_string(line_no) +
                      ": expected 'token<TAB>tag'");
    }
    sent_tokens.push_back(line.substr(0, tab));
    sent_tags.push_back(line.substr(tab + 1));
  }
  flush();

  const std::size_t n = tokens.size();
  for (std::size_t i = 0; i < n; ++i) {
    ann.bboxes.push_back(GeoBox{{0.0, 0.0, 1.0, 1.0}});
  }
  ann.extras["tokens"] = std::move(tokens);
  ann.extras["tags"] = std::move(tags);
  return record;
}

}  // namespace davar
