#include "davarlabel/tasks.hpp"

#include <algorithm>

#include "davarlabel/errors.hpp"

namespace davar {

std::string_view task_name(TaskKind t) {
  switch (t) {
    case TaskKind::Detection: return "Detection";
    case TaskKind::Recognition: return "Recognition";
    case TaskKind::Spotting: return "Spotting";
    case TaskKind::VideoText: return "VideoText";
    case TaskKind::KIE: return "KIE";
    case TaskKind::NER: return "NER";
    case TaskKind::LayoutAnalysis: return "LayoutAnalysis";
    case TaskKind::ReadingOrder: return "ReadingOrder";
    case TaskKind::TableRecognition: return "TableRecognition";
  }
  return "Detection";
}

std::vector<TaskKind> all_tasks() {
  return {TaskKind::Detection,     TaskKind::Recognition,
          TaskKind::Spotting,      TaskKind::VideoText,
          TaskKind::KIE,           TaskKind::NER,
          TaskKind::LayoutAnalysis, TaskKind::ReadingOrder,
          TaskKind::TableRecognition};
}

std::optional<TaskKind> task_from_name(std::string_view name) {
  for (TaskKind t : all_tasks()) {
    if (task_name(t) == name) return t;
  }
  return std::nullopt;
}

std::set<std::string> required_keys(TaskKind task) {
  switch (task) {
    case TaskKind::Detection:
      return {"bboxes"};
    case TaskKind::Recognition:
      return {"texts"};
    case TaskKind::Spotting:
      return {"bboxes", "texts"};
    case TaskKind::KIE:
      return {"bboxes", "texts", "labels"};
    case TaskKind::LayoutAnalysis:
      return {"bboxes", "labels"};
    case TaskKind::TableRecognition:
      return {"bboxes", "texts", "cells"};
    case TaskKind::ReadingOrder:
      return {"bboxes", "extras.order"};
    case TaskKind::VideoText:
      return {"bboxes", "texts", "extras.track_id", "extras.frame"};
    case TaskKind::NER:
      return {"extras.tokens", "extras.tags"};
  }
  return {};
}

namespace {

bool level_has_key(const ContentAnn& ann, const std::string& key) {
  if (key.rfind("extras.", 0) == 0) {
    return ann.extras.count(key.substr(7)) > 0;
  }
  return ann.has_key(key);
}

// Copy the selected key's column into the output; caller checked presence.
void select_into(TaskColumns& out, const ContentAnn& ann,
                 const std::string& key) {
  if (key == "bboxes") {
    out.bboxes = ann.bboxes;
  } else if (key == "texts") {
    out.texts = ann.texts;
  } else if (key == "labels") {
    std::vector<std::vector<std::string>> flat;
    flat.reserve(ann.labels->size());
    for (const auto& entry : *ann.labels) flat.push_back(entry.values);
    out.labels = std::move(flat);
  } else if (key == "cells") {
    out.cells = ann.cells;
  } else {
    const std::string name = key.substr(7);
    out.extras.emplace(name, ann.extras.at(name));
  }
}

}  // namespace

TaskSample project(const ImageRecord& r, TaskKind task) {
  const auto keys = required_keys(task);
  TaskSample sample;
  sample.task = task;
  for (const auto& key : keys) {
    if (!level_has_key(r.content_ann, key)) {
      throw Error(Errc::MissingRequiredKey,
                  "task " + std::string(task_name(task)) +
                      " requires key '" + key + "'");
    }
    select_into(sample.primary, r.content_ann, key);
  }
  if (task == TaskKind::LayoutAnalysis && r.content_ann2) {
    TaskColumns second;
    for (const auto& key : keys) {
      if (level_has_key(*r.content_ann2, key)) {
        select_into(second, *r.content_ann2, key);
      }
    }
    sample.secondary = std::move(second);
  }
  return sample;
}

namespace {

nlohmann::json columns_to_json(const TaskColumns& c) {
  nlohmann::json obj = nlohmann::json::object();
  if (c.bboxes) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& b : *c.bboxes) arr.push_back(b.points);
    obj["bboxes"] = std::move(arr);
  }
  if (c.texts) obj["texts"] = *c.texts;
  if (c.labels) obj["labels"] = *c.labels;
  if (c.cells) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : *c.cells) {
      arr.push_back(nlohmann::json::array({s[0], s[1], s[2], s[3]}));
    }
    obj["cells"] = std::move(arr);
  }
  for (const auto& [key, value] : c.extras) obj[key] = value;
  return obj;
}

}  // namespace

nlohmann::json TaskSample::to_json() const {
  nlohmann::json obj = columns_to_json(primary);
  obj["task"] = std::string(task_name(task));
  obj["levels"] = levels();
  if (secondary) obj["level2"] = columns_to_json(*secondary);
  return obj;
}

std::vector<std::string> label_vocabulary(const AnnotationSet& s,
                                          TaskKind task,
                                          std::size_t subtask_index) {
  if (!required_keys(task).count("labels")) {
    throw Error(Errc::MissingRequiredKey,
                "task " + std::string(task_name(task)) +
                    " does not use labels");
  }
  std::set<std::string> vocab;
  for (const auto& [path, record] : s.records) {
    if (!record.content_ann.labels) continue;
    const auto& labels = *record.content_ann.labels;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (subtask_index >= labels[i].values.size()) {
        throw Error(Errc::SubtaskIndexOutOfRange,
                    "record '" + path + "' labels[" + std::to_string(i) +
                        "] has arity " +
                        std::to_string(labels[i].values.size()) +
                        ", subtask index " + std::to_string(subtask_index));
      }
      vocab.insert(labels[i].values[subtask_index]);
    }
  }
  return {vocab.begin(), vocab.end()};
}

}  // namespace davar
