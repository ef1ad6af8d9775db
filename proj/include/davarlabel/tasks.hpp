#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "davarlabel/schema.hpp"

namespace davar {

/// The nine supported task forms.
enum class TaskKind {
  Detection,
  Recognition,
  Spotting,
  VideoText,
  KIE,
  NER,
  LayoutAnalysis,
  ReadingOrder,
  TableRecognition,
};

std::string_view task_name(TaskKind t);
std::optional<TaskKind> task_from_name(std::string_view name);
std::vector<TaskKind> all_tasks();

/// Keys a task requires from a record. Extras keys are spelled
/// "extras.<name>" (e.g. "extras.order" for ReadingOrder).
std::set<std::string> required_keys(TaskKind task);

/// The selected columns of one annotation level. A column is present iff
/// the source key was present and the task selects it.
struct TaskColumns {
  std::optional<std::vector<GeoBox>> bboxes;
  std::optional<std::vector<std::string>> texts;
  std::optional<std::vector<std::vector<std::string>>> labels;
  std::optional<std::vector<CellSpan>> cells;
  std::map<std::string, nlohmann::json> extras;

  bool operator==(const TaskColumns&) const = default;
};

/// A task-specific projection of one record. `secondary` is populated for
/// LayoutAnalysis when content_ann2 is present (levels() == 2).
struct TaskSample {
  TaskKind task = TaskKind::Detection;
  TaskColumns primary;
  std::optional<TaskColumns> secondary;

  int levels() const { return secondary ? 2 : 1; }
  nlohmann::json to_json() const;
  bool operator==(const TaskSample&) const = default;
};

/// Project a record into the task's sample shape. Throws
/// Error(MissingRequiredKey) naming the absent key and the task. The record
/// is expected to validate with zero Errors; projection itself only checks
/// key presence.
TaskSample project(const ImageRecord& r, TaskKind task);

/// Sorted unique categories across the set at label position
/// `subtask_index`. Throws Error(SubtaskIndexOutOfRange) when an instance's
/// label vector is too short, Error(MissingRequiredKey) when the task does
/// not use labels.
std::vector<std::string> label_vocabulary(const AnnotationSet& s,
                                          TaskKind task,
                                          std::size_t subtask_index);

}  // namespace davar
