#include "davarlabel/stats.hpp"

#include <algorithm>
#include <map>
#include <vector>

#include "davarlabel/geometry.hpp"
#include "davarlabel/transforms.hpp"

namespace davar {

nlohmann::json stats_summary(const AnnotationSet& s) {
  std::size_t num_instances = 0;
  std::vector<std::map<std::string, std::size_t>> category_counts;
  std::vector<double> areas;
  std::map<std::size_t, std::size_t> text_lengths;

  for (const auto& [path, record] : s.records) {
    const auto& ann = record.content_ann;
    num_instances += ann.instance_count();
    for (const auto& box : ann.bboxes) {
      if (box.has_valid_length()) areas.push_back(box_area(box));
    }
    if (ann.texts) {
      for (const auto& text : *ann.texts) {
        text_lengths[utf8_codepoints(text).size()]++;
      }
    }
    if (ann.labels) {
      for (const auto& entry : *ann.labels) {
        for (std::size_t k = 0; k < entry.values.size(); ++k) {
          if (category_counts.size() <= k) category_counts.resize(k + 1);
          category_counts[k][entry.values[k]]++;
        }
      }
    }
  }

  nlohmann::json categories = nlohmann::json::array();
  for (const auto& per_subtask : category_counts) {
    nlohmann::json obj = nlohmann::json::object();
    for (const auto& [name, count] : per_subtask) obj[name] = count;
    categories.push_back(std::move(obj));
  }

  nlohmann::json deciles = nlohmann::json::array();
  if (!areas.empty()) {
    std::sort(areas.begin(), areas.end());
    for (std::size_t i = 0; i <= 10; ++i) {
      // Nearest-rank with exact integer arithmetic; deterministic.
      const std::size_t idx = i * (areas.size() - 1) / 10;
      deciles.push_back(areas[idx]);
    }
  }

  nlohmann::json lengths = nlohmann::json::object();
  for (const auto& [len, count] : text_lengths) {
    lengths[std::to_string(len)] = count;
  }

  return {{"num_images", s.records.size()},
          {"num_instances", num_instances},
          {"categories", categories},
          {"box_area_deciles", deciles},
          {"text_length_histogram", lengths}};
}

}  // namespace davar
