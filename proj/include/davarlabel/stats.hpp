#pragma once

#include <json.hpp>

#include "davarlabel/schema.hpp"

namespace davar {

/// Corpus summary: image/instance totals, per-subtask category tallies,
/// box-area deciles (11 quantile values from min to max), and a text-length
/// histogram (code points -> count).
nlohmann::json stats_summary(const AnnotationSet& s);

}  // namespace davar
