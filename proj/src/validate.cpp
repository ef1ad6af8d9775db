#include "davarlabel/validate.hpp"

#include <sstream>

#include "davarlabel/canonical_json.hpp"
#include "davarlabel/geometry.hpp"

namespace davar {

std::string_view severity_name(Severity s) {
  return s == Severity::Error ? "Error" : "Warning";
}

nlohmann::json Diagnostic::to_json() const {
  return {
      {"severity", std::string(severity_name(severity))},
      {"code", code},
      {"image_path", image_path},
      {"location", location},
      {"message", message},
  };
}

std::size_t ValidationReport::error_count() const {
  std::size_t n = 0;
  for (const auto& d : diagnostics) n += d.severity == Severity::Error;
  return n;
}

std::size_t ValidationReport::warning_count() const {
  return diagnostics.size() - error_count();
}

std::map<std::string, std::size_t> ValidationReport::counts() const {
  return {{"Error", error_count()}, {"Warning", warning_count()}};
}

std::string ValidationReport::to_json_lines() const {
  std::string out;
  for (const auto& d : diagnostics) {
    out += canonical_dump_compact(d.to_json());
    out += '\n';
  }
  return out;
}

namespace {

struct LevelChecker {
  const std::string& path;
  const char* level;
  const ContentAnn& ann;
  const ImageRecord& record;
  std::vector<Diagnostic>& out;

  void emit(Severity sev, const char* code, std::string location,
            std::string message) {
    out.push_back({sev, code, path, std::move(location), std::move(message)});
  }

  std::string loc(const std::string& key) {
    return std::string(level) + "." + key;
  }
  std::string loc(const std::string& key, std::size_t index) {
    return loc(key) + "[" + std::to_string(index) + "]";
  }

  void check_lengths() {
    const std::size_t n = ann.instance_count();
    auto check = [&](const std::string& key, std::size_t len) {
      if (len != n) {
        std::ostringstream msg;
        msg << key << " has length " << len << ", expected " << n;
        emit(Severity::Error, "LENGTH_MISMATCH", loc(key), msg.str());
      }
    };
    if (ann.has_bboxes) check("bboxes", ann.bboxes.size());
    if (ann.texts) check("texts", ann.texts->size());
    if (ann.labels) check("labels", ann.labels->size());
    if (ann.cells) check("cells", ann.cells->size());
    for (const auto& [key, value] : ann.extras) check(key, value.size());
  }

  void check_labels() {
    if (!ann.labels) return;
    for (std::size_t i = 0; i < ann.labels->size(); ++i) {
      if (!(*ann.labels)[i].is_list) {
        emit(Severity::Error, "LABELS_NOT_2D", loc("labels", i),
             "labels element is not a list");
      }
    }
  }

  void check_boxes() {
    for (std::size_t i = 0; i < ann.bboxes.size(); ++i) {
      const GeoBox& b = ann.bboxes[i];
      if (!b.has_valid_length()) {
        emit(Severity::Error, "BAD_POLYGON", loc("bboxes", i),
             "coordinate count must be 4 or an even number >= 8, got " +
                 std::to_string(b.coord_count()));
        continue;
      }
      if (b.is_axis_aligned()) {
        if (!(b.points[2] > b.points[0]) || !(b.points[3] > b.points[1])) {
          emit(Severity::Error, "BAD_POLYGON", loc("bboxes", i),
               "axis-aligned box requires x2 > x1 and y2 > y1");
        }
      } else if (signed_area2(b.points) == 0.0) {
        emit(Severity::Error, "BAD_POLYGON", loc("bboxes", i),
             "polygon has zero area");
      }
    }
  }

  void check_bounds() {
    const double w = static_cast<double>(record.width);
    const double h = static_cast<double>(record.height);
    for (std::size_t i = 0; i < ann.bboxes.size(); ++i) {
      const GeoBox& b = ann.bboxes[i];
      for (std::size_t v = 0; v + 1 < b.points.size(); v += 2) {
        const double x = b.points[v], y = b.points[v + 1];
        if (x < 0.0 || x > w || y < 0.0 || y > h) {
          std::ostringstream msg;
          msg << "vertex (" << x << ", " << y << ") outside [0, " << w
              << "] x [0, " << h << "]";
          emit(Severity::Warning, "OUT_OF_BOUNDS", loc("bboxes", i), msg.str());
          break;  // one warning per box is enough
        }
      }
    }
  }

  void check_cells() {
    if (!ann.cells) return;
    for (std::size_t i = 0; i < ann.cells->size(); ++i) {
      const CellSpan& c = (*ann.cells)[i];
      const bool ok = c[0] >= 0 && c[1] >= 0 && c[0] <= c[2] && c[1] <= c[3];
      if (!ok) {
        emit(Severity::Error, "BAD_CELL", loc("cells", i),
             "cell span requires 0 <= start_row <= end_row and 0 <= "
             "start_col <= end_col");
      }
    }
  }

  void run() {
    check_lengths();
    check_labels();
    check_boxes();
    check_bounds();
    check_cells();
  }
};

}  // namespace

std::vector<Diagnostic> validate_record(const std::string& path,
                                        const ImageRecord& r) {
  std::vector<Diagnostic> out;
  LevelChecker{path, "content_ann", r.content_ann, r, out}.run();
  if (r.content_ann2) {
    LevelChecker{path, "content_ann2", *r.content_ann2, r, out}.run();
  }
  if (r.content_ann.instance_count() == 0) {
    out.push_back({Severity::Warning, "EMPTY_RECORD", path, "content_ann",
                   "record has zero instances"});
  }
  return out;
}

ValidationReport validate_set(const AnnotationSet& s) {
  ValidationReport report;
  for (const auto& [path, record] : s.records) {
    auto diags = validate_record(path, record);
    report.diagnostics.insert(report.diagnostics.end(),
                              std::make_move_iterator(diags.begin()),
                              std::make_move_iterator(diags.end()));
  }
  return report;
}

}  // namespace davar
