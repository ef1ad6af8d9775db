#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "davarlabel/canonical_json.hpp"
#include "davarlabel/convert.hpp"
#include "davarlabel/errors.hpp"
#include "davarlabel/geometry.hpp"
#include "davarlabel/metrics.hpp"
#include "davarlabel/schema.hpp"
#include "davarlabel/stats.hpp"
#include "davarlabel/tasks.hpp"
#include "davarlabel/transforms.hpp"
#include "davarlabel/validate.hpp"
#include "py_json.hpp"

namespace py = pybind11;
using davar_py::json_to_py;
using davar_py::py_to_json;

namespace {

davar::TaskKind task_or_throw(const std::string& name) {
  const auto task = davar::task_from_name(name);
  if (!task) {
    throw davar::Error(davar::Errc::MissingRequiredKey,
                       "unknown task '" + name + "'");
  }
  return *task;
}

davar::GeoBox box_from_py(const py::handle& obj) {
  davar::GeoBox box;
  for (auto v : obj.cast<py::sequence>()) box.points.push_back(v.cast<double>());
  return box;
}

const davar::ImageRecord& record_or_throw(const davar::AnnotationSet& s,
                                          const std::string& path) {
  const auto it = s.records.find(path);
  if (it == s.records.end()) {
    throw davar::Error(davar::Errc::MissingRequiredKey,
                       "no record under image path '" + path + "'");
  }
  return it->second;
}

davar::CharVocab vocab_from_py(const py::handle& obj) {
  if (py::isinstance<py::str>(obj)) {
    return davar::CharVocab::from_string(obj.cast<std::string>());
  }
  return davar::CharVocab(obj.cast<std::vector<std::string>>());
}

std::vector<davar::ImageEval> images_from_py(const py::handle& obj) {
  std::vector<davar::ImageEval> images;
  for (auto item : obj.cast<py::sequence>()) {
    const py::dict image = item.cast<py::dict>();
    davar::ImageEval ie;
    if (image.contains("preds")) {
      for (auto p : image["preds"].cast<py::sequence>()) {
        const py::dict d = p.cast<py::dict>();
        davar::Prediction q;
        q.box = box_from_py(d["box"]);
        q.score = d.contains("score") ? d["score"].cast<double>() : 1.0;
        if (d.contains("category")) q.category = d["category"].cast<std::string>();
        ie.preds.push_back(std::move(q));
      }
    }
    if (image.contains("gts")) {
      for (auto g : image["gts"].cast<py::sequence>()) {
        const py::dict d = g.cast<py::dict>();
        davar::GtInstance inst;
        inst.box = box_from_py(d["box"]);
        if (d.contains("category")) inst.category = d["category"].cast<std::string>();
        ie.gts.push_back(std::move(inst));
      }
    }
    images.push_back(std::move(ie));
  }
  return images;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Unified document-annotation toolkit (core bindings)";

  py::register_exception<davar::Error>(m, "LabelError");

  py::class_<davar::AnnotationSet>(m, "AnnotationSet")
      .def(py::init<>())
      .def("__len__", &davar::AnnotationSet::size)
      .def("__eq__",
           [](const davar::AnnotationSet& a, const davar::AnnotationSet& b) {
             return a == b;
           })
      .def_property_readonly("paths",
                             [](const davar::AnnotationSet& s) {
                               std::vector<std::string> out;
                               for (const auto& [path, record] : s.records) {
                                 out.push_back(path);
                               }
                               return out;
                             })
      .def("record",
           [](const davar::AnnotationSet& s, const std::string& path) {
             return json_to_py(davar::record_to_json(record_or_throw(s, path)));
           },
           py::arg("path"))
      .def("to_dict",
           [](const davar::AnnotationSet& s) {
             return json_to_py(davar::set_to_json(s));
           })
      .def("serialize", [](const davar::AnnotationSet& s) {
        return davar::serialize_canonical(s);
      });

  m.def("parse_annotation_file", &davar::parse_annotation_file,
        py::arg("text"), "Parse the unified annotation JSON text.");
  m.def("set_from_dict",
        [](const py::dict& doc) {
          return davar::parse_annotation_file(
              davar::canonical_dump_compact(py_to_json(doc)));
        },
        py::arg("doc"), "Build an AnnotationSet from a plain dict.");
  m.def("serialize_canonical", &davar::serialize_canonical, py::arg("s"));
  m.def("merge_sets", &davar::merge_sets, py::arg("a"), py::arg("b"));
  m.def("normalize_bbox",
        [](const py::sequence& box) {
          return davar::normalize_bbox(box_from_py(box)).points;
        },
        py::arg("box"));

  m.def("validate",
        [](const davar::AnnotationSet& s) {
          py::list out;
          for (const auto& d : davar::validate_set(s).diagnostics) {
            out.append(json_to_py(d.to_json()));
          }
          return out;
        },
        py::arg("s"), "Diagnostics as a list of dicts, canonical order.");

  m.def("required_keys",
        [](const std::string& task) {
          return davar::required_keys(task_or_throw(task));
        },
        py::arg("task"));
  m.def("task_names", [] {
    std::vector<std::string> out;
    for (auto t : davar::all_tasks()) out.emplace_back(davar::task_name(t));
    return out;
  });
  m.def("project",
        [](const davar::AnnotationSet& s, const std::string& path,
           const std::string& task) {
          return json_to_py(
              davar::project(record_or_throw(s, path), task_or_throw(task))
                  .to_json());
        },
        py::arg("s"), py::arg("path"), py::arg("task"));
  m.def("label_vocabulary",
        [](const davar::AnnotationSet& s, const std::string& task,
           std::size_t subtask) {
          return davar::label_vocabulary(s, task_or_throw(task), subtask);
        },
        py::arg("s"), py::arg("task"), py::arg("subtask") = 0);

  py::class_<davar::Pipeline>(m, "Pipeline")
      .def_property_readonly("stage_count", &davar::Pipeline::stage_count)
      .def_property_readonly("seed", &davar::Pipeline::seed)
      .def("run",
           [](const davar::Pipeline& p, const davar::AnnotationSet& s,
              const std::string& path) {
             return json_to_py(
                 p.run(record_or_throw(s, path), path).to_json());
           },
           py::arg("s"), py::arg("path"));
  m.def("build_pipeline",
        [](const py::dict& config) {
          return davar::build_pipeline(
              davar::PipelineConfig::from_json(py_to_json(config)));
        },
        py::arg("config"),
        "Build a pipeline from {'seed': int, 'stages': [{'type': ...}]}.");
  m.def("registered_stage_names", &davar::registered_stage_names);

  m.def("chargrid",
        [](const davar::AnnotationSet& s, const std::string& path,
           const py::object& vocab, std::int64_t width, std::int64_t height) {
          return json_to_py(davar::chargrid_rasterize(record_or_throw(s, path),
                                                      vocab_from_py(vocab),
                                                      width, height)
                                .to_json());
        },
        py::arg("s"), py::arg("path"), py::arg("vocab"), py::arg("width"),
        py::arg("height"));

  m.def("to_coco",
        [](const davar::AnnotationSet& s, std::size_t subtask) {
          return json_to_py(davar::to_coco_detection(s, subtask).to_json());
        },
        py::arg("s"), py::arg("subtask") = 0);
  m.def("from_coco",
        [](const py::dict& doc) {
          return davar::from_coco_detection(
              davar::CocoDetectionDoc::from_json(py_to_json(doc)));
        },
        py::arg("doc"));
  m.def("to_icdar", &davar::to_icdar_spotting, py::arg("s"));
  m.def("from_icdar",
        [](const std::map<std::string, std::string>& files,
           const std::map<std::string, std::pair<std::int64_t, std::int64_t>>&
               dims) { return davar::from_icdar_spotting(files, dims); },
        py::arg("files"),
        py::arg("dims") =
            std::map<std::string, std::pair<std::int64_t, std::int64_t>>{});
  m.def("ner_to_conll",
        [](const davar::AnnotationSet& s, const std::string& path) {
          return davar::ner_to_conll(record_or_throw(s, path));
        },
        py::arg("s"), py::arg("path"));
  m.def("from_conll",
        [](const std::string& text, const std::string& path) {
          davar::AnnotationSet set;
          set.records.emplace(path, davar::conll_from(text));
          return set;
        },
        py::arg("text"), py::arg("path") = "doc.txt");

  m.def("polygon_iou",
        [](const py::sequence& a, const py::sequence& b) {
          return davar::polygon_iou(box_from_py(a), box_from_py(b));
        },
        py::arg("a"), py::arg("b"));
  m.def("match_detections",
        [](const py::sequence& preds, const py::sequence& gts, double thresh) {
          std::vector<davar::Prediction> ps;
          for (auto item : preds) {
            const py::dict d = item.cast<py::dict>();
            davar::Prediction q;
            q.box = box_from_py(d["box"]);
            q.score = d.contains("score") ? d["score"].cast<double>() : 1.0;
            ps.push_back(std::move(q));
          }
          std::vector<davar::GeoBox> gs;
          for (auto item : gts) gs.push_back(box_from_py(item));
          const auto match = davar::match_detections(ps, gs, thresh);
          py::dict out;
          out["matched_gt"] = match.matched_gt;
          out["ranking"] = match.ranking;
          out["unmatched_gt"] = match.unmatched_gt;
          out["tp"] = match.tp_count();
          out["fp"] = match.fp_count();
          return out;
        },
        py::arg("preds"), py::arg("gts"), py::arg("iou_thresh") = 0.5);
  m.def("detection_prf",
        [](long tp, long fp, long fn) {
          const auto prf = davar::detection_prf(tp, fp, fn);
          py::dict out;
          out["precision"] = prf.precision;
          out["recall"] = prf.recall;
          out["hmean"] = prf.hmean;
          return out;
        },
        py::arg("tp"), py::arg("fp"), py::arg("fn"));
  m.def("kie_macro_f1", &davar::kie_macro_f1, py::arg("pred_labels"),
        py::arg("gt_labels"));
  m.def("average_precision", &davar::average_precision,
        py::arg("ranked_tp_flags"), py::arg("num_gt"));
  m.def("coco_map",
        [](const py::sequence& images) {
          return davar::coco_map(images_from_py(images));
        },
        py::arg("images"));
  m.def("evaluate_detection",
        [](const py::sequence& images, double iou_thresh,
           const std::string& aggregate) {
          const auto report =
              davar::evaluate_detection(images_from_py(images), iou_thresh);
          const double headline = aggregate == "mAP" ? report.map : report.hmean;
          return json_to_py(report.to_json(aggregate, headline));
        },
        py::arg("images"), py::arg("iou_thresh") = 0.5,
        py::arg("aggregate") = "mAP");
  m.def("evaluate_kie",
        [](const std::vector<std::string>& pred,
           const std::vector<std::string>& gt) {
          const auto report = davar::evaluate_kie(pred, gt);
          return json_to_py(report.to_json("F1-Score", report.macro_f1));
        },
        py::arg("pred_labels"), py::arg("gt_labels"));
  m.def("reading_order_tau", &davar::reading_order_tau, py::arg("pred_order"),
        py::arg("gt_order"));

  m.def("stats_summary",
        [](const davar::AnnotationSet& s) {
          return json_to_py(davar::stats_summary(s));
        },
        py::arg("s"));
  m.def("canonical_dumps", [](const py::handle& value) {
    return davar::canonical_dump(py_to_json(value));
  });
}
