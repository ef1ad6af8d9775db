// davarlabel: command-line front end for the unified annotation toolkit.
// Machine output goes to stdout as canonical JSON; --pretty switches the
// reporting commands to human-readable tables. Exit codes: 0 success,
// 1 domain failure, 2 usage or I/O failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "davarlabel/canonical_json.hpp"
#include "davarlabel/convert.hpp"
#include "davarlabel/errors.hpp"
#include "davarlabel/metrics.hpp"
#include "davarlabel/parallel.hpp"
#include "davarlabel/schema.hpp"
#include "davarlabel/stats.hpp"
#include "davarlabel/tasks.hpp"
#include "davarlabel/transforms.hpp"
#include "davarlabel/validate.hpp"

namespace fs = std::filesystem;
using davar::Errc;
using davar::Error;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write '" + path + "'");
  out << content;
}

davar::AnnotationSet load_set(const std::string& path) {
  return davar::parse_annotation_file(read_file(path));
}

nlohmann::json parse_json_file(const std::string& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::MalformedJson, std::string(e.what()) + " in '" + path + "'");
  }
}

std::string sanitize_name(const std::string& path) {
  std::string out;
  for (char c : path) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
    out += ok ? c : '_';
  }
  return out.empty() ? "record" : out;
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

int cmd_validate(const std::string& path, bool strict, bool pretty) {
  const auto set = load_set(path);
  const auto report = davar::validate_set(set);
  if (pretty) {
    for (const auto& d : report.diagnostics) {
      std::cout << davar::severity_name(d.severity) << " " << d.code << " "
                << d.image_path << " " << d.location << ": " << d.message
                << "\n";
    }
    std::cout << report.error_count() << " error(s), "
              << report.warning_count() << " warning(s)\n";
  } else {
    std::cout << report.to_json_lines();
  }
  if (report.error_count() > 0) return 1;
  if (strict && report.warning_count() > 0) return 1;
  return 0;
}

// ---------------------------------------------------------------------------
// stats
// ---------------------------------------------------------------------------

int cmd_stats(const std::string& path, bool pretty) {
  const auto summary = davar::stats_summary(load_set(path));
  if (pretty) {
    std::cout << "images:    " << summary["num_images"] << "\n";
    std::cout << "instances: " << summary["num_instances"] << "\n";
    std::size_t subtask = 0;
    for (const auto& per : summary["categories"]) {
      std::cout << "categories[" << subtask++ << "]:\n";
      for (const auto& [name, count] : per.items()) {
        std::cout << "  " << name << ": " << count << "\n";
      }
    }
  } else {
    std::cout << davar::canonical_dump(summary);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// convert
// ---------------------------------------------------------------------------

int cmd_convert(const std::string& path, const std::string& to,
                std::size_t subtask, const std::string& out_dir) {
  const auto set = load_set(path);
  fs::create_directories(out_dir);
  nlohmann::json manifest;
  manifest["files"] = nlohmann::json::array();
  auto add_file = [&](const std::string& name, const std::string& content) {
    const std::string full = (fs::path(out_dir) / name).string();
    write_file(full, content);
    manifest["files"].push_back(full);
  };

  if (to == "coco") {
    const auto doc = davar::to_coco_detection(set, subtask);
    add_file("coco.json", davar::canonical_dump(doc.to_json()));
  } else if (to == "icdar") {
    nlohmann::json sources = nlohmann::json::object();
    std::set<std::string> used;
    for (const auto& [image_path, lines] : davar::to_icdar_spotting(set)) {
      std::string name = "gt_" + sanitize_name(image_path) + ".txt";
      for (int i = 2; used.count(name); ++i) {
        name = "gt_" + sanitize_name(image_path) + "_" + std::to_string(i) +
               ".txt";
      }
      used.insert(name);
      add_file(name, lines);
      sources[name] = image_path;
    }
    manifest["sources"] = std::move(sources);
  } else if (to == "conll") {
    nlohmann::json sources = nlohmann::json::object();
    std::set<std::string> used;
    for (const auto& [image_path, record] : set.records) {
      std::string name = sanitize_name(image_path) + ".conll";
      for (int i = 2; used.count(name); ++i) {
        name = sanitize_name(image_path) + "_" + std::to_string(i) + ".conll";
      }
      used.insert(name);
      add_file(name, davar::ner_to_conll(record));
      sources[name] = image_path;
    }
    manifest["sources"] = std::move(sources);
  } else {
    throw CLI::ValidationError("--to must be one of coco|icdar|conll");
  }
  std::cout << davar::canonical_dump(manifest);
  return 0;
}

// ---------------------------------------------------------------------------
// project / pipeline / chargrid
// ---------------------------------------------------------------------------

int cmd_project(const std::string& path, const std::string& task_name) {
  const auto task = davar::task_from_name(task_name);
  if (!task) throw CLI::ValidationError("unknown task '" + task_name + "'");
  const auto set = load_set(path);
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [image_path, record] : set.records) {
    out[image_path] = davar::project(record, *task).to_json();
  }
  std::cout << davar::canonical_dump(out);
  return 0;
}

struct RecordOutcome {
  nlohmann::json value;
  std::optional<Errc> error_code;
  std::string error_message;
  bool is_plain_record = false;
};

int cmd_pipeline(const std::string& path, const std::string& config_path) {
  const auto config = davar::PipelineConfig::from_json(parse_json_file(config_path));
  const auto pipeline = davar::build_pipeline(config);
  const auto set = load_set(path);

  std::vector<std::pair<std::string, const davar::ImageRecord*>> items;
  items.reserve(set.records.size());
  for (const auto& [image_path, record] : set.records) {
    items.emplace_back(image_path, &record);
  }
  const auto outcomes = davar::parallel_map<RecordOutcome>(
      items.size(), [&](std::size_t i) -> RecordOutcome {
        RecordOutcome out;
        try {
          const auto value = pipeline.run(*items[i].second, items[i].first);
          out.is_plain_record = !value.sample && !value.chargrid;
          out.value = out.is_plain_record ? davar::record_to_json(value.record)
                                          : value.to_json();
        } catch (const Error& e) {
          out.error_code = e.code();
          out.error_message = e.message();
        } catch (const std::exception& e) {
          out.error_code = Errc::BadStageParams;
          out.error_message = e.what();
        }
        return out;
      });

  bool all_plain = true;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i].error_code) {
      throw Error(*outcomes[i].error_code,
                  "record '" + items[i].first + "': " + outcomes[i].error_message);
    }
    all_plain = all_plain && outcomes[i].is_plain_record;
  }
  nlohmann::json body = nlohmann::json::object();
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    body[items[i].first] = outcomes[i].value;
  }
  // A record-to-record pipeline emits a standard annotation file; once a
  // sample or chargrid exists the output is a sample map.
  if (all_plain) {
    std::cout << davar::canonical_dump(body);
  } else {
    std::cout << davar::canonical_dump({{"samples", body}});
  }
  return 0;
}

davar::CharVocab load_vocab(const std::string& path) {
  std::istringstream stream(read_file(path));
  std::vector<std::string> chars;
  std::string line;
  while (std::getline(stream, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    chars.push_back(line);
  }
  return davar::CharVocab(chars);
}

int cmd_chargrid(const std::string& path, const std::string& vocab_path,
                 const std::string& size) {
  const auto sep = size.find('x');
  std::int64_t w = 0, h = 0;
  try {
    if (sep == std::string::npos) throw std::invalid_argument(size);
    w = std::stoll(size.substr(0, sep));
    h = std::stoll(size.substr(sep + 1));
  } catch (const std::exception&) {
    throw CLI::ValidationError("--size must look like 512x512");
  }
  const auto vocab = load_vocab(vocab_path);
  const auto set = load_set(path);
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [image_path, record] : set.records) {
    out[image_path] = davar::chargrid_rasterize(record, vocab, w, h).to_json();
  }
  std::cout << davar::canonical_dump(out);
  return 0;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

std::string label_at(const davar::ContentAnn& ann, std::size_t index,
                     std::size_t subtask, const std::string& path) {
  if (!ann.labels || index >= ann.labels->size()) {
    throw Error(Errc::MissingRequiredKey,
                "record '" + path + "' lacks labels[" + std::to_string(index) +
                    "]");
  }
  const auto& values = (*ann.labels)[index].values;
  if (subtask >= values.size()) {
    throw Error(Errc::SubtaskIndexOutOfRange,
                "record '" + path + "' labels[" + std::to_string(index) +
                    "] has arity " + std::to_string(values.size()));
  }
  return values[subtask];
}

double score_at(const davar::ContentAnn& ann, std::size_t index) {
  const auto it = ann.extras.find("scores");
  if (it == ann.extras.end()) return 1.0;
  if (index >= it->second.size() || !it->second[index].is_number()) return 1.0;
  return it->second[index].get<double>();
}

void print_eval(const davar::EvalReport& report,
                const std::string& aggregate_name, double aggregate_value,
                bool pretty) {
  if (!pretty) {
    std::cout << davar::canonical_dump(
        report.to_json(aggregate_name, aggregate_value));
    return;
  }
  std::cout << "class                precision  recall     f1         ap\n";
  for (const auto& [cls, m] : report.per_class) {
    std::printf("%-20s %-10.4f %-10.4f %-10.4f %-10.4f\n", cls.c_str(),
                m.precision, m.recall, m.f1, m.ap);
  }
  std::printf("%s: %.4f\n", aggregate_name.c_str(), aggregate_value);
}

int cmd_eval(const std::string& gt_path, const std::string& pred_path,
             const std::string& task, double iou, std::size_t subtask,
             bool pretty) {
  const auto gt = load_set(gt_path);
  const auto pred = load_set(pred_path);

  if (task == "kie") {
    std::vector<std::string> gt_labels, pred_labels;
    for (const auto& [path, gt_record] : gt.records) {
      const auto it = pred.records.find(path);
      if (it == pred.records.end()) {
        throw Error(Errc::LengthMismatch,
                    "prediction file lacks record '" + path + "'");
      }
      const std::size_t n = gt_record.content_ann.instance_count();
      if (it->second.content_ann.instance_count() != n) {
        throw Error(Errc::LengthMismatch,
                    "record '" + path + "' has " +
                        std::to_string(it->second.content_ann.instance_count()) +
                        " predictions for " + std::to_string(n) + " boxes");
      }
      for (std::size_t i = 0; i < n; ++i) {
        gt_labels.push_back(label_at(gt_record.content_ann, i, subtask, path));
        pred_labels.push_back(label_at(it->second.content_ann, i, subtask, path));
      }
    }
    auto report = davar::evaluate_kie(pred_labels, gt_labels);
    print_eval(report, "F1-Score", report.macro_f1, pretty);
    return 0;
  }

  if (task == "reading-order") {
    nlohmann::json per_image = nlohmann::json::object();
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& [path, gt_record] : gt.records) {
      const auto it = pred.records.find(path);
      if (it == pred.records.end()) {
        throw Error(Errc::LengthMismatch,
                    "prediction file lacks record '" + path + "'");
      }
      auto order_of = [&](const davar::ContentAnn& ann) {
        const auto order = ann.extras.find("order");
        if (order == ann.extras.end()) {
          throw Error(Errc::MissingRequiredKey,
                      "record '" + path + "' lacks extras.order");
        }
        std::vector<std::int64_t> out;
        for (const auto& v : order->second) out.push_back(v.get<std::int64_t>());
        return out;
      };
      const double tau = davar::reading_order_tau(
          order_of(it->second.content_ann), order_of(gt_record.content_ann));
      per_image[path] = tau;
      sum += tau;
      ++count;
    }
    const double mean = count ? sum / static_cast<double>(count) : 0.0;
    if (pretty) {
      for (const auto& [path, tau] : per_image.items()) {
        std::printf("%-40s %.4f\n", path.c_str(), tau.get<double>());
      }
      std::printf("tau: %.4f\n", mean);
    } else {
      std::cout << davar::canonical_dump(
          {{"aggregate", {{"tau", mean}}}, {"per_image", per_image}});
    }
    return 0;
  }

  if (task == "layout" || task == "detection") {
    const bool with_labels = task == "layout";
    std::vector<davar::ImageEval> images;
    for (const auto& [path, gt_record] : gt.records) {
      davar::ImageEval image;
      const auto& gt_ann = gt_record.content_ann;
      for (std::size_t i = 0; i < gt_ann.bboxes.size(); ++i) {
        davar::GtInstance inst;
        inst.box = gt_ann.bboxes[i];
        inst.category = with_labels ? label_at(gt_ann, i, subtask, path) : "";
        image.gts.push_back(std::move(inst));
      }
      const auto it = pred.records.find(path);
      if (it != pred.records.end()) {
        const auto& pd = it->second.content_ann;
        for (std::size_t i = 0; i < pd.bboxes.size(); ++i) {
          davar::Prediction p;
          p.box = pd.bboxes[i];
          p.category = with_labels ? label_at(pd, i, subtask, path) : "";
          p.score = score_at(pd, i);
          image.preds.push_back(std::move(p));
        }
      }
      images.push_back(std::move(image));
    }
    auto report = davar::evaluate_detection(images, iou);
    if (with_labels) {
      print_eval(report, "mAP", report.map, pretty);
    } else {
      print_eval(report, "hmean", report.hmean, pretty);
    }
    return 0;
  }
  throw CLI::ValidationError(
      "--task must be one of kie|layout|detection|reading-order");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unified document-annotation label toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // parent flags may follow the subcommand
  bool pretty = false;
  app.add_flag("--pretty", pretty, "Human-readable tables instead of JSON");

  std::string path, out_dir, to, task_name, config_path, vocab_path, size;
  std::string gt_path, pred_path;
  bool strict = false;
  std::size_t subtask = 0;
  double iou = 0.5;

  auto* validate = app.add_subcommand("validate", "Check every invariant");
  validate->add_option("file", path)->required();
  validate->add_flag("--strict", strict, "Warnings also fail");

  auto* stats = app.add_subcommand("stats", "Corpus summary");
  stats->add_option("file", path)->required();

  auto* convert = app.add_subcommand("convert", "Export to another format");
  convert->add_option("file", path)->required();
  convert->add_option("--to", to, "coco|icdar|conll")->required();
  convert->add_option("--subtask", subtask, "label position (coco)");
  convert->add_option("--out", out_dir, "output directory")->required();

  auto* project = app.add_subcommand("project", "Per-task sample projection");
  project->add_option("file", path)->required();
  project->add_option("--task", task_name, "task name, e.g. KIE")->required();

  auto* pipeline = app.add_subcommand("pipeline", "Run a transform pipeline");
  pipeline->add_option("file", path)->required();
  pipeline->add_option("--config", config_path, "pipeline JSON")->required();

  auto* chargrid = app.add_subcommand("chargrid", "Rasterize texts to a grid");
  chargrid->add_option("file", path)->required();
  chargrid->add_option("--vocab", vocab_path, "one character per line")
      ->required();
  chargrid->add_option("--size", size, "grid size WxH")->required();

  auto* eval = app.add_subcommand("eval", "Evaluate predictions");
  eval->add_option("gt", gt_path)->required();
  eval->add_option("pred", pred_path)->required();
  eval->add_option("--task", task_name, "kie|layout|detection|reading-order")
      ->required();
  eval->add_option("--iou", iou, "IoU threshold for matching");
  eval->add_option("--subtask", subtask, "label position");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the usage message
    return 2;
  }

  try {
    if (validate->parsed()) return cmd_validate(path, strict, pretty);
    if (stats->parsed()) return cmd_stats(path, pretty);
    if (convert->parsed()) return cmd_convert(path, to, subtask, out_dir);
    if (project->parsed()) return cmd_project(path, task_name);
    if (pipeline->parsed()) return cmd_pipeline(path, config_path);
    if (chargrid->parsed()) return cmd_chargrid(path, vocab_path, size);
    if (eval->parsed()) {
      return cmd_eval(gt_path, pred_path, task_name, iou, subtask, pretty);
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.code()) {
      case Errc::MalformedJson:
      case Errc::SchemaShapeError:
      case Errc::IoError:
        return 2;
      default:
        return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
