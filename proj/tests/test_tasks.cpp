#include <doctest.h>

#include "davarlabel/errors.hpp"
#include "davarlabel/schema.hpp"
#include "davarlabel/tasks.hpp"
#include "generators.hpp"

using namespace davar;
using testsupport::Rng;

namespace {

const char* kReceipt = R"({
  "receipt.jpg": {
    "height": 100, "width": 80,
    "content_ann": {
      "bboxes": [[0,0,40,10],[0,20,40,30],[0,40,40,50]],
      "texts": ["ACME", "2022-06-01", "12.50"],
      "labels": [["company"],["date"],["total"]]
    }
  }})";

}  // namespace

TEST_CASE("required_keys table") {
  CHECK(required_keys(TaskKind::KIE) ==
        std::set<std::string>{"bboxes", "texts", "labels"});
  CHECK(required_keys(TaskKind::Detection) == std::set<std::string>{"bboxes"});
  CHECK(required_keys(TaskKind::Recognition) == std::set<std::string>{"texts"});
  CHECK(required_keys(TaskKind::Spotting) ==
        std::set<std::string>{"bboxes", "texts"});
  CHECK(required_keys(TaskKind::LayoutAnalysis) ==
        std::set<std::string>{"bboxes", "labels"});
  CHECK(required_keys(TaskKind::TableRecognition).count("cells") == 1);
  CHECK(required_keys(TaskKind::ReadingOrder) ==
        std::set<std::string>{"bboxes", "extras.order"});
  CHECK(required_keys(TaskKind::VideoText) ==
        std::set<std::string>{"bboxes", "texts", "extras.track_id",
                              "extras.frame"});
  CHECK(required_keys(TaskKind::NER) ==
        std::set<std::string>{"extras.tokens", "extras.tags"});
}

TEST_CASE("task names round-trip") {
  for (TaskKind t : all_tasks()) {
    CHECK(task_from_name(task_name(t)) == t);
  }
  CHECK_FALSE(task_from_name("NotATask").has_value());
}

TEST_CASE("KIE projection selects box, text, label per instance") {
  const auto set = parse_annotation_file(kReceipt);
  const auto& r = set.records.at("receipt.jpg");
  const auto sample = project(r, TaskKind::KIE);
  CHECK(sample.levels() == 1);
  REQUIRE(sample.primary.bboxes.has_value());
  REQUIRE(sample.primary.texts.has_value());
  REQUIRE(sample.primary.labels.has_value());
  CHECK(sample.primary.bboxes->size() == 3);
  CHECK((*sample.primary.texts)[1] == "2022-06-01");
  CHECK((*sample.primary.labels)[2] == std::vector<std::string>{"total"});
  CHECK_FALSE(sample.primary.cells.has_value());
  CHECK(sample.primary.extras.empty());
}

TEST_CASE("Detection projection of the same record carries boxes only") {
  const auto set = parse_annotation_file(kReceipt);
  const auto sample = project(set.records.at("receipt.jpg"), TaskKind::Detection);
  CHECK(sample.primary.bboxes->size() == 3);
  CHECK_FALSE(sample.primary.texts.has_value());
  CHECK_FALSE(sample.primary.labels.has_value());
}

TEST_CASE("missing key is named in the error") {
  const auto set = parse_annotation_file(
      R"({"a.jpg": {"height": 4, "width": 4,
                    "content_ann": {"bboxes": [[0,0,1,1]]}}})");
  try {
    project(set.records.at("a.jpg"), TaskKind::Recognition);
    FAIL("expected MissingRequiredKey");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MissingRequiredKey);
    CHECK(std::string(e.what()).find("texts") != std::string::npos);
    CHECK(std::string(e.what()).find("Recognition") != std::string::npos);
  }
}

TEST_CASE("LayoutAnalysis exposes both levels when content_ann2 exists") {
  const auto set = parse_annotation_file(R"({
    "page.png": {
      "height": 300, "width": 300,
      "content_ann": {"bboxes": [[0,0,10,10]], "labels": [["line"]]},
      "content_ann2": {"bboxes": [[0,0,50,60],[0,80,50,100]],
                       "labels": [["paragraph"],["table"]]}
    }})");
  const auto sample = project(set.records.at("page.png"), TaskKind::LayoutAnalysis);
  CHECK(sample.levels() == 2);
  REQUIRE(sample.secondary.has_value());
  CHECK(sample.secondary->bboxes->size() == 2);
  CHECK((*sample.secondary->labels)[1] == std::vector<std::string>{"table"});
}

TEST_CASE("projection succeeds iff the required keys are present") {
  Rng rng(555);
  for (int i = 0; i < 60; ++i) {
    const auto record = testsupport::random_record(rng);
    for (TaskKind task : all_tasks()) {
      bool has_all = true;
      for (const auto& key : required_keys(task)) {
        bool present;
        if (key.rfind("extras.", 0) == 0) {
          present = record.content_ann.extras.count(key.substr(7)) > 0;
        } else {
          present = record.content_ann.has_key(key);
        }
        has_all = has_all && present;
      }
      if (has_all) {
        CHECK_NOTHROW(project(record, task));
      } else {
        CHECK_THROWS_AS(project(record, task), Error);
      }
    }
  }
}

TEST_CASE("projection is lossless for the selected keys") {
  Rng rng(556);
  for (int i = 0; i < 60; ++i) {
    const auto record = testsupport::random_record(rng);
    if (!record.content_ann.has_bboxes || !record.content_ann.texts) continue;
    const auto sample = project(record, TaskKind::Spotting);
    CHECK(*sample.primary.bboxes == record.content_ann.bboxes);
    CHECK(*sample.primary.texts == *record.content_ann.texts);
  }
}

TEST_CASE("label_vocabulary sorts unique categories") {
  const auto set = parse_annotation_file(kReceipt);
  CHECK(label_vocabulary(set, TaskKind::KIE, 0) ==
        std::vector<std::string>{"company", "date", "total"});
  CHECK(label_vocabulary(AnnotationSet{}, TaskKind::KIE, 0).empty());
}

TEST_CASE("label_vocabulary on the second subtask position") {
  // Hand-built 4-record fixture with 2-subtask labels; position 1 holds a
  // disjoint category set from position 0.
  const auto set = parse_annotation_file(R"({
    "r1.jpg": {"height": 10, "width": 10,
               "content_ann": {"bboxes": [[0,0,1,1],[1,1,2,2]],
                               "labels": [["company","printed"],["date","handwritten"]]}},
    "r2.jpg": {"height": 10, "width": 10,
               "content_ann": {"bboxes": [[0,0,1,1]],
                               "labels": [["total","printed"]]}},
    "r3.jpg": {"height": 10, "width": 10,
               "content_ann": {"bboxes": [[0,0,1,1]],
                               "labels": [["company","stamped"]]}},
    "r4.jpg": {"height": 10, "width": 10, "content_ann": {"bboxes": [], "labels": []}}})");
  // Independent enumeration: collect by hand.
  CHECK(label_vocabulary(set, TaskKind::KIE, 1) ==
        std::vector<std::string>{"handwritten", "printed", "stamped"});
  CHECK(label_vocabulary(set, TaskKind::KIE, 0) ==
        std::vector<std::string>{"company", "date", "total"});
  CHECK_THROWS_AS(label_vocabulary(set, TaskKind::KIE, 2), Error);
}

TEST_CASE("VideoText records use video_path#frame_index keys") {
  const auto set = parse_annotation_file(R"({
    "clip.mp4#12": {"height": 240, "width": 320,
                    "content_ann": {"bboxes": [[0,0,30,20]],
                                    "texts": ["STOP"],
                                    "track_id": [4],
                                    "frame": [12]}}})");
  const auto sample =
      project(set.records.at("clip.mp4#12"), TaskKind::VideoText);
  CHECK(sample.primary.extras.at("track_id") == nlohmann::json::array({4}));
  CHECK(sample.primary.extras.at("frame") == nlohmann::json::array({12}));
  CHECK(sample.primary.texts->at(0) == "STOP");
}

TEST_CASE("NER projection selects the token extras") {
  const auto set = parse_annotation_file(R"({
    "doc.txt": {"height": 1, "width": 1,
                "content_ann": {"bboxes": [[0,0,1,1]],
                                "tokens": [["EU","rejects"]],
                                "tags": [["B-ORG","O"]]}}})");
  const auto sample = project(set.records.at("doc.txt"), TaskKind::NER);
  CHECK(sample.primary.extras.count("tokens") == 1);
  CHECK(sample.primary.extras.count("tags") == 1);
  CHECK_FALSE(sample.primary.bboxes.has_value());  // not a selected key
}

TEST_CASE("label_vocabulary rejects tasks without labels") {
  try {
    label_vocabulary(AnnotationSet{}, TaskKind::Detection, 0);
    FAIL("expected MissingRequiredKey");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MissingRequiredKey);
  }
}

TEST_CASE("subtask index out of range names the record") {
  const auto set = parse_annotation_file(kReceipt);
  try {
    label_vocabulary(set, TaskKind::KIE, 3);
    FAIL("expected SubtaskIndexOutOfRange");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::SubtaskIndexOutOfRange);
    CHECK(std::string(e.what()).find("receipt.jpg") != std::string::npos);
  }
}
