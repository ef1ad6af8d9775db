#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "davarlabel/errors.hpp"
#include "davarlabel/metrics.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace davar;
using testsupport::Rng;

namespace {

GeoBox square(double x1, double y1, double x2, double y2) {
  return GeoBox{x1, y1, x2, y2};
}

Prediction pred(const GeoBox& box, double score, std::string category = "") {
  Prediction p;
  p.box = box;
  p.score = score;
  p.category = std::move(category);
  return p;
}

std::array<double, 4> rect_of(const GeoBox& b) {
  return {b.points[0], b.points[1], b.points[2], b.points[3]};
}

}  // namespace

TEST_CASE("polygon_iou: hand fixtures") {
  CHECK(polygon_iou(square(0, 0, 2, 2), square(0, 0, 2, 2)) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(polygon_iou(square(0, 0, 1, 1), square(5, 5, 6, 6)) == 0.0);
  // inter 2, union 6.
  CHECK(polygon_iou(square(0, 0, 2, 2), square(1, 0, 3, 2)) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("polygon_iou: square against half-covering triangle") {
  // The triangle (0,0),(1,0),(0,1) written with a collinear midpoint vertex
  // covers half the unit square: inter 0.5, union 1.
  const GeoBox triangle{0, 0, 1, 0, 0.5, 0.5, 0, 1};
  CHECK(polygon_iou(square(0, 0, 1, 1), triangle) ==
        doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("polygon_iou: touching squares overlap zero") {
  CHECK(polygon_iou(square(0, 0, 1, 1), square(1, 0, 2, 1)) == 0.0);
}

TEST_CASE("polygon_iou: matches rectangle arithmetic on random rects") {
  Rng rng(20240823);
  for (int i = 0; i < 500; ++i) {
    const auto a = testsupport::random_rect(rng, 64, 64);
    const auto b = testsupport::random_rect(rng, 64, 64);
    const double via_polygons = polygon_iou(a, b);
    const double via_intervals = testsupport::rect_iou(rect_of(a), rect_of(b));
    CHECK(std::abs(via_polygons - via_intervals) < 1e-12);
  }
}

TEST_CASE("polygon_iou: symmetry, self-IoU, range, scale invariance") {
  Rng rng(20240824);
  for (int i = 0; i < 300; ++i) {
    const auto a = testsupport::random_box(rng, 128, 128);
    const auto b = testsupport::random_box(rng, 128, 128);
    const double ab = polygon_iou(a, b);
    const double ba = polygon_iou(b, a);
    CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
    CHECK(polygon_iou(a, a) == doctest::Approx(1.0).epsilon(1e-12));
    const double s = rng.real_in(0.1, 8.0);
    auto scale = [s](GeoBox box) {
      for (auto& v : box.points) v *= s;
      return box;
    };
    CHECK(std::abs(polygon_iou(scale(a), scale(b)) - ab) < 1e-12);
  }
}

TEST_CASE("polygon_iou: non-convex input is rejected") {
  const GeoBox arrow{0, 0, 4, 0, 4, 4, 2, 1, 0, 4};
  try {
    polygon_iou(arrow, square(0, 0, 1, 1));
    FAIL("expected NonConvexPolygon");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NonConvexPolygon);
  }
}

TEST_CASE("match_detections: single exact match") {
  const std::vector<GeoBox> gts{square(0, 0, 4, 4)};
  const auto m = match_detections({pred(square(0, 0, 4, 4), 0.9)}, gts, 0.5);
  CHECK(m.tp_count() == 1);
  CHECK(m.fp_count() == 0);
  CHECK(m.unmatched_gt == 0);
  CHECK(m.matched_gt[0] == 0);
}

TEST_CASE("match_detections: double detection yields one TP one FP") {
  const std::vector<GeoBox> gts{square(0, 0, 4, 4)};
  const auto m = match_detections(
      {pred(square(0, 0, 4, 4), 0.7), pred(square(0, 0, 4, 4), 0.9)}, gts, 0.5);
  CHECK(m.tp_count() == 1);
  CHECK(m.fp_count() == 1);
  // The higher-scored prediction wins the gt.
  CHECK(m.matched_gt[1] == 0);
  CHECK(m.matched_gt[0] == -1);
}

TEST_CASE("match_detections: 3x3 crossing case equals exhaustive search") {
  // Three gts in a row; three predictions each straddling two of them.
  const std::vector<GeoBox> gts{square(0, 0, 10, 10), square(8, 0, 18, 10),
                                square(16, 0, 26, 10)};
  const std::vector<Prediction> preds{
      pred(square(1, 0, 11, 10), 0.9),
      pred(square(7, 0, 17, 10), 0.8),
      pred(square(15, 0, 25, 10), 0.7),
  };
  const auto m = match_detections(preds, gts, 0.5);
  std::vector<testsupport::OracleDetection> opreds;
  std::vector<std::array<double, 4>> ogts;
  for (const auto& p : preds) opreds.push_back({rect_of(p.box), p.score});
  for (const auto& g : gts) ogts.push_back(rect_of(g));
  CHECK(m.tp_count() == testsupport::exhaustive_best_tp(opreds, ogts, 0.5));
}

TEST_CASE("match_detections: ranking only depends on score order") {
  Rng rng(20240825);
  for (int i = 0; i < 100; ++i) {
    std::vector<GeoBox> gts;
    std::vector<Prediction> preds;
    const auto g = rng.int_in(0, 5), p = rng.int_in(0, 5);
    for (int k = 0; k < g; ++k) gts.push_back(testsupport::random_rect(rng, 32, 32));
    for (int k = 0; k < p; ++k) {
      preds.push_back(pred(testsupport::random_rect(rng, 32, 32),
                           rng.real_in(0.0, 1.0)));
    }
    const auto base = match_detections(preds, gts, 0.5);
    auto scaled = preds;
    const double factor = rng.real_in(0.1, 0.9);
    for (auto& q : scaled) q.score *= factor;
    const auto rescored = match_detections(scaled, gts, 0.5);
    CHECK(base.matched_gt == rescored.matched_gt);
    CHECK(base.ranking == rescored.ranking);
  }
}

TEST_CASE("match_detections agrees with the transcription oracle") {
  Rng rng(20240826);
  for (int i = 0; i < 300; ++i) {
    std::vector<GeoBox> gts;
    std::vector<testsupport::OracleDetection> opreds;
    std::vector<Prediction> preds;
    const auto g = rng.int_in(0, 5), p = rng.int_in(0, 5);
    for (int k = 0; k < g; ++k) gts.push_back(testsupport::random_rect(rng, 24, 24));
    for (int k = 0; k < p; ++k) {
      const auto box = testsupport::random_rect(rng, 24, 24);
      const double score =
          rng.chance(0.3) ? 0.5 : rng.real_in(0.0, 1.0);  // some ties
      preds.push_back(pred(box, score));
      opreds.push_back({rect_of(box), score});
    }
    std::vector<std::array<double, 4>> ogts;
    for (const auto& b : gts) ogts.push_back(rect_of(b));
    const double thresh = rng.chance(0.5) ? 0.5 : rng.real_in(0.1, 0.9);
    const auto got = match_detections(preds, gts, thresh);
    const auto expected = testsupport::greedy_match_rects(opreds, ogts, thresh);
    CHECK(got.matched_gt == expected.matched_gt);
    CHECK(got.unmatched_gt == expected.unmatched_gt);
  }
}

TEST_CASE("detection_prf") {
  const auto perfect = detection_prf(5, 0, 0);
  CHECK(perfect.precision == 1.0);
  CHECK(perfect.recall == 1.0);
  CHECK(perfect.hmean == 1.0);
  const auto nothing = detection_prf(0, 0, 3);
  CHECK(nothing.precision == 0.0);
  CHECK(nothing.recall == 0.0);
  CHECK(nothing.hmean == 0.0);
  // 1 correct prediction, 2 gts: P=1, R=0.5, hmean=2/3.
  const auto half = detection_prf(1, 0, 1);
  CHECK(half.precision == 1.0);
  CHECK(half.recall == 0.5);
  CHECK(half.hmean == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("kie_macro_f1: fixtures") {
  CHECK(kie_macro_f1({"a", "b", "a"}, {"a", "b", "a"}) == 1.0);
  CHECK(kie_macro_f1({"b", "a", "b"}, {"a", "b", "a"}) == 0.0);
  // Confusion counts (A: tp1 fp1 fn0; B: tp1 fp0 fn1): macro = 2/3.
  const double macro = kie_macro_f1({"A", "A", "B"}, {"A", "B", "B"});
  CHECK(macro == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(macro == 2.0 / 3.0);  // exact
  CHECK_THROWS_AS(kie_macro_f1({"a"}, {"a", "b"}), Error);
}

TEST_CASE("kie_macro_f1: classes absent from gt are excluded") {
  // Prediction invents class "c"; only a and b count.
  const double macro = kie_macro_f1({"a", "c"}, {"a", "b"});
  // F1_a = 1, F1_b = 0.
  CHECK(macro == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("kie_macro_f1 agrees with the recount oracle") {
  Rng rng(20240827);
  const std::vector<std::string> classes{"a", "b", "c"};
  for (int i = 0; i < 300; ++i) {
    const auto n = rng.int_in(1, 12);
    std::vector<std::string> gt, pd;
    for (int k = 0; k < n; ++k) {
      gt.push_back(classes[static_cast<std::size_t>(rng.int_in(0, 2))]);
      pd.push_back(classes[static_cast<std::size_t>(rng.int_in(0, 2))]);
    }
    CHECK(std::abs(kie_macro_f1(pd, gt) -
                   testsupport::macro_f1_oracle(pd, gt)) < 1e-12);
  }
}

TEST_CASE("average_precision: fixtures") {
  CHECK(average_precision({true}, 1) == 1.0);
  CHECK(average_precision({false}, 1) == 0.0);
  CHECK(average_precision({}, 0) == 0.0);
  const double ap = average_precision({true, false, true}, 2);
  CHECK(ap == doctest::Approx(testsupport::ap_oracle({true, false, true}, 2))
                  .epsilon(1e-15));
  CHECK(ap == doctest::Approx((51.0 + 50.0 * (2.0 / 3.0)) / 101.0)
                  .epsilon(1e-12));
}

TEST_CASE("average_precision: envelope oracle over random flags") {
  Rng rng(20240828);
  for (int i = 0; i < 400; ++i) {
    const auto n = rng.int_in(0, 12);
    std::vector<bool> flags;
    long tp = 0;
    for (int k = 0; k < n; ++k) {
      flags.push_back(rng.chance(0.5));
      tp += flags.back();
    }
    const long num_gt = tp + rng.int_in(0, 4);
    CHECK(std::abs(average_precision(flags, num_gt) -
                   testsupport::ap_oracle(flags, num_gt)) < 1e-12);
  }
}

TEST_CASE("average_precision: flipping FP to TP never lowers AP") {
  Rng rng(20240829);
  for (int i = 0; i < 200; ++i) {
    const auto n = rng.int_in(1, 10);
    std::vector<bool> flags;
    for (int k = 0; k < n; ++k) flags.push_back(rng.chance(0.4));
    const long num_gt =
        std::count(flags.begin(), flags.end(), true) + rng.int_in(1, 3);
    std::vector<std::size_t> fps;
    for (std::size_t k = 0; k < flags.size(); ++k) {
      if (!flags[k]) fps.push_back(k);
    }
    if (fps.empty()) continue;
    const double before = average_precision(flags, num_gt);
    auto flipped = flags;
    flipped[fps[static_cast<std::size_t>(
        rng.int_in(0, static_cast<std::int64_t>(fps.size()) - 1))]] = true;
    CHECK(average_precision(flipped, num_gt) >= before - 1e-15);
  }
}

TEST_CASE("coco_map: perfect and empty predictions") {
  std::vector<ImageEval> images(1);
  images[0].gts.push_back({square(0, 0, 10, 10), "text"});
  images[0].gts.push_back({square(20, 0, 30, 10), "table"});
  images[0].preds.push_back(pred(square(0, 0, 10, 10), 1.0, "text"));
  images[0].preds.push_back(pred(square(20, 0, 30, 10), 1.0, "table"));
  CHECK(coco_map(images) == 1.0);

  std::vector<ImageEval> none(1);
  none[0].gts.push_back({square(0, 0, 10, 10), "text"});
  CHECK(coco_map(none) == 0.0);
  CHECK(coco_map({}) == 0.0);
}

TEST_CASE("coco_map: toy set equals the independent oracle") {
  Rng rng(20240830);
  for (int i = 0; i < 60; ++i) {
    const auto num_images = rng.int_in(1, 3);
    const std::vector<std::string> classes{"a", "b"};
    std::vector<ImageEval> images;
    std::vector<testsupport::OracleImage> oracle_images;
    for (int im = 0; im < num_images; ++im) {
      ImageEval ie;
      testsupport::OracleImage oi;
      const auto g = rng.int_in(0, 4), p = rng.int_in(0, 4);
      for (int k = 0; k < g; ++k) {
        const auto box = testsupport::random_rect(rng, 48, 48);
        const auto cls = classes[static_cast<std::size_t>(rng.int_in(0, 1))];
        ie.gts.push_back({box, cls});
        oi.gts.push_back(rect_of(box));
        oi.gt_classes.push_back(cls);
      }
      for (int k = 0; k < p; ++k) {
        const auto box = testsupport::random_rect(rng, 48, 48);
        const auto cls = classes[static_cast<std::size_t>(rng.int_in(0, 1))];
        const double score = rng.chance(0.25) ? 0.5 : rng.real_in(0.0, 1.0);
        ie.preds.push_back(pred(box, score, cls));
        oi.preds.push_back({rect_of(box), score});
        oi.pred_classes.push_back(cls);
      }
      images.push_back(std::move(ie));
      oracle_images.push_back(std::move(oi));
    }
    CHECK(std::abs(coco_map(images) - testsupport::map_oracle(oracle_images)) <
          1e-12);
  }
}

TEST_CASE("reading_order_tau: fixtures and errors") {
  CHECK(reading_order_tau({0, 1, 2}, {0, 1, 2}) == 1.0);
  CHECK(reading_order_tau({2, 1, 0}, {0, 1, 2}) == -1.0);
  CHECK(reading_order_tau({0}, {0}) == 1.0);
  CHECK(reading_order_tau({}, {}) == 1.0);
  CHECK_THROWS_AS(reading_order_tau({0, 1}, {0, 1, 2}), Error);
  try {
    reading_order_tau({0, 0, 2}, {0, 1, 2});
    FAIL("expected NotAPermutation");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NotAPermutation);
  }
}

TEST_CASE("reading_order_tau equals pair counting") {
  Rng rng(20240831);
  for (int i = 0; i < 300; ++i) {
    const auto n = rng.int_in(0, 12);
    std::vector<std::int64_t> a(static_cast<std::size_t>(n));
    std::vector<std::int64_t> b(static_cast<std::size_t>(n));
    std::iota(a.begin(), a.end(), 0);
    std::iota(b.begin(), b.end(), 0);
    std::shuffle(a.begin(), a.end(), rng.engine());
    std::shuffle(b.begin(), b.end(), rng.engine());
    CHECK(std::abs(reading_order_tau(a, b) -
                   testsupport::tau_pair_oracle(a, b)) < 1e-12);
  }
}

TEST_CASE("evaluate_kie report") {
  const auto report = evaluate_kie({"A", "A", "B"}, {"A", "B", "B"});
  CHECK(report.macro_f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(report.per_class.at("A").tp == 1);
  CHECK(report.per_class.at("A").fp == 1);
  CHECK(report.per_class.at("A").fn == 0);
  CHECK(report.per_class.at("B").fn == 1);
  const auto j = report.to_json("F1-Score", report.macro_f1);
  CHECK(j.at("aggregate").at("F1-Score") ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("evaluate_detection report") {
  std::vector<ImageEval> images(2);
  images[0].gts.push_back({square(0, 0, 10, 10), "text"});
  images[0].gts.push_back({square(20, 0, 30, 10), "text"});
  images[0].preds.push_back(pred(square(0, 0, 10, 10), 0.9, "text"));
  images[1].gts.push_back({square(0, 0, 8, 8), "table"});
  images[1].preds.push_back(pred(square(0, 0, 8, 8), 0.8, "table"));
  const auto report = evaluate_detection(images, 0.5);
  CHECK(report.per_class.at("text").recall == doctest::Approx(0.5));
  CHECK(report.per_class.at("text").precision == doctest::Approx(1.0));
  CHECK(report.per_class.at("table").f1 == doctest::Approx(1.0));
  CHECK(report.per_class.at("table").ap == doctest::Approx(1.0));
  CHECK(report.map ==
        doctest::Approx((report.per_class.at("text").ap + 1.0) / 2.0));
}
