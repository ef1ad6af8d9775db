#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "davarlabel/geometry.hpp"

namespace davar {

/// One scored detection.
struct Prediction {
  GeoBox box;
  double score = 0.0;
  std::string category;
  std::optional<std::string> text;
};

/// Ground-truth instance for detection-style evaluation.
struct GtInstance {
  GeoBox box;
  std::string category;
};

/// Predictions and ground truth of one image, kept in canonical image order
/// by the caller.
struct ImageEval {
  std::vector<Prediction> preds;
  std::vector<GtInstance> gts;
};

/// Intersection-over-union of two convex boxes via Sutherland-Hodgman
/// clipping. Throws Error(NonConvexPolygon) for non-convex input and
/// propagates DegenerateBox from normalization.
double polygon_iou(const GeoBox& a, const GeoBox& b);

struct DetectionMatch {
  /// Per input prediction: matched gt index or -1 (FP).
  std::vector<int> matched_gt;
  /// Prediction indices in descending-score order (stable on ties).
  std::vector<std::size_t> ranking;
  int unmatched_gt = 0;

  int tp_count() const;
  int fp_count() const { return static_cast<int>(matched_gt.size()) - tp_count(); }
};

/// Greedy score-ordered matching: each prediction takes the unmatched gt
/// with the highest IoU >= iou_thresh (ties: lowest gt index).
DetectionMatch match_detections(const std::vector<Prediction>& preds,
                                const std::vector<GeoBox>& gts,
                                double iou_thresh);

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double hmean = 0.0;
};

/// P = TP/(TP+FP), R = TP/(TP+FN), hmean = 2PR/(P+R); zero denominators
/// yield zero.
Prf detection_prf(long tp, long fp, long fn);

/// Per-box classification macro F1 over classes present in gt. Throws
/// Error(LengthMismatch) when the two label lists differ in length.
double kie_macro_f1(const std::vector<std::string>& pred_labels,
                    const std::vector<std::string>& gt_labels);

/// 101-point interpolated average precision over a ranked TP/FP flag list.
double average_precision(const std::vector<bool>& ranked_tp_flags,
                         long num_gt);

/// COCO-style mAP: AP per class per IoU threshold {0.50, 0.55, ..., 0.95},
/// averaged over thresholds, then over classes present in the ground truth.
/// Global ranking ties break by image position, then by input order.
double coco_map(const std::vector<ImageEval>& images);

/// Kendall tau-a between two permutations of 0..n-1. Throws
/// Error(NotAPermutation) / Error(LengthMismatch). n <= 1 yields 1.
double reading_order_tau(const std::vector<std::int64_t>& pred_order,
                         const std::vector<std::int64_t>& gt_order);

// ---------------------------------------------------------------------------
// Aggregate reports
// ---------------------------------------------------------------------------

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double ap = 0.0;
  long tp = 0;
  long fp = 0;
  long fn = 0;
};

/// Per-class and aggregate results of one evaluation run.
struct EvalReport {
  std::map<std::string, ClassMetrics> per_class;
  double macro_f1 = 0.0;
  double map = 0.0;
  double hmean = 0.0;

  /// `aggregate_name` labels the headline number ("F1-Score" for KIE,
  /// "mAP" for layout analysis).
  nlohmann::json to_json(const std::string& aggregate_name,
                         double aggregate_value) const;
};

/// KIE as per-box classification with ground-truth boxes given; label lists
/// are aligned per box across the whole dataset.
EvalReport evaluate_kie(const std::vector<std::string>& pred_labels,
                        const std::vector<std::string>& gt_labels);

/// Detection-style evaluation: per-class precision/recall/F1 and counts at
/// `iou_thresh`, per-class AP averaged over the COCO thresholds, aggregate
/// mAP/hmean/macro-F1.
EvalReport evaluate_detection(const std::vector<ImageEval>& images,
                              double iou_thresh);

}  // namespace davar
