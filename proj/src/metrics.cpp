#include "davarlabel/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "davarlabel/errors.hpp"

namespace davar {

namespace {

using Poly = std::vector<double>;  // flat x,y list

// Clip `subject` by the half-plane left of edge (ax,ay)->(bx,by) under the
// positive-shoelace winding.
Poly clip_by_edge(const Poly& subject, double ax, double ay, double bx,
                  double by) {
  Poly out;
  const std::size_t n = subject.size() / 2;
  if (n == 0) return out;
  auto side = [&](double px, double py) {
    return (bx - ax) * (py - ay) - (by - ay) * (px - ax);
  };
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    const double cx = subject[2 * i], cy = subject[2 * i + 1];
    const double dx = subject[2 * j], dy = subject[2 * j + 1];
    const double sc = side(cx, cy);
    const double sd = side(dx, dy);
    if (sc >= 0.0) {
      out.push_back(cx);
      out.push_back(cy);
    }
    if ((sc > 0.0 && sd < 0.0) || (sc < 0.0 && sd > 0.0)) {
      const double t = sc / (sc - sd);
      out.push_back(cx + t * (dx - cx));
      out.push_back(cy + t * (dy - cy));
    }
  }
  return out;
}

double intersection_area(const Poly& a, const Poly& b) {
  Poly clipped = a;
  const std::size_t nb = b.size() / 2;
  for (std::size_t i = 0; i < nb && !clipped.empty(); ++i) {
    const std::size_t j = (i + 1) % nb;
    clipped = clip_by_edge(clipped, b[2 * i], b[2 * i + 1], b[2 * j],
                           b[2 * j + 1]);
  }
  if (clipped.size() < 6) return 0.0;
  return std::abs(signed_area2(clipped)) / 2.0;
}

}  // namespace

double polygon_iou(const GeoBox& a, const GeoBox& b) {
  const GeoBox na = normalize_bbox(a);
  const GeoBox nb = normalize_bbox(b);
  if (!is_convex(na) || !is_convex(nb)) {
    throw Error(Errc::NonConvexPolygon,
                "polygon IoU is restricted to convex polygons");
  }
  const double inter = intersection_area(na.points, nb.points);
  const double area_a = std::abs(signed_area2(na.points)) / 2.0;
  const double area_b = std::abs(signed_area2(nb.points)) / 2.0;
  const double uni = area_a + area_b - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

int DetectionMatch::tp_count() const {
  int n = 0;
  for (int g : matched_gt) n += g >= 0;
  return n;
}

DetectionMatch match_detections(const std::vector<Prediction>& preds,
                                const std::vector<GeoBox>& gts,
                                double iou_thresh) {
  DetectionMatch result;
  result.matched_gt.assign(preds.size(), -1);
  result.ranking.resize(preds.size());
  std::iota(result.ranking.begin(), result.ranking.end(), std::size_t{0});
  std::stable_sort(result.ranking.begin(), result.ranking.end(),
                   [&preds](std::size_t i, std::size_t j) {
                     return preds[i].score > preds[j].score;
                   });
  std::vector<bool> taken(gts.size(), false);
  for (std::size_t rank = 0; rank < result.ranking.size(); ++rank) {
    const std::size_t p = result.ranking[rank];
    double best_iou = 0.0;
    int best_gt = -1;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (taken[g]) continue;
      const double iou = polygon_iou(preds[p].box, gts[g]);
      if (iou >= iou_thresh && iou > best_iou) {
        best_iou = iou;
        best_gt = static_cast<int>(g);
      }
    }
    if (best_gt >= 0) {
      taken[best_gt] = true;
      result.matched_gt[p] = best_gt;
    }
  }
  result.unmatched_gt = static_cast<int>(gts.size()) - result.tp_count();
  return result;
}

Prf detection_prf(long tp, long fp, long fn) {
  Prf out;
  out.precision = (tp + fp) > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
  out.recall = (tp + fn) > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  const double pr = out.precision + out.recall;
  out.hmean = pr > 0.0 ? 2.0 * out.precision * out.recall / pr : 0.0;
  return out;
}

double kie_macro_f1(const std::vector<std::string>& pred_labels,
                    const std::vector<std::string>& gt_labels) {
  if (pred_labels.size() != gt_labels.size()) {
    throw Error(Errc::LengthMismatch,
                "pred and gt label lists differ: " +
                    std::to_string(pred_labels.size()) + " vs " +
                    std::to_string(gt_labels.size()));
  }
  std::map<std::string, std::array<long, 3>> counts;  // tp, fp, fn
  for (std::size_t i = 0; i < gt_labels.size(); ++i) {
    if (pred_labels[i] == gt_labels[i]) {
      counts[gt_labels[i]][0]++;
    } else {
      counts[pred_labels[i]][1]++;
      counts[gt_labels[i]][2]++;
    }
  }
  std::set<std::string> gt_classes(gt_labels.begin(), gt_labels.end());
  if (gt_classes.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& cls : gt_classes) {
    const auto& [tp, fp, fn] = counts[cls];
    const long denom = 2 * tp + fp + fn;
    sum += denom > 0 ? 2.0 * static_cast<double>(tp) / denom : 0.0;
  }
  return sum / static_cast<double>(gt_classes.size());
}

double average_precision(const std::vector<bool>& ranked_tp_flags,
                         long num_gt) {
  if (num_gt <= 0) return 0.0;
  const std::size_t n = ranked_tp_flags.size();
  std::vector<double> recall(n), precision(n);
  long tp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    tp += ranked_tp_flags[i] ? 1 : 0;
    recall[i] = static_cast<double>(tp) / static_cast<double>(num_gt);
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
  }
  // Monotone precision envelope from the right.
  for (std::size_t i = n; i-- > 1;) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }
  double sum = 0.0;
  for (int s = 0; s <= 100; ++s) {
    const double r = static_cast<double>(s) / 100.0;
    // First rank reaching recall r carries the envelope precision there.
    const auto it = std::lower_bound(recall.begin(), recall.end(), r);
    if (it != recall.end()) {
      sum += precision[static_cast<std::size_t>(it - recall.begin())];
    }
  }
  return sum / 101.0;
}

namespace {

struct RankedFlag {
  double score;
  std::size_t image;
  std::size_t index;  // input order within the image
  bool tp;
};

// Descending score; ties by image position then input order.
bool ranked_before(const RankedFlag& a, const RankedFlag& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.image != b.image) return a.image < b.image;
  return a.index < b.index;
}

std::vector<double> coco_iou_thresholds() {
  std::vector<double> out;
  for (int i = 0; i <= 9; ++i) out.push_back(0.50 + 0.05 * i);
  return out;
}

// AP of one class at one IoU threshold across all images.
double class_ap_at(const std::vector<ImageEval>& images,
                   const std::string& cls, double thresh) {
  std::vector<RankedFlag> flags;
  long num_gt = 0;
  for (std::size_t img = 0; img < images.size(); ++img) {
    std::vector<Prediction> preds;
    std::vector<std::size_t> pred_index;
    for (std::size_t i = 0; i < images[img].preds.size(); ++i) {
      if (images[img].preds[i].category == cls) {
        preds.push_back(images[img].preds[i]);
        pred_index.push_back(i);
      }
    }
    std::vector<GeoBox> gts;
    for (const auto& gt : images[img].gts) {
      if (gt.category == cls) gts.push_back(gt.box);
    }
    num_gt += static_cast<long>(gts.size());
    if (preds.empty()) continue;
    const DetectionMatch match = match_detections(preds, gts, thresh);
    for (std::size_t i = 0; i < preds.size(); ++i) {
      flags.push_back({preds[i].score, img, pred_index[i],
                       match.matched_gt[i] >= 0});
    }
  }
  std::sort(flags.begin(), flags.end(), ranked_before);
  std::vector<bool> ranked;
  ranked.reserve(flags.size());
  for (const auto& f : flags) ranked.push_back(f.tp);
  return average_precision(ranked, num_gt);
}

std::vector<std::string> gt_classes_of(const std::vector<ImageEval>& images) {
  std::set<std::string> classes;
  for (const auto& img : images) {
    for (const auto& gt : img.gts) classes.insert(gt.category);
  }
  return {classes.begin(), classes.end()};
}

}  // namespace

double coco_map(const std::vector<ImageEval>& images) {
  const auto classes = gt_classes_of(images);
  if (classes.empty()) return 0.0;
  const auto thresholds = coco_iou_thresholds();
  double class_sum = 0.0;
  for (const auto& cls : classes) {
    double thresh_sum = 0.0;
    for (double t : thresholds) thresh_sum += class_ap_at(images, cls, t);
    class_sum += thresh_sum / static_cast<double>(thresholds.size());
  }
  return class_sum / static_cast<double>(classes.size());
}

double reading_order_tau(const std::vector<std::int64_t>& pred_order,
                         const std::vector<std::int64_t>& gt_order) {
  if (pred_order.size() != gt_order.size()) {
    throw Error(Errc::LengthMismatch, "order lists differ in length");
  }
  const std::size_t n = pred_order.size();
  auto check_perm = [n](const std::vector<std::int64_t>& v, const char* name) {
    std::vector<bool> seen(n, false);
    for (std::int64_t r : v) {
      if (r < 0 || r >= static_cast<std::int64_t>(n) ||
          seen[static_cast<std::size_t>(r)]) {
        throw Error(Errc::NotAPermutation,
                    std::string(name) + " is not a permutation of 0..n-1");
      }
      seen[static_cast<std::size_t>(r)] = true;
    }
  };
  check_perm(pred_order, "pred_order");
  check_perm(gt_order, "gt_order");
  if (n <= 1) return 1.0;
  // Read the pred ranks in gt-rank order, then tau follows from the number
  // of inversions of that sequence.
  std::vector<std::int64_t> seq(n);
  for (std::size_t i = 0; i < n; ++i) {
    seq[static_cast<std::size_t>(gt_order[i])] = pred_order[i];
  }
  // Merge-sort inversion count.
  std::vector<std::int64_t> tmp(n);
  std::uint64_t inversions = 0;
  for (std::size_t width = 1; width < n; width *= 2) {
    for (std::size_t lo = 0; lo + width < n; lo += 2 * width) {
      const std::size_t mid = lo + width;
      const std::size_t hi = std::min(lo + 2 * width, n);
      std::size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (seq[i] <= seq[j]) {
          tmp[k++] = seq[i++];
        } else {
          inversions += mid - i;
          tmp[k++] = seq[j++];
        }
      }
      while (i < mid) tmp[k++] = seq[i++];
      while (j < hi) tmp[k++] = seq[j++];
      std::copy(tmp.begin() + lo, tmp.begin() + hi, seq.begin() + lo);
    }
  }
  const double pairs = static_cast<double>(n) * (n - 1) / 2.0;
  const double discordant = static_cast<double>(inversions);
  return (pairs - 2.0 * discordant) / pairs;
}

nlohmann::json EvalReport::to_json(const std::string& aggregate_name,
                                   double aggregate_value) const {
  nlohmann::json per = nlohmann::json::object();
  for (const auto& [cls, m] : per_class) {
    per[cls] = {{"precision", m.precision}, {"recall", m.recall},
                {"f1", m.f1},               {"ap", m.ap},
                {"tp", m.tp},               {"fp", m.fp},
                {"fn", m.fn}};
  }
  return {{"per_class", per},
          {"aggregate",
           {{aggregate_name, aggregate_value},
            {"macro_f1", macro_f1},
            {"map", map},
            {"hmean", hmean}}}};
}

EvalReport evaluate_kie(const std::vector<std::string>& pred_labels,
                        const std::vector<std::string>& gt_labels) {
  if (pred_labels.size() != gt_labels.size()) {
    throw Error(Errc::LengthMismatch,
                "pred and gt label lists differ: " +
                    std::to_string(pred_labels.size()) + " vs " +
                    std::to_string(gt_labels.size()));
  }
  EvalReport report;
  std::map<std::string, std::array<long, 3>> counts;
  std::set<std::string> gt_classes(gt_labels.begin(), gt_labels.end());
  for (std::size_t i = 0; i < gt_labels.size(); ++i) {
    if (pred_labels[i] == gt_labels[i]) {
      counts[gt_labels[i]][0]++;
    } else {
      counts[pred_labels[i]][1]++;
      counts[gt_labels[i]][2]++;
    }
  }
  for (const auto& cls : gt_classes) {
    const auto& [tp, fp, fn] = counts[cls];
    const Prf prf = detection_prf(tp, fp, fn);
    ClassMetrics m;
    m.precision = prf.precision;
    m.recall = prf.recall;
    m.f1 = prf.hmean;  // F1 of a class is the harmonic mean of its P and R
    m.tp = tp;
    m.fp = fp;
    m.fn = fn;
    report.per_class[cls] = m;
    report.macro_f1 += m.f1;
  }
  if (!gt_classes.empty()) {
    report.macro_f1 /= static_cast<double>(gt_classes.size());
  }
  return report;
}

EvalReport evaluate_detection(const std::vector<ImageEval>& images,
                              double iou_thresh) {
  EvalReport report;
  const auto classes = gt_classes_of(images);
  const auto thresholds = coco_iou_thresholds();
  long total_tp = 0, total_fp = 0, total_fn = 0;
  for (const auto& cls : classes) {
    long tp = 0, fp = 0, fn = 0;
    for (const auto& img : images) {
      std::vector<Prediction> preds;
      for (const auto& p : img.preds) {
        if (p.category == cls) preds.push_back(p);
      }
      std::vector<GeoBox> gts;
      for (const auto& gt : img.gts) {
        if (gt.category == cls) gts.push_back(gt.box);
      }
      const DetectionMatch match = match_detections(preds, gts, iou_thresh);
      tp += match.tp_count();
      fp += match.fp_count();
      fn += match.unmatched_gt;
    }
    const Prf prf = detection_prf(tp, fp, fn);
    ClassMetrics m;
    m.precision = prf.precision;
    m.recall = prf.recall;
    m.f1 = prf.hmean;
    m.tp = tp;
    m.fp = fp;
    m.fn = fn;
    double thresh_sum = 0.0;
    for (double t : thresholds) thresh_sum += class_ap_at(images, cls, t);
    m.ap = thresh_sum / static_cast<double>(thresholds.size());
    report.per_class[cls] = m;
    report.macro_f1 += m.f1;
    report.map += m.ap;
    total_tp += tp;
    total_fp += fp;
    total_fn += fn;
  }
  if (!classes.empty()) {
    report.macro_f1 /= static_cast<double>(classes.size());
    report.map /= static_cast<double>(classes.size());
  }
  report.hmean = detection_prf(total_tp, total_fp, total_fn).hmean;
  return report;
}

}  // namespace davar
