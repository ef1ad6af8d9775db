#pragma once

// Seeded random fixtures shared by the unit and acceptance suites. All
// generators produce records that validate clean unless stated otherwise.

#include <random>
#include <string>
#include <vector>

#include "davarlabel/schema.hpp"

namespace testsupport {

using davar::AnnotationSet;
using davar::ContentAnn;
using davar::GeoBox;
using davar::ImageRecord;
using davar::LabelEntry;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::int64_t int_in(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
  }
  double real_in(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  bool chance(double p) { return real_in(0.0, 1.0) < p; }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

// Axis-aligned box with integer corners inside [0,w]x[0,h].
inline GeoBox random_rect(Rng& rng, std::int64_t w, std::int64_t h) {
  const auto x1 = rng.int_in(0, w - 1);
  const auto y1 = rng.int_in(0, h - 1);
  const auto x2 = rng.int_in(x1 + 1, w);
  const auto y2 = rng.int_in(y1 + 1, h);
  return GeoBox{{static_cast<double>(x1), static_cast<double>(y1),
                 static_cast<double>(x2), static_cast<double>(y2)}};
}

// Convex polygon with >= 4 integer vertices inside [0,w]x[0,h]. Winding is
// randomized; callers needing canonical form normalize afterwards.
GeoBox random_convex_polygon(Rng& rng, std::int64_t w, std::int64_t h);

inline GeoBox random_box(Rng& rng, std::int64_t w, std::int64_t h) {
  return rng.chance(0.5) ? random_rect(rng, w, h)
                         : random_convex_polygon(rng, w, h);
}

struct RecordOptions {
  double texts_prob = 0.7;
  double labels_prob = 0.7;
  double cells_prob = 0.2;
  double order_prob = 0.2;
  double cares_prob = 0.2;
  double float_extra_prob = 0.3;
  double ann2_prob = 0.25;
  int max_label_arity = 2;
  std::int64_t max_boxes = 10;
};

ImageRecord random_record(Rng& rng, const RecordOptions& opts = {});

AnnotationSet random_set(Rng& rng, std::int64_t max_images = 20,
                         const RecordOptions& opts = {});

// NER-shaped record: w = h = 1, one full-image box per sentence, nested
// extras.tokens / extras.tags.
ImageRecord random_ner_record(Rng& rng, std::int64_t max_sentences = 4);

std::string random_text(Rng& rng, std::int64_t max_len = 12);

}  // namespace testsupport
