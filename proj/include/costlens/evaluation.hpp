#pragma once

#include "costlens/catalog.hpp"
#include "costlens/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace costlens {

struct PixelCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;

  PixelCounts& operator+=(const PixelCounts& other) {
    tp += other.tp;
    fp += other.fp;
    fn += other.fn;
    return *this;
  }
  friend bool operator==(const PixelCounts&, const PixelCounts&) = default;
};

// nullopt marks an empty denominator (0/0), never silently 0 or 1.
std::optional<double> precision(const PixelCounts& counts);
std::optional<double> recall(const PixelCounts& counts);

struct PixelMetrics {
  PixelCounts counts;
  std::optional<double> precision;
  std::optional<double> recall;
};

// Pixel counts of class k. Pixels whose ground truth is `ignore` never count;
// with a RoI only its member pixels count.
PixelCounts pixel_counts(const Mask& pred, const LabelField& gt, int k,
                         std::uint8_t ignore = kDefaultIgnore, const BinaryMask* roi = nullptr);

PixelMetrics pixel_metrics(const Mask& pred, const LabelField& gt, int k,
                           std::uint8_t ignore = kDefaultIgnore);
PixelMetrics pixel_metrics(const Mask& pred, const LabelField& gt, const BinaryMask& roi, int k,
                           std::uint8_t ignore = kDefaultIgnore);

// Mean of TP / (TP + FP + FN) over the classes present in ground truth or
// prediction, full frame, ignore excluded. Throws if no class is present.
double mean_iou(const Mask& pred, const LabelField& gt, const ClassCatalog& catalog);

struct BoundingBox {
  int top = 0;
  int left = 0;
  int bottom = 0;  // inclusive
  int right = 0;   // inclusive
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct Segment {
  int class_index = 0;
  std::vector<int> pixels;  // linear indices row * width + col, ascending
  BoundingBox box;
};

// Maximal 8-connected components of the set pixels, ordered by the
// (top, left) corner of their bounding boxes, then by first pixel in raster
// order.
std::vector<Segment> connected_components(const BinaryMask& members, int class_index);
std::vector<Segment> connected_components(const Mask& mask, int class_index);

struct ScoredSegment {
  Segment segment;
  double iou = 0.0;
};

struct SegmentReport {
  int class_index = 0;
  std::vector<ScoredSegment> predicted;
  std::vector<ScoredSegment> ground_truth;
  int false_positives = 0;  // predicted segments with IoU == 0
  int false_negatives = 0;  // ground-truth segments with IoU == 0
};

// Predicted segments are scored against the union of ground-truth class-k
// pixels and vice versa. Predicted pixels on ignore ground truth are dropped
// before segmentation. With a RoI, a segment is reported iff it touches it.
SegmentReport segment_report(const Mask& pred, const LabelField& gt, int k,
                             std::uint8_t ignore = kDefaultIgnore,
                             const BinaryMask* roi = nullptr);

}  // namespace costlens
