#include "costlens/evaluation.hpp"

#include "costlens/error.hpp"

#include <algorithm>
#include <array>

namespace costlens {

namespace {

void require_same_shape(const Mask& pred, const LabelField& gt) {
  if (pred.rows() != gt.rows() || pred.cols() != gt.cols())
    throw ValidationError("prediction and ground truth differ in shape");
}

void require_same_shape(const Mask& pred, const BinaryMask& roi) {
  if (pred.rows() != roi.rows() || pred.cols() != roi.cols())
    throw ValidationError("RoI mask differs in shape from the prediction");
}

double overlap_iou(const Segment& segment, const BinaryMask& opposing,
                   std::int64_t opposing_size) {
  std::int64_t inter = 0;
  for (int p : segment.pixels) inter += opposing.data()[p] ? 1 : 0;
  const auto uni = static_cast<std::int64_t>(segment.pixels.size()) + opposing_size - inter;
  return inter == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

bool touches(const Segment& segment, const BinaryMask* roi) {
  if (!roi) return true;
  return std::any_of(segment.pixels.begin(), segment.pixels.end(),
                     [&](int p) { return roi->data()[p]; });
}

}  // namespace

std::optional<double> precision(const PixelCounts& counts) {
  const auto denom = counts.tp + counts.fp;
  if (denom == 0) return std::nullopt;
  return static_cast<double>(counts.tp) / static_cast<double>(denom);
}

std::optional<double> recall(const PixelCounts& counts) {
  const auto denom = counts.tp + counts.fn;
  if (denom == 0) return std::nullopt;
  return static_cast<double>(counts.tp) / static_cast<double>(denom);
}

PixelCounts pixel_counts(const Mask& pred, const LabelField& gt, int k, std::uint8_t ignore,
                         const BinaryMask* roi) {
  require_same_shape(pred, gt);
  if (roi) require_same_shape(pred, *roi);
  PixelCounts c;
  const auto n = pred.size();
  for (Eigen::Index p = 0; p < n; ++p) {
    const std::uint8_t g = gt.data()[p];
    if (g == ignore) continue;
    if (roi && !roi->data()[p]) continue;
    const bool predicted = pred.data()[p] == k;
    const bool target = g == k;
    c.tp += predicted && target;
    c.fp += predicted && !target;
    c.fn += !predicted && target;
  }
  return c;
}

PixelMetrics pixel_metrics(const Mask& pred, const LabelField& gt, int k, std::uint8_t ignore) {
  const PixelCounts c = pixel_counts(pred, gt, k, ignore);
  return {c, precision(c), recall(c)};
}

PixelMetrics pixel_metrics(const Mask& pred, const LabelField& gt, const BinaryMask& roi, int k,
                           std::uint8_t ignore) {
  const PixelCounts c = pixel_counts(pred, gt, k, ignore, &roi);
  return {c, precision(c), recall(c)};
}

double mean_iou(const Mask& pred, const LabelField& gt, const ClassCatalog& catalog) {
  require_same_shape(pred, gt);
  const int n = catalog.size();
  const std::uint8_t ignore = catalog.ignore_label();
  std::vector<PixelCounts> counts(n);
  for (Eigen::Index p = 0; p < pred.size(); ++p) {
    const std::uint8_t g = gt.data()[p];
    if (g == ignore) continue;
    const std::uint8_t d = pred.data()[p];
    if (g >= n || d >= n) throw ValidationError("label or prediction outside the catalog");
    if (d == g) {
      ++counts[g].tp;
    } else {
      ++counts[d].fp;
      ++counts[g].fn;
    }
  }
  double sum = 0.0;
  int present = 0;
  for (const auto& c : counts) {
    const auto denom = c.tp + c.fp + c.fn;
    if (denom == 0) continue;
    sum += static_cast<double>(c.tp) / static_cast<double>(denom);
    ++present;
  }
  if (present == 0) throw ValidationError("no evaluable pixels for mean IoU");
  return sum / present;
}

std::vector<Segment> connected_components(const BinaryMask& members, int class_index) {
  const int height = static_cast<int>(members.rows());
  const int width = static_cast<int>(members.cols());
  std::vector<std::uint8_t> visited(static_cast<std::size_t>(height) * width, 0);
  std::vector<Segment> segments;
  std::vector<int> stack;

  for (int start = 0; start < height * width; ++start) {
    if (!members.data()[start] || visited[start]) continue;
    Segment seg;
    seg.class_index = class_index;
    seg.box = {start / width, start % width, start / width, start % width};
    visited[start] = 1;
    stack.push_back(start);
    while (!stack.empty()) {
      const int p = stack.back();
      stack.pop_back();
      seg.pixels.push_back(p);
      const int r = p / width, c = p % width;
      seg.box.top = std::min(seg.box.top, r);
      seg.box.bottom = std::max(seg.box.bottom, r);
      seg.box.left = std::min(seg.box.left, c);
      seg.box.right = std::max(seg.box.right, c);
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          const int nr = r + dr, nc = c + dc;
          if ((dr == 0 && dc == 0) || nr < 0 || nr >= height || nc < 0 || nc >= width) continue;
          const int q = nr * width + nc;
          if (members.data()[q] && !visited[q]) {
            visited[q] = 1;
            stack.push_back(q);
          }
        }
      }
    }
    std::sort(seg.pixels.begin(), seg.pixels.end());
    segments.push_back(std::move(seg));
  }
  // Raster discovery order already breaks ties by first pixel.
  std::stable_sort(segments.begin(), segments.end(), [](const Segment& a, const Segment& b) {
    return std::tie(a.box.top, a.box.left) < std::tie(b.box.top, b.box.left);
  });
  return segments;
}

std::vector<Segment> connected_components(const Mask& mask, int class_index) {
  return connected_components(BinaryMask(mask == static_cast<std::uint8_t>(class_index)),
                              class_index);
}

SegmentReport segment_report(const Mask& pred, const LabelField& gt, int k, std::uint8_t ignore,
                             const BinaryMask* roi) {
  require_same_shape(pred, gt);
  if (roi) require_same_shape(pred, *roi);
  const auto label = static_cast<std::uint8_t>(k);
  const BinaryMask gt_members = gt == label;
  const BinaryMask pred_members = (pred == label) && (gt != ignore);
  const std::int64_t gt_size = gt_members.count();
  const std::int64_t pred_size = pred_members.count();

  SegmentReport report;
  report.class_index = k;
  for (auto& seg : connected_components(pred_members, k)) {
    if (!touches(seg, roi)) continue;
    const double iou = overlap_iou(seg, gt_members, gt_size);
    report.false_positives += iou == 0.0;
    report.predicted.push_back({std::move(seg), iou});
  }
  for (auto& seg : connected_components(gt_members, k)) {
    if (!touches(seg, roi)) continue;
    const double iou = overlap_iou(seg, pred_members, pred_size);
    report.false_negatives += iou == 0.0;
    report.ground_truth.push_back({std::move(seg), iou});
  }
  return report;
}

}  // namespace costlens
