#pragma once

// Naive reference implementations of the evaluation module: per-pixel
// loops and a recursive flood fill.

#include "costlens/catalog.hpp"
#include "costlens/evaluation.hpp"

#include <algorithm>
#include <optional>
#include <vector>

namespace costlens::oracle {

struct Counts {
  long tp = 0, fp = 0, fn = 0;
};

inline Counts counts(const Mask& pred, const LabelField& gt, int k, int ignore,
                     const BinaryMask* roi) {
  Counts c;
  for (int r = 0; r < gt.rows(); ++r) {
    for (int col = 0; col < gt.cols(); ++col) {
      if (gt(r, col) == ignore) continue;
      if (roi && !(*roi)(r, col)) continue;
      if (pred(r, col) == k && gt(r, col) == k) ++c.tp;
      if (pred(r, col) == k && gt(r, col) != k) ++c.fp;
      if (pred(r, col) != k && gt(r, col) == k) ++c.fn;
    }
  }
  return c;
}

inline std::optional<double> ratio(long num, long den) {
  if (den == 0) return std::nullopt;
  return double(num) / double(den);
}

inline double mean_iou(const Mask& pred, const LabelField& gt, int classes, int ignore) {
  double sum = 0;
  int present = 0;
  for (int k = 0; k < classes; ++k) {
    const Counts c = counts(pred, gt, k, ignore, nullptr);
    if (c.tp + c.fp + c.fn == 0) continue;
    sum += double(c.tp) / double(c.tp + c.fp + c.fn);
    ++present;
  }
  return sum / present;
}

struct Component {
  std::vector<int> pixels;  // sorted linear indices
  int top, left, bottom, right;
};

inline void flood(const std::vector<std::vector<bool>>& member,
                  std::vector<std::vector<bool>>& seen, int r, int c, Component& out) {
  const int h = static_cast<int>(member.size()), w = static_cast<int>(member[0].size());
  if (r < 0 || c < 0 || r >= h || c >= w || seen[r][c] || !member[r][c]) return;
  seen[r][c] = true;
  out.pixels.push_back(r * w + c);
  for (int dr = -1; dr <= 1; ++dr)
    for (int dc = -1; dc <= 1; ++dc)
      if (dr || dc) flood(member, seen, r + dr, c + dc, out);
}

inline std::vector<Component> components(const std::vector<std::vector<bool>>& member) {
  const int h = static_cast<int>(member.size()), w = static_cast<int>(member[0].size());
  std::vector<std::vector<bool>> seen(h, std::vector<bool>(w, false));
  std::vector<Component> out;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!member[r][c] || seen[r][c]) continue;
      Component comp{};
      flood(member, seen, r, c, comp);
      std::sort(comp.pixels.begin(), comp.pixels.end());
      comp.top = h, comp.left = w, comp.bottom = -1, comp.right = -1;
      for (int p : comp.pixels) {
        comp.top = std::min(comp.top, p / w);
        comp.bottom = std::max(comp.bottom, p / w);
        comp.left = std::min(comp.left, p % w);
        comp.right = std::max(comp.right, p % w);
      }
      out.push_back(comp);
    }
  }
  // Order by box corner, then by first pixel.
  std::sort(out.begin(), out.end(), [](const Component& a, const Component& b) {
    if (a.top != b.top) return a.top < b.top;
    if (a.left != b.left) return a.left < b.left;
    return a.pixels.front() < b.pixels.front();
  });
  return out;
}

template <typename Pred>
std::vector<std::vector<bool>> membership(int h, int w, Pred pred) {
  std::vector<std::vector<bool>> m(h, std::vector<bool>(w));
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) m[r][c] = pred(r, c);
  return m;
}

struct Report {
  std::vector<double> predicted_iou, ground_truth_iou;
  std::vector<Component> predicted, ground_truth;
  int fp = 0, fn = 0;
};

inline Report segment_report(const Mask& pred, const LabelField& gt, int k, int ignore,
                             const BinaryMask* roi) {
  const int h = static_cast<int>(gt.rows()), w = static_cast<int>(gt.cols());
  const auto pm = membership(h, w, [&](int r, int c) { return pred(r, c) == k && gt(r, c) != ignore; });
  const auto gm = membership(h, w, [&](int r, int c) { return gt(r, c) == k; });
  auto size_of = [&](const std::vector<std::vector<bool>>& m) {
    long n = 0;
    for (const auto& row : m) n += std::count(row.begin(), row.end(), true);
    return n;
  };
  auto iou = [&](const Component& s, const std::vector<std::vector<bool>>& other) {
    long inter = 0;
    for (int p : s.pixels) inter += other[p / w][p % w];
    const long uni = long(s.pixels.size()) + size_of(other) - inter;
    return inter == 0 ? 0.0 : double(inter) / double(uni);
  };
  auto in_roi = [&](const Component& s) {
    if (!roi) return true;
    for (int p : s.pixels)
      if ((*roi)(p / w, p % w)) return true;
    return false;
  };
  Report rep;
  for (const auto& s : components(pm)) {
    if (!in_roi(s)) continue;
    rep.predicted.push_back(s);
    rep.predicted_iou.push_back(iou(s, gm));
    rep.fp += rep.predicted_iou.back() == 0.0;
  }
  for (const auto& s : components(gm)) {
    if (!in_roi(s)) continue;
    rep.ground_truth.push_back(s);
    rep.ground_truth_iou.push_back(iou(s, pm));
    rep.fn += rep.ground_truth_iou.back() == 0.0;
  }
  return rep;
}

inline bool same_segment(const Segment& s, const Component& c) {
  return s.pixels == c.pixels && s.box.top == c.top && s.box.left == c.left &&
         s.box.bottom == c.bottom && s.box.right == c.right;
}

inline bool same_report(const SegmentReport& got, const Report& want) {
  if (got.false_positives != want.fp || got.false_negatives != want.fn) return false;
  if (got.predicted.size() != want.predicted.size()) return false;
  if (got.ground_truth.size() != want.ground_truth.size()) return false;
  for (std::size_t i = 0; i < got.predicted.size(); ++i)
    if (!same_segment(got.predicted[i].segment, want.predicted[i]) ||
        got.predicted[i].iou != want.predicted_iou[i])
      return false;
  for (std::size_t i = 0; i < got.ground_truth.size(); ++i)
    if (!same_segment(got.ground_truth[i].segment, want.ground_truth[i]) ||
        got.ground_truth[i].iou != want.ground_truth_iou[i])
      return false;
  return true;
}

}  // namespace costlens::oracle
