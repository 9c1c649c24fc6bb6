#include "costlens/report.hpp"

#include "costlens/error.hpp"
#include "costlens/evaluation.hpp"
#include "costlens/synth.hpp"

#include <algorithm>
#include <optional>
#include <sstream>

namespace costlens {

namespace {

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

bool all_digits(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

std::string region_key(int region_id) {
  return region_id == 0 ? "all" : std::to_string(region_id);
}

std::vector<int> parse_class_list(std::string_view text, const ClassCatalog& catalog) {
  std::vector<int> out;
  if (text == "all") {
    for (int k = 0; k < catalog.size(); ++k) out.push_back(k);
    return out;
  }
  std::stringstream in{std::string(text)};
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    int k = -1;
    if (all_digits(item)) {
      k = std::stoi(item);
      if (k >= catalog.size()) throw ValidationError("class index out of range: " + item);
    } else {
      k = catalog.index_of(item);
    }
    if (std::find(out.begin(), out.end(), k) == out.end()) out.push_back(k);
  }
  if (out.empty()) throw ValidationError("empty class selection");
  return out;
}

Json metrics_report(const Mask& pred, const LabelField& gt, const ClassCatalog& catalog,
                    std::span<const int> classes, std::span<const int> region_ids,
                    const RoiMap* roi, int region_count) {
  if (pred.rows() != gt.rows() || pred.cols() != gt.cols())
    throw ValidationError("prediction and ground truth differ in shape");
  std::vector<std::optional<BinaryMask>> masks;
  for (int id : region_ids) {
    if (id == 0) {
      masks.emplace_back();
      continue;
    }
    if (!roi) throw ValidationError("RoI " + std::to_string(id) + " requested without a RoI map");
    if (roi->rows() != gt.rows() || roi->cols() != gt.cols())
      throw ValidationError("RoI map differs in shape from the ground truth");
    masks.emplace_back(roi_mask(*roi, id, region_count));
  }

  Json report = Json::object();
  for (int k : classes) {
    Json per_region = Json::object();
    for (std::size_t i = 0; i < region_ids.size(); ++i) {
      const BinaryMask* m = masks[i] ? &*masks[i] : nullptr;
      const PixelCounts c = pixel_counts(pred, gt, k, catalog.ignore_label(), m);
      const SegmentReport seg = segment_report(pred, gt, k, catalog.ignore_label(), m);
      per_region[region_key(region_ids[i])] = {
          {"precision", optional_number(precision(c))},
          {"recall", optional_number(recall(c))},
          {"tp", c.tp},
          {"fp", c.fp},
          {"fn", c.fn},
          {"fp_segments", seg.false_positives},
          {"fn_segments", seg.false_negatives}};
    }
    report[catalog.name(k)] = std::move(per_region);
  }
  return report;
}

Json palette_legend(const ClassCatalog& catalog) {
  Json legend = Json::array();
  for (int k = 0; k < catalog.size(); ++k) {
    const auto c = class_color(k);
    legend.push_back({{"index", k}, {"name", catalog.name(k)}, {"color", {c[0], c[1], c[2]}}});
  }
  return legend;
}

}  // namespace costlens
