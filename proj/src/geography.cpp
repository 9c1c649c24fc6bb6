#include "costlens/geography.hpp"

#include "costlens/error.hpp"
#include "costlens/image_io.hpp"

#include <cmath>

namespace costlens {

PriorField prior_field(std::span<const LabelField> labels, const ClassCatalog& catalog) {
  if (labels.empty()) throw ValidationError("empty dataset");
  const auto height = labels.front().rows();
  const auto width = labels.front().cols();
  const int n = catalog.size();
  const std::uint8_t ignore = catalog.ignore_label();
  const Eigen::Index pixels = height * width;

  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> counts =
      decltype(counts)::Zero(pixels, n);
  for (const auto& field : labels) {
    if (field.rows() != height || field.cols() != width)
      throw ValidationError("label fields differ in shape");
    for (Eigen::Index p = 0; p < pixels; ++p) {
      const std::uint8_t v = field.data()[p];
      if (v == ignore) continue;
      if (v >= n)
        throw ValidationError("label value " + std::to_string(v) + " is not a valid class");
      ++counts(p, v);
    }
  }

  PriorField out;
  out.height = static_cast<int>(height);
  out.width = static_cast<int>(width);
  out.frequencies.setZero(pixels, n);
  out.covered.resize(height, width);
  for (Eigen::Index p = 0; p < pixels; ++p) {
    const std::int64_t total = counts.row(p).sum();
    out.covered.data()[p] = total > 0;
    if (total == 0) continue;
    for (int k = 0; k < n; ++k)
      out.frequencies(p, k) = static_cast<double>(counts(p, k)) / static_cast<double>(total);
  }
  return out;
}

void save_prior_field(const PriorField& priors, const std::filesystem::path& path) {
  SpfTensor t;
  t.height = static_cast<std::uint32_t>(priors.height);
  t.width = static_cast<std::uint32_t>(priors.width);
  t.channels = static_cast<std::uint32_t>(priors.num_classes());
  t.data.resize(priors.frequencies.size());
  for (Eigen::Index i = 0; i < priors.frequencies.size(); ++i)
    t.data[i] = static_cast<float>(priors.frequencies.data()[i]);
  write_spf(t, path);
}

PriorField load_prior_field(const std::filesystem::path& path) {
  const SpfTensor t = read_spf(path);
  PriorField out;
  out.height = static_cast<int>(t.height);
  out.width = static_cast<int>(t.width);
  const Eigen::Index pixels = static_cast<Eigen::Index>(t.height) * t.width;
  out.frequencies.resize(pixels, t.channels);
  out.covered.resize(t.height, t.width);
  for (Eigen::Index p = 0; p < pixels; ++p) {
    double sum = 0.0;
    for (std::uint32_t k = 0; k < t.channels; ++k) {
      const double v = t.data[p * t.channels + k];
      if (!std::isfinite(v) || v < 0.0)
        throw ValidationError(path.string() + ": invalid prior value");
      out.frequencies(p, k) = v;
      sum += v;
    }
    out.covered.data()[p] = sum > 0.0;
    if (sum > 0.0 && std::abs(sum - 1.0) > kNormalizationTolerance)
      throw ValidationError(path.string() + ": unnormalized prior at pixel " + std::to_string(p));
  }
  return out;
}

std::vector<int> default_roi_classes(const ClassCatalog& catalog) {
  return {catalog.index_of("road"), catalog.index_of("sidewalk"),
          catalog.index_of("building"), catalog.index_of("sky")};
}

RoiDerivation derive_roi(const PriorField& priors, std::span<const int> roi_classes) {
  if (roi_classes.empty()) throw ValidationError("no RoI classes given");
  if (roi_classes.size() > 255) throw ValidationError("too many RoI classes");
  for (int k : roi_classes) {
    if (k < 0 || k >= priors.num_classes())
      throw ValidationError("RoI class index " + std::to_string(k) + " out of range");
  }
  RoiDerivation out;
  out.region_count = static_cast<int>(roi_classes.size());
  out.roi.resize(priors.height, priors.width);
  for (int r = 0; r < priors.height; ++r) {
    for (int c = 0; c < priors.width; ++c) {
      std::size_t best = 0;
      double best_value = priors(r, c, roi_classes[0]);
      for (std::size_t i = 1; i < roi_classes.size(); ++i) {
        const double v = priors(r, c, roi_classes[i]);
        if (v > best_value) {
          best_value = v;
          best = i;
        }
      }
      if (best_value <= 0.0) out.degenerate_pixels.emplace_back(r, c);
      out.roi(r, c) = static_cast<std::uint8_t>(best + 1);
    }
  }
  return out;
}

BinaryMask roi_mask(const RoiMap& roi, int roi_id, int region_count) {
  if (roi_id < 1 || roi_id > region_count)
    throw ValidationError("RoI id " + std::to_string(roi_id) + " outside 1.." +
                          std::to_string(region_count));
  return roi == static_cast<std::uint8_t>(roi_id);
}

RoiMap load_roi_map(const std::filesystem::path& path) {
  RoiMap roi = read_gray8(path);
  if (roi.size() > 0 && roi.minCoeff() < 1)
    throw ValidationError(path.string() + ": RoI ids must be >= 1");
  return roi;
}

}  // namespace costlens
