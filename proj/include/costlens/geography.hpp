#pragma once

#include "costlens/catalog.hpp"
#include "costlens/fields.hpp"
#include "costlens/types.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace costlens {

// Per-pixel empirical class frequencies over a label dataset. Pixels that
// were ignore in every image carry all-zero frequencies and covered = false.
struct PriorField {
  int height = 0;
  int width = 0;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> frequencies;
  PixelGrid<bool> covered;

  int num_classes() const { return static_cast<int>(frequencies.cols()); }
  double operator()(int row, int col, int k) const {
    return frequencies(static_cast<Eigen::Index>(row) * width + col, k);
  }
};

PriorField prior_field(std::span<const LabelField> labels, const ClassCatalog& catalog);

// Stored as SPF (float32). Uncovered pixels are all-zero; every other pixel
// must be normalized within kNormalizationTolerance.
void save_prior_field(const PriorField& priors, const std::filesystem::path& path);
PriorField load_prior_field(const std::filesystem::path& path);

// RoI ids 1..R per pixel.
using RoiMap = PixelGrid<std::uint8_t>;

struct RoiDerivation {
  RoiMap roi;
  int region_count = 0;
  // Pixels where every RoI class has zero prior; they fall back to RoI 1.
  std::vector<std::pair<int, int>> degenerate_pixels;
};

// Built-in RoI classes, in RoI id order: road, sidewalk, building, sky.
std::vector<int> default_roi_classes(const ClassCatalog& catalog);

// RoI of a pixel = 1-based position in roi_classes of the class with the
// highest prior there; ties go to the earliest listed class.
RoiDerivation derive_roi(const PriorField& priors, std::span<const int> roi_classes);

BinaryMask roi_mask(const RoiMap& roi, int roi_id, int region_count);

// Reads an RoI map image and checks its ids lie in 1..255.
RoiMap load_roi_map(const std::filesystem::path& path);

}  // namespace costlens
