#pragma once

#include <Eigen/Core>

#include <cstdint>

namespace costlens {

// Pixel grids are row-major, height x width, matching the on-disk layouts.
template <typename T>
using PixelGrid = Eigen::Array<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using LabelImage = PixelGrid<std::uint8_t>;

// Ground truth: class index per pixel, or the catalog's ignore value.
using LabelField = LabelImage;

// Decision output: predicted class index per pixel.
using Mask = LabelImage;

// Membership mask (RoI restriction, class masks).
using BinaryMask = PixelGrid<bool>;

inline constexpr std::uint8_t kDefaultIgnore = 255;

}  // namespace costlens
