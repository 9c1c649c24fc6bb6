#pragma once

#include "costlens/catalog.hpp"
#include "costlens/error.hpp"
#include "costlens/types.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace costlens {

// Per-pixel sums within this distance of 1 are renormalized; anything
// further away is rejected as wrong data.
inline constexpr double kNormalizationTolerance = 1e-3;
// Sums closer to 1 than this are float rounding and left bit-identical.
inline constexpr double kRenormalizeThreshold = 1e-6;

// H x W x N posterior tensor p_ij(k|x). Rows of values() are pixels in
// row-major order, columns are classes (channel-last), so values().data() is
// exactly the SPF payload order ((i * width) + j) * N + k.
template <typename Scalar>
class BasicProbabilityField {
 public:
  using Values = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  BasicProbabilityField() = default;

  // Validates and renormalizes. Throws ValidationError on non-finite or
  // negative values, or a pixel whose sum deviates from 1 by more than
  // kNormalizationTolerance ("unnormalized distribution").
  static BasicProbabilityField from_values(int height, int width, Values values) {
    if (height <= 0 || width <= 0 || values.cols() < 2)
      throw ValidationError("probability field needs positive height, width and N >= 2");
    if (values.rows() != static_cast<Eigen::Index>(height) * width)
      throw ValidationError("probability field value count does not match its shape");
    for (Eigen::Index p = 0; p < values.rows(); ++p) {
      double sum = 0.0;
      for (Eigen::Index k = 0; k < values.cols(); ++k) {
        const double v = static_cast<double>(values(p, k));
        if (!std::isfinite(v)) throw ValidationError("non-finite probability value");
        if (v < 0.0) throw ValidationError("negative probability value");
        sum += v;
      }
      const double deviation = std::abs(sum - 1.0);
      if (deviation > kNormalizationTolerance)
        throw ValidationError("unnormalized distribution at pixel " + std::to_string(p) +
                              " (sum " + std::to_string(sum) + ")");
      if (deviation > kRenormalizeThreshold) {
        for (Eigen::Index k = 0; k < values.cols(); ++k)
          values(p, k) = static_cast<Scalar>(static_cast<double>(values(p, k)) / sum);
      }
    }
    BasicProbabilityField field;
    field.height_ = height;
    field.width_ = width;
    field.values_ = std::move(values);
    return field;
  }

  int height() const { return height_; }
  int width() const { return width_; }
  int num_classes() const { return static_cast<int>(values_.cols()); }
  Eigen::Index pixel_count() const { return values_.rows(); }
  const Values& values() const { return values_; }

  auto pixel(int row, int col) const {
    return values_.row(static_cast<Eigen::Index>(row) * width_ + col);
  }
  Scalar operator()(int row, int col, int k) const {
    return values_(static_cast<Eigen::Index>(row) * width_ + col, k);
  }

  friend bool operator==(const BasicProbabilityField& a, const BasicProbabilityField& b) {
    return a.height_ == b.height_ && a.width_ == b.width_ &&
           a.values_.cols() == b.values_.cols() && a.values_ == b.values_;
  }

 private:
  int height_ = 0;
  int width_ = 0;
  Values values_;
};

// Softmax dumps are stored as 32-bit floats; expected costs are accumulated
// in double by the decision engine.
using ProbabilityField = BasicProbabilityField<float>;

struct SceneBundle {
  std::string id;
  ProbabilityField probabilities;
  LabelField ground_truth;
  std::optional<std::string> image_ref;
};

// Throws ValidationError when the field and labels differ in shape.
SceneBundle make_scene_bundle(std::string id, ProbabilityField probabilities,
                              LabelField ground_truth,
                              std::optional<std::string> image_ref = std::nullopt);

// Raw SPF tensor: "SPF1", uint32 LE height, width, channels, then
// height*width*channels float32 LE values, channel-last.
struct SpfTensor {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint32_t channels = 0;
  std::vector<float> data;
};

std::vector<std::uint8_t> encode_spf(const SpfTensor& tensor);
SpfTensor decode_spf(const std::vector<std::uint8_t>& bytes);

SpfTensor read_spf(const std::filesystem::path& path);
void write_spf(const SpfTensor& tensor, const std::filesystem::path& path);

ProbabilityField load_probability_field(const std::filesystem::path& path);
void save_probability_field(const ProbabilityField& field, const std::filesystem::path& path);

// Every value must be a class index of the catalog or its ignore label.
void validate_labels(const LabelField& labels, const ClassCatalog& catalog);
LabelField load_label_field(const std::filesystem::path& path, const ClassCatalog& catalog);
void save_label_field(const LabelField& labels, const std::filesystem::path& path);

// Masks carry class indices only; values >= num_classes are rejected.
void save_mask(const Mask& mask, const std::filesystem::path& path, int num_classes);
Mask load_mask(const std::filesystem::path& path, int num_classes);

}  // namespace costlens
