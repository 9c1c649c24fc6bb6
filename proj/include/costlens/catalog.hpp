#pragma once

#include "costlens/types.hpp"

#include <Eigen/Core>
#include "costlens/json.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace costlens {

struct Aggregate {
  std::string name;
  std::vector<int> members;  // class indices
};

// Ordered semantic classes, a flat partition of the non-sky classes into
// aggregates, and the optional sky / ignore designations.
class ClassCatalog {
 public:
  // Throws ValidationError if names repeat, aggregates do not partition the
  // non-sky classes, or an aggregate is empty.
  ClassCatalog(std::vector<std::string> class_names,
               std::vector<Aggregate> aggregates,
               std::optional<int> sky_index,
               std::optional<int> ignore_index);

  int size() const { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& class_names() const { return names_; }
  const std::string& name(int class_index) const;
  int index_of(std::string_view class_name) const;

  const std::vector<Aggregate>& aggregates() const { return aggregates_; }
  std::vector<std::string> aggregate_names() const;
  // Position of the class's aggregate in aggregates(), or -1 for sky.
  int aggregate_position(int class_index) const;

  std::optional<int> sky_index() const { return sky_; }
  std::optional<int> ignore_index() const { return ignore_; }
  std::uint8_t ignore_label() const {
    return static_cast<std::uint8_t>(ignore_.value_or(kDefaultIgnore));
  }

 private:
  std::vector<std::string> names_;
  std::vector<Aggregate> aggregates_;
  std::vector<int> aggregate_of_;
  std::optional<int> sky_;
  std::optional<int> ignore_;
};

// 19 Cityscapes classes in trainId order with the six cost aggregates
// road, flat, static, info, humans, dynamic. Vegetation is housed in
// "static"; sky belongs to no aggregate; ignore label 255.
ClassCatalog builtin_cityscapes_catalog();

inline constexpr std::string_view kSkyDesignation = "sky";

// Name of the aggregate containing the class, or "sky".
std::string aggregate_of(const ClassCatalog& catalog, int class_index);

// Per-class probabilities p(k). Entries in [0,1], summing to 1 within 1e-6.
class PriorVector {
 public:
  explicit PriorVector(Eigen::VectorXd values);
  const Eigen::VectorXd& values() const { return values_; }
  double operator[](int k) const { return values_[k]; }
  int size() const { return static_cast<int>(values_.size()); }

 private:
  Eigen::VectorXd values_;
};

// Pixel-count frequency per class over all non-ignore pixels.
PriorVector class_frequencies(std::span<const LabelField> labels,
                              const ClassCatalog& catalog);

Json to_json(const ClassCatalog& catalog);
ClassCatalog catalog_from_json(const Json& doc);

Json to_json(const PriorVector& priors);
// Accepts {"priors": [...]} or a bare array.
PriorVector priors_from_json(const Json& doc);

}  // namespace costlens
