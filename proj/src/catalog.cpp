#include "costlens/catalog.hpp"

#include "costlens/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace costlens {

ClassCatalog::ClassCatalog(std::vector<std::string> class_names,
                           std::vector<Aggregate> aggregates,
                           std::optional<int> sky_index,
                           std::optional<int> ignore_index)
    : names_(std::move(class_names)),
      aggregates_(std::move(aggregates)),
      aggregate_of_(names_.size(), -1),
      sky_(sky_index),
      ignore_(ignore_index) {
  const int n = size();
  if (n < 2) throw ValidationError("catalog needs at least two classes");
  if (n > 255) throw ValidationError("catalog supports at most 255 classes");
  std::set<std::string> seen;
  for (const auto& name : names_) {
    if (name.empty()) throw ValidationError("empty class name");
    if (!seen.insert(name).second)
      throw ValidationError("duplicate class name '" + name + "'");
  }
  if (sky_ && (*sky_ < 0 || *sky_ >= n))
    throw ValidationError("sky index out of range");
  if (ignore_ && (*ignore_ < n || *ignore_ > 255))
    throw ValidationError("ignore label must lie in [N, 255]");

  std::set<std::string> aggregate_names;
  for (std::size_t a = 0; a < aggregates_.size(); ++a) {
    const auto& agg = aggregates_[a];
    if (agg.members.empty())
      throw ValidationError("aggregate '" + agg.name + "' is empty");
    if (agg.name == kSkyDesignation || !aggregate_names.insert(agg.name).second)
      throw ValidationError("invalid or duplicate aggregate name '" + agg.name + "'");
    for (int k : agg.members) {
      if (k < 0 || k >= n)
        throw ValidationError("aggregate '" + agg.name + "' references class " +
                              std::to_string(k) + " out of range");
      if (sky_ && k == *sky_)
        throw ValidationError("sky class cannot belong to an aggregate");
      if (aggregate_of_[k] != -1)
        throw ValidationError("class '" + names_[k] + "' belongs to two aggregates");
      aggregate_of_[k] = static_cast<int>(a);
    }
  }
  for (int k = 0; k < n; ++k) {
    if (aggregate_of_[k] == -1 && !(sky_ && k == *sky_))
      throw ValidationError("class '" + names_[k] + "' belongs to no aggregate");
  }
}

const std::string& ClassCatalog::name(int class_index) const {
  if (class_index < 0 || class_index >= size())
    throw ValidationError("class index " + std::to_string(class_index) + " out of range");
  return names_[class_index];
}

int ClassCatalog::index_of(std::string_view class_name) const {
  const auto it = std::find(names_.begin(), names_.end(), class_name);
  if (it == names_.end())
    throw ValidationError("unknown class '" + std::string(class_name) + "'");
  return static_cast<int>(it - names_.begin());
}

std::vector<std::string> ClassCatalog::aggregate_names() const {
  std::vector<std::string> out;
  out.reserve(aggregates_.size());
  for (const auto& a : aggregates_) out.push_back(a.name);
  return out;
}

int ClassCatalog::aggregate_position(int class_index) const {
  if (class_index < 0 || class_index >= size())
    throw ValidationError("class index " + std::to_string(class_index) + " out of range");
  return aggregate_of_[class_index];
}

ClassCatalog builtin_cityscapes_catalog() {
  std::vector<std::string> names = {
      "road",  "sidewalk", "building", "wall",  "fence",         "pole",
      "traffic light", "traffic sign", "vegetation", "terrain", "sky",
      "person", "rider", "car", "truck", "bus", "train", "motorcycle", "bicycle"};
  std::vector<Aggregate> aggregates = {
      {"road", {0}},
      {"flat", {1, 9}},
      {"static", {2, 3, 4, 5, 17, 18, 8}},
      {"info", {6, 7}},
      {"humans", {11, 12}},
      {"dynamic", {13, 14, 15, 16}},
  };
  return ClassCatalog(std::move(names), std::move(aggregates), 10, 255);
}

std::string aggregate_of(const ClassCatalog& catalog, int class_index) {
  const int pos = catalog.aggregate_position(class_index);
  if (pos < 0) return std::string(kSkyDesignation);
  return catalog.aggregates()[pos].name;
}

PriorVector::PriorVector(Eigen::VectorXd values) : values_(std::move(values)) {
  if (values_.size() == 0) throw ValidationError("empty prior vector");
  for (Eigen::Index k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k]) || values_[k] < 0.0 || values_[k] > 1.0)
      throw ValidationError("prior entries must lie in [0,1]");
  }
  if (std::abs(values_.sum() - 1.0) > 1e-6)
    throw ValidationError("priors must sum to 1");
}

PriorVector class_frequencies(std::span<const LabelField> labels,
                              const ClassCatalog& catalog) {
  if (labels.empty()) throw ValidationError("empty dataset");
  const int n = catalog.size();
  const std::uint8_t ignore = catalog.ignore_label();
  std::vector<std::int64_t> counts(n, 0);
  std::int64_t total = 0;
  for (const auto& field : labels) {
    for (Eigen::Index i = 0; i < field.size(); ++i) {
      const std::uint8_t v = field.data()[i];
      if (v == ignore) continue;
      if (v >= n)
        throw ValidationError("label value " + std::to_string(v) + " is not a valid class");
      ++counts[v];
      ++total;
    }
  }
  if (total == 0) throw ValidationError("dataset contains only ignore pixels");
  Eigen::VectorXd freq(n);
  for (int k = 0; k < n; ++k)
    freq[k] = static_cast<double>(counts[k]) / static_cast<double>(total);
  return PriorVector(std::move(freq));
}

Json to_json(const ClassCatalog& catalog) {
  Json doc;
  doc["classes"] = Json::array();
  for (int k = 0; k < catalog.size(); ++k)
    doc["classes"].push_back({{"name", catalog.name(k)}, {"index", k}});
  doc["aggregates"] = Json::object();
  for (const auto& a : catalog.aggregates()) doc["aggregates"][a.name] = a.members;
  doc["sky_index"] = catalog.sky_index() ? Json(*catalog.sky_index())
                                         : Json(nullptr);
  doc["ignore_index"] = catalog.ignore_index()
                            ? Json(*catalog.ignore_index())
                            : Json(nullptr);
  return doc;
}

ClassCatalog catalog_from_json(const Json& doc) {
  try {
    const auto& classes = doc.at("classes");
    std::vector<std::string> names(classes.size());
    std::vector<bool> filled(classes.size(), false);
    for (const auto& c : classes) {
      const auto idx = c.at("index").get<std::size_t>();
      if (idx >= names.size() || filled[idx])
        throw ValidationError("class indices must be contiguous 0..N-1");
      names[idx] = c.at("name").get<std::string>();
      filled[idx] = true;
    }
    std::vector<Aggregate> aggregates;
    for (const auto& [name, members] : doc.at("aggregates").items())
      aggregates.push_back({name, members.get<std::vector<int>>()});
    std::optional<int> sky, ignore;
    if (doc.contains("sky_index") && !doc["sky_index"].is_null())
      sky = doc["sky_index"].get<int>();
    if (doc.contains("ignore_index") && !doc["ignore_index"].is_null())
      ignore = doc["ignore_index"].get<int>();
    return ClassCatalog(std::move(names), std::move(aggregates), sky, ignore);
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("malformed catalog JSON: ") + e.what());
  }
}

Json to_json(const PriorVector& priors) {
  std::vector<double> v(priors.values().data(),
                        priors.values().data() + priors.values().size());
  return {{"priors", v}};
}

PriorVector priors_from_json(const Json& doc) {
  try {
    const auto& arr = doc.is_array() ? doc : doc.at("priors");
    const auto v = arr.get<std::vector<double>>();
    return PriorVector(Eigen::Map<const Eigen::VectorXd>(v.data(),
                                                         static_cast<Eigen::Index>(v.size())));
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("malformed priors JSON: ") + e.what());
  }
}

}  // namespace costlens
