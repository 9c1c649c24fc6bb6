#pragma once

#include "costlens/catalog.hpp"
#include "costlens/fields.hpp"
#include "costlens/geography.hpp"
#include "costlens/json.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace costlens {

inline constexpr const char* kManifestName = "manifest.json";

struct SceneFiles {
  std::string id;
  std::string probabilities;  // relative to the dataset root
  std::string ground_truth;
  std::optional<std::string> preview;
};

// A directory holding manifest.json plus one SPF field and one label image
// per scene:
//   {"catalog": {...}, "generator": {...},
//    "scenes": [{"id", "probs", "gt", "preview", "height", "width"}]}
struct Dataset {
  std::filesystem::path root;
  ClassCatalog catalog;
  std::vector<SceneFiles> files;
  std::vector<SceneBundle> scenes;
  Json generator;
};

Dataset load_dataset(const std::filesystem::path& root);

// Writes scene files first and the manifest last.
void write_dataset(const std::filesystem::path& root, const std::vector<SceneBundle>& scenes,
                   const ClassCatalog& catalog, const Json& generator);

// Ground-truth label fields of a directory: the manifest's "gt" entries when
// a manifest exists, otherwise every .png / .pgm file in name order.
// RoIs from the pixel-wise priors of the dataset's ground truth using the
// default road/sidewalk/building/sky classes. Empty when scene shapes differ.
std::optional<RoiDerivation> derive_dataset_roi(const Dataset& dataset);

std::vector<LabelField> load_label_directory(const std::filesystem::path& dir,
                                             const ClassCatalog& catalog);

}  // namespace costlens
