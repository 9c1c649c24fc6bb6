#include "costlens/dataset.hpp"

#include "costlens/error.hpp"
#include "costlens/image_io.hpp"
#include "costlens/synth.hpp"

#include <algorithm>

namespace costlens {

namespace {

Json read_manifest(const std::filesystem::path& root) {
  const Bytes bytes = read_file(root / kManifestName);
  try {
    return Json::parse(bytes.begin(), bytes.end());
  } catch (const Json::exception& e) {
    throw ValidationError((root / kManifestName).string() + ": " + e.what());
  }
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& root) {
  const Json manifest = read_manifest(root);
  try {
    Dataset ds{root,
               manifest.contains("catalog") ? catalog_from_json(manifest["catalog"])
                                            : builtin_cityscapes_catalog(),
               {}, {}, manifest.value("generator", Json::object())};
    for (const auto& entry : manifest.at("scenes")) {
      SceneFiles f{entry.at("id").get<std::string>(), entry.at("probs").get<std::string>(),
                   entry.at("gt").get<std::string>(), std::nullopt};
      if (entry.contains("preview")) f.preview = entry["preview"].get<std::string>();
      ds.scenes.push_back(make_scene_bundle(f.id, load_probability_field(root / f.probabilities),
                                            load_label_field(root / f.ground_truth, ds.catalog),
                                            f.preview));
      if (ds.scenes.back().probabilities.num_classes() != ds.catalog.size())
        throw ValidationError("scene '" + f.id + "' has a class count different from the catalog");
      ds.files.push_back(std::move(f));
    }
    if (ds.scenes.empty()) throw ValidationError("dataset manifest lists no scenes");
    return ds;
  } catch (const Json::exception& e) {
    throw ValidationError((root / kManifestName).string() + ": " + e.what());
  }
}

void write_dataset(const std::filesystem::path& root, const std::vector<SceneBundle>& scenes,
                   const ClassCatalog& catalog, const Json& generator) {
  std::error_code ec;
  std::filesystem::create_directories(root, ec);
  if (ec) throw IoError("cannot create directory '" + root.string() + "'");
  Json manifest;
  manifest["catalog"] = to_json(catalog);
  manifest["generator"] = generator;
  manifest["scenes"] = Json::array();
  for (const auto& scene : scenes) {
    const std::string probs = scene.id + ".spf";
    const std::string gt = scene.id + "_gt.png";
    const std::string preview = scene.id + "_preview.png";
    save_probability_field(scene.probabilities, root / probs);
    save_label_field(scene.ground_truth, root / gt);
    write_rgb(class_color_preview(scene.ground_truth, catalog.ignore_label()), root / preview);
    manifest["scenes"].push_back({{"id", scene.id},
                                  {"probs", probs},
                                  {"gt", gt},
                                  {"preview", preview},
                                  {"height", scene.probabilities.height()},
                                  {"width", scene.probabilities.width()}});
  }
  const std::string text = manifest.dump(2) + "\n";
  write_file_atomically(root / kManifestName, Bytes(text.begin(), text.end()));
}

std::optional<RoiDerivation> derive_dataset_roi(const Dataset& dataset) {
  if (dataset.scenes.empty()) return std::nullopt;
  const auto& first = dataset.scenes.front().ground_truth;
  std::vector<LabelField> labels;
  for (const auto& s : dataset.scenes) {
    if (s.ground_truth.rows() != first.rows() || s.ground_truth.cols() != first.cols())
      return std::nullopt;
    labels.push_back(s.ground_truth);
  }
  return derive_roi(prior_field(labels, dataset.catalog), default_roi_classes(dataset.catalog));
}

std::vector<LabelField> load_label_directory(const std::filesystem::path& dir,
                                             const ClassCatalog& catalog) {
  std::vector<LabelField> labels;
  if (std::filesystem::exists(dir / kManifestName)) {
    const Json manifest = read_manifest(dir);
    try {
      for (const auto& entry : manifest.at("scenes"))
        labels.push_back(load_label_field(dir / entry.at("gt").get<std::string>(), catalog));
    } catch (const Json::exception& e) {
      throw ValidationError((dir / kManifestName).string() + ": " + e.what());
    }
    return labels;
  }
  if (!std::filesystem::is_directory(dir))
    throw IoError("'" + dir.string() + "' is not a directory");
  std::vector<std::filesystem::path> paths;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    if (entry.is_regular_file() && (ext == ".png" || ext == ".pgm")) paths.push_back(entry.path());
  }
  std::sort(paths.begin(), paths.end());
  for (const auto& p : paths) labels.push_back(load_label_field(p, catalog));
  return labels;
}

}  // namespace costlens
