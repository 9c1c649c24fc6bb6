#pragma once

#include "costlens/catalog.hpp"
#include "costlens/fields.hpp"
#include "costlens/image_io.hpp"
#include "costlens/json.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace costlens {

// Half-open pixel rectangle [top, bottom) x [left, right).
struct Box {
  int top = 0;
  int left = 0;
  int bottom = 0;
  int right = 0;
};

struct Ellipse {
  double center_row = 0.0;
  double center_col = 0.0;
  double radius_rows = 1.0;
  double radius_cols = 1.0;
};

// Road trapezoid between the horizon row and the bottom of the frame.
struct RoadShape {
  double top_left = 0.0;
  double top_right = 0.0;
  double bottom_left = 0.0;
  double bottom_right = 0.0;
};

// Object inventory of one synthetic street scene. Paint order (later
// occludes earlier): sky above the horizon, sidewalk below it, terrain,
// road, buildings, vegetation, poles, signs, occluded persons, vehicles,
// persons.
struct SceneSpec {
  std::uint64_t seed = 0;
  int height = 0;
  int width = 0;
  int horizon = 0;
  RoadShape road;
  std::vector<Box> terrain;
  std::vector<Box> buildings;
  std::vector<Box> vegetation;
  std::vector<Box> poles;
  std::vector<Box> signs;
  std::vector<Ellipse> occluded_persons;
  std::vector<Box> vehicles;
  std::vector<Ellipse> persons;
  double noise = 0.0;    // temperature tau >= 0
  int blur_radius = 3;   // neighbourhood radius of the confusion kernel
};

// Throws ValidationError for non-positive sizes, objects outside the frame
// or a non-finite / negative noise temperature.
void validate_scene_spec(const SceneSpec& spec);

// Draws a street-scene inventory from the seed (Cityscapes catalog layout).
SceneSpec random_scene_spec(std::uint64_t seed, int height, int width, double noise,
                            int blur_radius = 3);

// Ground truth painted from the inventory.
LabelField paint_ground_truth(const SceneSpec& spec, const ClassCatalog& catalog);

// Ground truth plus a softmax field. Per pixel the field is the mixture
// (1 - w) * one_hot(gt) + w * kernel, where the kernel spreads mass over the
// classes found within blur_radius (jittered, person/static confusions
// boosted, person/ground confusions damped) and w = min(1, tau * (1 + 4 * b)) grows with the share b of
// foreign classes in the neighbourhood. tau = 0 yields exact one-hot fields.
SceneBundle generate_scene(const SceneSpec& spec, const ClassCatalog& catalog);

// Scenes with seeds base_seed .. base_seed + count - 1 and ids scene_NNNN.
std::vector<SceneBundle> generate_suite(int count, std::uint64_t base_seed, int height,
                                        int width, double noise, const ClassCatalog& catalog,
                                        int blur_radius = 3);

// Flat class-colour rendering of a label field (Cityscapes palette for the
// first 19 classes).
RgbImage class_color_preview(const LabelImage& labels, std::uint8_t ignore = kDefaultIgnore);
std::array<std::uint8_t, 3> class_color(int class_index);

}  // namespace costlens
