#include "costlens/synth.hpp"

#include "costlens/error.hpp"
#include "costlens/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace costlens {

namespace {

constexpr double kBoundaryGain = 4.0;
constexpr double kFloorMass = 1e-5;   // per class, scaled by the mixing weight
constexpr double kConfusionBoost = 2.0;
constexpr double kGroundDamping = 0.05;  // persons rarely blur into the ground they stand on
constexpr std::uint64_t kNoiseStream = 0xD1B54A32D192ED03ULL;

struct SceneClasses {
  int road, sidewalk, terrain, building, vegetation, pole, sign, person, car, sky;

  explicit SceneClasses(const ClassCatalog& c)
      : road(c.index_of("road")),
        sidewalk(c.index_of("sidewalk")),
        terrain(c.index_of("terrain")),
        building(c.index_of("building")),
        vegetation(c.index_of("vegetation")),
        pole(c.index_of("pole")),
        sign(c.index_of("traffic sign")),
        person(c.index_of("person")),
        car(c.index_of("car")),
        sky(c.index_of("sky")) {}
};

void check_box(const Box& b, const SceneSpec& spec, const char* what) {
  if (b.top < 0 || b.left < 0 || b.bottom > spec.height || b.right > spec.width ||
      b.top >= b.bottom || b.left >= b.right)
    throw ValidationError(std::string("invalid geometry: ") + what + " box outside the frame");
}

void check_ellipse(const Ellipse& e, const SceneSpec& spec) {
  if (!(e.radius_rows > 0.0) || !(e.radius_cols > 0.0) || e.center_row < 0.0 ||
      e.center_row >= spec.height || e.center_col < 0.0 || e.center_col >= spec.width)
    throw ValidationError("invalid geometry: person ellipse outside the frame");
}

void paint_box(LabelField& gt, const Box& b, int label) {
  gt.block(b.top, b.left, b.bottom - b.top, b.right - b.left) = static_cast<std::uint8_t>(label);
}

void paint_ellipse(LabelField& gt, const Ellipse& e, int label) {
  const int r0 = std::max(0, static_cast<int>(std::floor(e.center_row - e.radius_rows)));
  const int r1 = std::min<int>(static_cast<int>(gt.rows()) - 1,
                               static_cast<int>(std::ceil(e.center_row + e.radius_rows)));
  const int c0 = std::max(0, static_cast<int>(std::floor(e.center_col - e.radius_cols)));
  const int c1 = std::min<int>(static_cast<int>(gt.cols()) - 1,
                               static_cast<int>(std::ceil(e.center_col + e.radius_cols)));
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      const double dr = (r + 0.5 - e.center_row) / e.radius_rows;
      const double dc = (c + 0.5 - e.center_col) / e.radius_cols;
      if (dr * dr + dc * dc <= 1.0) gt(r, c) = static_cast<std::uint8_t>(label);
    }
  }
}

Box clamp_box(int top, int left, int bottom, int right, int height, int width) {
  Box b{std::clamp(top, 0, height - 1), std::clamp(left, 0, width - 1),
        std::clamp(bottom, 1, height), std::clamp(right, 1, width)};
  b.bottom = std::max(b.bottom, b.top + 1);
  b.right = std::max(b.right, b.left + 1);
  return b;
}

double road_edge(const RoadShape& road, double t, bool left) {
  return left ? road.top_left + t * (road.bottom_left - road.top_left)
              : road.top_right + t * (road.bottom_right - road.top_right);
}

}  // namespace

void validate_scene_spec(const SceneSpec& spec) {
  if (spec.height < 8 || spec.width < 8)
    throw ValidationError("invalid geometry: scene must be at least 8x8");
  if (spec.height > 8192 || spec.width > 8192)
    throw ValidationError("invalid geometry: scene larger than 8192 pixels per side");
  if (spec.horizon < 1 || spec.horizon >= spec.height)
    throw ValidationError("invalid geometry: horizon outside the frame");
  if (!std::isfinite(spec.noise) || spec.noise < 0.0)
    throw ValidationError("noise temperature must be finite and >= 0");
  if (spec.blur_radius < 0) throw ValidationError("blur radius must be >= 0");
  for (const auto* list : {&spec.terrain, &spec.buildings, &spec.vegetation, &spec.poles,
                           &spec.signs, &spec.vehicles})
    for (const auto& b : *list) check_box(b, spec, "object");
  for (const auto& e : spec.persons) check_ellipse(e, spec);
  for (const auto& e : spec.occluded_persons) check_ellipse(e, spec);
}

SceneSpec random_scene_spec(std::uint64_t seed, int height, int width, double noise,
                            int blur_radius) {
  if (height < 8 || width < 8) throw ValidationError("invalid geometry: scene must be at least 8x8");
  SplitMix64 rng(seed);
  SceneSpec s;
  s.seed = seed;
  s.height = height;
  s.width = width;
  s.noise = noise;
  s.blur_radius = blur_radius;
  const double H = height, W = width;
  s.horizon = static_cast<int>(std::lround(H * rng.uniform(0.38, 0.46)));
  s.road = {W * rng.uniform(0.44, 0.48), W * rng.uniform(0.52, 0.56), W * rng.uniform(0.05, 0.2),
            W * rng.uniform(0.8, 0.95)};
  const double ground = H - s.horizon;
  auto depth = [&](int row) { return std::clamp((row - s.horizon) / ground, 0.0, 1.0); };

  // Terrain patches in the bottom corners.
  if (rng.uniform() < 0.5) {
    const int top = static_cast<int>(H * rng.uniform(0.85, 0.93));
    s.terrain.push_back(clamp_box(top, 0, height, static_cast<int>(W * rng.uniform(0.04, 0.1)),
                                  height, width));
  }

  // Facades on both sides reaching a little below the horizon.
  for (int side = 0; side < 2; ++side) {
    const int blocks = rng.uniform_int(1, 2);
    double cursor = side == 0 ? 0.0 : W * rng.uniform(0.6, 0.66);
    const double limit = side == 0 ? W * rng.uniform(0.34, 0.4) : W;
    for (int b = 0; b < blocks && cursor < limit - 4; ++b) {
      const double span = (limit - cursor) / (blocks - b) * rng.uniform(0.75, 1.0);
      const int top = static_cast<int>(H * rng.uniform(0.04, 0.22));
      const int bottom = s.horizon + static_cast<int>(H * rng.uniform(0.03, 0.09));
      s.buildings.push_back(clamp_box(top, static_cast<int>(cursor), bottom,
                                      static_cast<int>(cursor + span), height, width));
      cursor += span + W * rng.uniform(0.0, 0.03);
    }
  }

  const int trees = rng.uniform_int(0, 2);
  for (int t = 0; t < trees; ++t) {
    const int cx = static_cast<int>(W * (rng.uniform() < 0.5 ? rng.uniform(0.05, 0.35)
                                                              : rng.uniform(0.65, 0.95)));
    const int half = static_cast<int>(W * rng.uniform(0.03, 0.06));
    const int top = s.horizon - static_cast<int>(H * rng.uniform(0.1, 0.2));
    s.vegetation.push_back(clamp_box(top, cx - half, s.horizon + static_cast<int>(H * 0.03),
                                     cx + half, height, width));
  }

  // Poles along the kerbs, some carrying a sign.
  const int poles = rng.uniform_int(2, 4);
  for (int p = 0; p < poles; ++p) {
    const bool left = p % 2 == 0;
    const int bottom = s.horizon + static_cast<int>(ground * rng.uniform(0.15, 0.45));
    const double edge = road_edge(s.road, depth(bottom), left);
    const int col = static_cast<int>(left ? edge - W * rng.uniform(0.02, 0.06)
                                          : edge + W * rng.uniform(0.02, 0.06));
    const int thickness = rng.uniform_int(2, 3);
    const int top = static_cast<int>(H * rng.uniform(0.15, 0.3));
    s.poles.push_back(clamp_box(top, col, bottom, col + thickness, height, width));
    if (rng.uniform() < 0.6) {
      const int size = std::max(3, static_cast<int>(H * 0.05));
      s.signs.push_back(clamp_box(top, col - size / 2, top + size, col + size / 2 + thickness,
                                  height, width));
    }
  }

  // Vehicles on the road.
  const int vehicles = rng.uniform_int(1, 3);
  for (int v = 0; v < vehicles; ++v) {
    const int bottom = s.horizon + static_cast<int>(ground * rng.uniform(0.25, 0.8));
    const double d = depth(bottom);
    const int h = std::max(3, static_cast<int>(H * (0.06 + 0.12 * d)));
    const int w = static_cast<int>(h * rng.uniform(1.3, 2.0));
    const double l = road_edge(s.road, d, true), r = road_edge(s.road, d, false);
    const int cx = static_cast<int>(rng.uniform(l + w / 2.0, std::max(l + w / 2.0 + 1, r - w / 2.0)));
    s.vehicles.push_back(clamp_box(bottom - h, cx - w / 2, bottom, cx + w / 2, height, width));
  }

  auto person_at = [&](double row, double col) {
    const double d = depth(static_cast<int>(row));
    const double ry = H * (0.04 + 0.07 * d) * rng.uniform(0.85, 1.15);
    return Ellipse{row, std::clamp(col, 0.0, W - 1), ry, ry * rng.uniform(0.3, 0.42)};
  };

  // Pedestrians: on the sidewalks in front of facades, crossing the road,
  // and partly hidden behind vehicles.
  const int walkers = rng.uniform_int(3, 6);
  for (int p = 0; p < walkers; ++p) {
    const double row = s.horizon + ground * rng.uniform(0.02, 0.35);
    const double d = depth(static_cast<int>(row));
    const bool left = rng.uniform() < 0.5;
    const double edge = road_edge(s.road, d, left);
    const double col = left ? rng.uniform(std::max(2.0, edge - W * 0.3), edge)
                            : rng.uniform(edge, std::min(W - 3, edge + W * 0.3));
    s.persons.push_back(person_at(row, col));
  }
  const int crossing = rng.uniform_int(0, 2);
  for (int p = 0; p < crossing; ++p) {
    const double row = s.horizon + ground * rng.uniform(0.1, 0.6);
    const double d = depth(static_cast<int>(row));
    s.persons.push_back(
        person_at(row, rng.uniform(road_edge(s.road, d, true), road_edge(s.road, d, false))));
  }
  for (const auto& v : s.vehicles) {
    if (rng.uniform() < 0.5) continue;
    const double row = v.top + (v.bottom - v.top) * rng.uniform(0.1, 0.4);
    s.occluded_persons.push_back(person_at(row, rng.uniform(v.left, v.right)));
  }
  validate_scene_spec(s);
  return s;
}

LabelField paint_ground_truth(const SceneSpec& spec, const ClassCatalog& catalog) {
  validate_scene_spec(spec);
  const SceneClasses k(catalog);
  LabelField gt(spec.height, spec.width);
  gt.topRows(spec.horizon) = static_cast<std::uint8_t>(k.sky);
  gt.bottomRows(spec.height - spec.horizon) = static_cast<std::uint8_t>(k.sidewalk);
  for (const auto& b : spec.terrain) paint_box(gt, b, k.terrain);

  const double ground = spec.height - spec.horizon;
  for (int r = spec.horizon; r < spec.height; ++r) {
    const double t = (r + 0.5 - spec.horizon) / ground;
    const int l = std::max(0, static_cast<int>(std::lround(road_edge(spec.road, t, true))));
    const int rr = std::min(spec.width, static_cast<int>(std::lround(road_edge(spec.road, t, false))));
    if (rr > l) gt.row(r).segment(l, rr - l) = static_cast<std::uint8_t>(k.road);
  }
  for (const auto& b : spec.buildings) paint_box(gt, b, k.building);
  for (const auto& b : spec.vegetation) paint_box(gt, b, k.vegetation);
  for (const auto& b : spec.poles) paint_box(gt, b, k.pole);
  for (const auto& b : spec.signs) paint_box(gt, b, k.sign);
  for (const auto& e : spec.occluded_persons) paint_ellipse(gt, e, k.person);
  for (const auto& b : spec.vehicles) paint_box(gt, b, k.car);
  for (const auto& e : spec.persons) paint_ellipse(gt, e, k.person);
  return gt;
}

SceneBundle generate_scene(const SceneSpec& spec, const ClassCatalog& catalog) {
  LabelField gt = paint_ground_truth(spec, catalog);
  const int n = catalog.size();
  const int H = spec.height, W = spec.width;
  const int radius = spec.blur_radius;

  // Per-class prefix sums for window histograms.
  const int stride = W + 1;
  std::vector<std::int32_t> prefix(static_cast<std::size_t>(n) * (H + 1) * stride, 0);
  auto at = [&](int k, int r, int c) -> std::int32_t& {
    return prefix[(static_cast<std::size_t>(k) * (H + 1) + r) * stride + c];
  };
  for (int r = 0; r < H; ++r)
    for (int c = 0; c < W; ++c)
      for (int k = 0; k < n; ++k)
        at(k, r + 1, c + 1) = at(k, r, c + 1) + at(k, r + 1, c) - at(k, r, c) + (gt(r, c) == k);

  std::vector<int> aggregate(n);
  const auto names = catalog.aggregate_names();
  for (int k = 0; k < n; ++k) aggregate[k] = catalog.aggregate_position(k);
  const auto position = [&](const char* name) {
    const auto it = std::find(names.begin(), names.end(), name);
    return it == names.end() ? -2 : static_cast<int>(it - names.begin());
  };
  const int humans = position("humans"), statics = position("static");
  const int road = position("road"), flat = position("flat");
  auto affinity = [&](int a, int b) {
    const int x = aggregate[a], y = aggregate[b];
    if (a == b) return 1.0;
    if ((x == humans && y == statics) || (x == statics && y == humans)) return kConfusionBoost;
    const bool ground_x = x == road || x == flat, ground_y = y == road || y == flat;
    if ((x == humans && ground_y) || (y == humans && ground_x)) return kGroundDamping;
    return 1.0;
  };

  SplitMix64 rng(spec.seed ^ kNoiseStream);
  ProbabilityField::Values values(static_cast<Eigen::Index>(H) * W, n);
  std::vector<double> kernel(n), jitter(n);
  for (int r = 0; r < H; ++r) {
    const int r0 = std::max(0, r - radius), r1 = std::min(H, r + radius + 1);
    for (int c = 0; c < W; ++c) {
      const int c0 = std::max(0, c - radius), c1 = std::min(W, c + radius + 1);
      const int g = gt(r, c);
      for (int k = 0; k < n; ++k) jitter[k] = rng.uniform(0.5, 1.5);

      const double total = static_cast<double>((r1 - r0) * (c1 - c0));
      double kernel_sum = 0.0;
      for (int k = 0; k < n; ++k) {
        const double share = (at(k, r1, c1) - at(k, r0, c1) - at(k, r1, c0) + at(k, r0, c0)) / total;
        kernel[k] = share * jitter[k] * affinity(g, k);
        kernel_sum += kernel[k];
      }
      const double foreign = 1.0 - (at(g, r1, c1) - at(g, r0, c1) - at(g, r1, c0) + at(g, r0, c0)) / total;
      const double w = std::min(1.0, spec.noise * (1.0 + kBoundaryGain * foreign));

      auto row = values.row(static_cast<Eigen::Index>(r) * W + c);
      for (int k = 0; k < n; ++k) {
        const double spread = (1.0 - n * kFloorMass) * kernel[k] / kernel_sum + kFloorMass;
        const double p = (1.0 - w) * (k == g ? 1.0 : 0.0) + w * spread;
        row(k) = static_cast<float>(p);
      }
    }
  }
  char id[32];
  std::snprintf(id, sizeof id, "scene_%llu", static_cast<unsigned long long>(spec.seed));
  return make_scene_bundle(id, ProbabilityField::from_values(H, W, std::move(values)),
                           std::move(gt));
}

std::vector<SceneBundle> generate_suite(int count, std::uint64_t base_seed, int height,
                                        int width, double noise, const ClassCatalog& catalog,
                                        int blur_radius) {
  if (count < 1) throw ValidationError("suite needs at least one scene");
  std::vector<SceneBundle> suite;
  suite.reserve(count);
  for (int i = 0; i < count; ++i) {
    SceneBundle scene = generate_scene(
        random_scene_spec(base_seed + static_cast<std::uint64_t>(i), height, width, noise,
                          blur_radius),
        catalog);
    char id[32];
    std::snprintf(id, sizeof id, "scene_%04d", i);
    scene.id = id;
    suite.push_back(std::move(scene));
  }
  return suite;
}

std::array<std::uint8_t, 3> class_color(int class_index) {
  static constexpr std::array<std::array<std::uint8_t, 3>, 19> kPalette = {{
      {128, 64, 128}, {244, 35, 232}, {70, 70, 70},   {102, 102, 156}, {190, 153, 153},
      {153, 153, 153}, {250, 170, 30}, {220, 220, 0},  {107, 142, 35},  {152, 251, 152},
      {70, 130, 180},  {220, 20, 60},  {255, 0, 0},    {0, 0, 142},     {0, 0, 70},
      {0, 60, 100},    {0, 80, 100},   {0, 0, 230},    {119, 11, 32},
  }};
  if (class_index >= 0 && class_index < 19) return kPalette[class_index];
  const auto v = static_cast<std::uint8_t>((class_index * 37) % 256);
  return {v, static_cast<std::uint8_t>(255 - v), static_cast<std::uint8_t>(v / 2)};
}

RgbImage class_color_preview(const LabelImage& labels, std::uint8_t ignore) {
  RgbImage image(static_cast<int>(labels.cols()), static_cast<int>(labels.rows()), 0);
  for (int r = 0; r < image.height; ++r) {
    for (int c = 0; c < image.width; ++c) {
      const std::uint8_t v = labels(r, c);
      const auto color = v == ignore ? std::array<std::uint8_t, 3>{0, 0, 0} : class_color(v);
      std::copy(color.begin(), color.end(), image.at(r, c));
    }
  }
  return image;
}

}  // namespace costlens
