#pragma once

#include "costlens/catalog.hpp"
#include "costlens/costspace.hpp"
#include "costlens/evaluation.hpp"
#include "costlens/fields.hpp"
#include "costlens/geography.hpp"
#include "costlens/image_io.hpp"
#include "costlens/json.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace costlens {

inline constexpr int kDefaultGridDivisions = 20;

// All barycentric points with coordinates in {0, 1/n, ..., 1}. Point order:
// alpha index ascending, then beta index ascending.
struct SimplexGrid {
  int divisions = 0;
  std::vector<BarycentricPoint> points;

  std::size_t size() const { return points.size(); }
  // Position of the lattice point (alpha, beta) = (a/n, b/n) in points.
  std::size_t index_of(int a, int b) const;
};

SimplexGrid simplex_grid(int divisions);

// Parses "1/20" or "0.05" into a division count; the step must be 1/n.
int divisions_from_step(std::string_view step);

// The three corners (C_R, C_A, C_E) of the swept triangle. Aggregate-space
// corners are combined in aggregate space and expanded afterwards.
class CornerSet {
 public:
  static CornerSet from_aggregates(const ClassCatalog& catalog, AggregateCostMatrix robotistic,
                                   AggregateCostMatrix altruistic, AggregateCostMatrix egoistic,
                                   double epsilon = kDefaultEpsilon,
                                   double sky_cost = kDefaultSkyCost);
  // `order` names the rows/columns in the JSON form; indices are used when
  // it is empty.
  static CornerSet from_full(CostMatrixd robotistic, CostMatrixd altruistic,
                             CostMatrixd egoistic, std::vector<std::string> order = {});
  static CornerSet builtin(const ClassCatalog& catalog, double epsilon = kDefaultEpsilon,
                           double sky_cost = kDefaultSkyCost);

  CostMatrixd at(const BarycentricPoint& point) const;
  Json to_json() const;
  bool aggregate_space() const { return aggregate_.has_value(); }

 private:
  struct AggregateCorners {
    ClassCatalog catalog;
    std::array<AggregateCostMatrix, 3> corners;
    double epsilon;
    double sky_cost;
  };
  std::vector<std::string> order_;
  std::optional<AggregateCorners> aggregate_;
  std::array<CostMatrixd, 3> full_;
};

// Reads the to_json() form. Each corner may also be a builtin name. Aggregate
// documents take epsilon/sky_cost from the file when present.
CornerSet corners_from_json(const Json& doc, const ClassCatalog& catalog,
                            double epsilon = kDefaultEpsilon, double sky_cost = kDefaultSkyCost);

enum class Metric { Precision, Recall };
Metric parse_metric(std::string_view name);
std::string_view metric_name(Metric metric);

struct RoiSelection {
  const RoiMap* roi = nullptr;
  int roi_id = 1;
  int region_count = 1;
};

struct MetricSurface {
  SimplexGrid grid;
  Metric metric = Metric::Recall;
  int class_index = 0;
  std::optional<int> roi_id;
  std::vector<std::optional<double>> values;
};

// Decides every scene under `cost` and pools TP/FP/FN of class k over all
// scenes (restricted to the RoI when given).
PixelCounts pooled_counts(std::span<const SceneBundle> scenes, const CostMatrixd& cost, int k,
                          std::uint8_t ignore, const std::optional<RoiSelection>& roi);

std::optional<double> metric_value(Metric metric, const PixelCounts& counts);

MetricSurface evaluate_surface(std::span<const SceneBundle> scenes, const CornerSet& corners,
                               const SimplexGrid& grid, Metric metric, int class_index,
                               std::uint8_t ignore = kDefaultIgnore,
                               const std::optional<RoiSelection>& roi = std::nullopt);

// alpha,beta,gamma,value rows; undefined values print as "nan".
std::string surface_csv(const MetricSurface& surface);

// Linear ramp: value == max -> pure blue, value == min -> pure red. A
// constant surface maps to blue.
std::array<std::uint8_t, 3> heat_color(double value, double min, double max);

// Pixel position of a barycentric point: C_R at the top centre, C_A bottom
// left, C_E bottom right.
std::array<double, 2> heatmap_position(const BarycentricPoint& point, int width, int height);

// Outside-triangle pixels are white; pixels whose interpolation touches an
// undefined grid value are grey.
RgbImage render_heatmap(const MetricSurface& surface, int width, int height);

}  // namespace costlens
