#include "costlens/sweep.hpp"

#include "costlens/decision.hpp"
#include "costlens/error.hpp"
#include "costlens/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace costlens {

std::size_t SimplexGrid::index_of(int a, int b) const {
  // Rows for alpha index i < a hold (n - i + 1) points each.
  const int n = divisions;
  if (a < 0 || b < 0 || a + b > n) throw ValidationError("lattice point outside the simplex");
  const std::size_t before = static_cast<std::size_t>(a) * (n + 1) -
                             static_cast<std::size_t>(a) * (a - 1) / 2;
  return before + static_cast<std::size_t>(b);
}

SimplexGrid simplex_grid(int divisions) {
  if (divisions < 1) throw ValidationError("grid resolution n must be >= 1");
  SimplexGrid grid;
  grid.divisions = divisions;
  const double n = divisions;
  for (int a = 0; a <= divisions; ++a) {
    for (int b = 0; a + b <= divisions; ++b) {
      const int g = divisions - a - b;
      grid.points.emplace_back(a / n, b / n, g / n);
    }
  }
  return grid;
}

int divisions_from_step(std::string_view step) {
  const std::string s(step);
  try {
    if (const auto slash = s.find('/'); slash != std::string::npos) {
      if (std::stoi(s.substr(0, slash)) != 1) throw ValidationError("grid step must be 1/n");
      return std::stoi(s.substr(slash + 1));
    }
    const double v = std::stod(s);
    if (!(v > 0.0) || v > 1.0) throw ValidationError("grid step must lie in (0, 1]");
    const double n = std::round(1.0 / v);
    if (std::abs(n * v - 1.0) > 1e-6) throw ValidationError("grid step must be 1/n");
    return static_cast<int>(n);
  } catch (const std::logic_error&) {
    throw ValidationError("cannot parse grid step '" + s + "'");
  }
}

CornerSet CornerSet::from_aggregates(const ClassCatalog& catalog, AggregateCostMatrix robotistic,
                                     AggregateCostMatrix altruistic, AggregateCostMatrix egoistic,
                                     double epsilon, double sky_cost) {
  CornerSet set;
  set.full_ = {expand_aggregate_matrix(robotistic, catalog, epsilon, sky_cost),
               expand_aggregate_matrix(altruistic, catalog, epsilon, sky_cost),
               expand_aggregate_matrix(egoistic, catalog, epsilon, sky_cost)};
  if (robotistic.order != altruistic.order || robotistic.order != egoistic.order)
    throw ValidationError("corner matrices use different aggregate orders");
  set.aggregate_ = AggregateCorners{
      catalog, {std::move(robotistic), std::move(altruistic), std::move(egoistic)}, epsilon,
      sky_cost};
  return set;
}

CornerSet CornerSet::from_full(CostMatrixd robotistic, CostMatrixd altruistic,
                               CostMatrixd egoistic, std::vector<std::string> order) {
  for (const auto* m : {&robotistic, &altruistic, &egoistic}) require_value_space(*m);
  if (robotistic.rows() != altruistic.rows() || robotistic.rows() != egoistic.rows())
    throw ValidationError("corner matrices differ in size");
  CornerSet set;
  if (!order.empty() && static_cast<Eigen::Index>(order.size()) != robotistic.rows())
    throw ValidationError("corner order does not match the matrix size");
  set.full_ = {std::move(robotistic), std::move(altruistic), std::move(egoistic)};
  set.order_ = std::move(order);
  return set;
}

CornerSet CornerSet::builtin(const ClassCatalog& catalog, double epsilon, double sky_cost) {
  return from_aggregates(catalog, robotistic_matrix(), altruistic_matrix(), egoistic_matrix(),
                         epsilon, sky_cost);
}

CostMatrixd CornerSet::at(const BarycentricPoint& point) const {
  if (aggregate_) {
    const auto& c = aggregate_->corners;
    return expand_aggregate_matrix(barycentric_combination(point, c[0], c[1], c[2]),
                                   aggregate_->catalog, aggregate_->epsilon,
                                   aggregate_->sky_cost);
  }
  return barycentric_combination(point, full_[0], full_[1], full_[2]);
}

Json CornerSet::to_json() const {
  static constexpr const char* kNames[3] = {"robotistic", "altruistic", "egoistic"};
  Json doc;
  if (aggregate_) {
    doc["space"] = "aggregate";
    doc["epsilon"] = aggregate_->epsilon;
    doc["sky_cost"] = aggregate_->sky_cost;
    for (int i = 0; i < 3; ++i)
      doc[kNames[i]] = cost_matrix_to_json(aggregate_->corners[i].order,
                                           aggregate_->corners[i].values);
  } else {
    doc["space"] = "class";
    for (int i = 0; i < 3; ++i) {
      std::vector<std::string> order = order_;
      if (order.empty())
        for (Eigen::Index k = 0; k < full_[i].rows(); ++k) order.push_back(std::to_string(k));
      doc[kNames[i]] = cost_matrix_to_json(order, full_[i]);
    }
  }
  return doc;
}

CornerSet corners_from_json(const Json& doc, const ClassCatalog& catalog, double epsilon,
                            double sky_cost) {
  static constexpr const char* kNames[3] = {"robotistic", "altruistic", "egoistic"};
  if (!doc.is_object()) throw ValidationError("corner file must be a JSON object");
  epsilon = doc.value("epsilon", epsilon);
  sky_cost = doc.value("sky_cost", sky_cost);
  std::array<CostDocument, 3> corners;
  for (int i = 0; i < 3; ++i) {
    if (!doc.contains(kNames[i]))
      throw ValidationError(std::string("corner file lacks '") + kNames[i] + "'");
    const Json& entry = doc.at(kNames[i]);
    if (entry.is_string()) {
      const auto m = builtin_matrix(entry.get<std::string>());
      corners[i] = {m.order, m.values};
    } else {
      corners[i] = cost_document_from_json(entry);
    }
  }
  const bool aggregate = is_aggregate_document(corners[0], catalog);
  for (const auto& c : corners)
    if (is_aggregate_document(c, catalog) != aggregate)
      throw ValidationError("corners mix aggregate and class space");
  if (aggregate) {
    // Bring every corner into the first corner's aggregate order.
    const auto& order = corners[0].order;
    std::array<AggregateCostMatrix, 3> m;
    for (int i = 0; i < 3; ++i) {
      Eigen::MatrixXd v(order.size(), order.size());
      for (std::size_t r = 0; r < order.size(); ++r) {
        for (std::size_t c = 0; c < order.size(); ++c) {
          const auto& o = corners[i].order;
          const auto ri = std::find(o.begin(), o.end(), order[r]) - o.begin();
          const auto ci = std::find(o.begin(), o.end(), order[c]) - o.begin();
          v(r, c) = corners[i].matrix(ri, ci);
        }
      }
      m[i] = make_aggregate_matrix(order, std::move(v));
    }
    return CornerSet::from_aggregates(catalog, m[0], m[1], m[2], epsilon, sky_cost);
  }
  return CornerSet::from_full(resolve_cost_document(corners[0], catalog, epsilon, sky_cost),
                              resolve_cost_document(corners[1], catalog, epsilon, sky_cost),
                              resolve_cost_document(corners[2], catalog, epsilon, sky_cost),
                              catalog.class_names());
}

Metric parse_metric(std::string_view name) {
  if (name == "recall") return Metric::Recall;
  if (name == "precision") return Metric::Precision;
  throw ValidationError("unknown metric '" + std::string(name) + "' (recall|precision)");
}

std::string_view metric_name(Metric metric) {
  return metric == Metric::Recall ? "recall" : "precision";
}

std::optional<double> metric_value(Metric metric, const PixelCounts& counts) {
  return metric == Metric::Recall ? recall(counts) : precision(counts);
}

PixelCounts pooled_counts(std::span<const SceneBundle> scenes, const CostMatrixd& cost, int k,
                          std::uint8_t ignore, const std::optional<RoiSelection>& roi) {
  std::optional<BinaryMask> member;
  if (roi) member = roi_mask(*roi->roi, roi->roi_id, roi->region_count);
  PixelCounts total;
  for (const auto& scene : scenes) {
    const Mask mask = decide(scene.probabilities, cost);
    total += pixel_counts(mask, scene.ground_truth, k, ignore, member ? &*member : nullptr);
  }
  return total;
}

MetricSurface evaluate_surface(std::span<const SceneBundle> scenes, const CornerSet& corners,
                               const SimplexGrid& grid, Metric metric, int class_index,
                               std::uint8_t ignore, const std::optional<RoiSelection>& roi) {
  if (scenes.empty()) throw ValidationError("empty scene set");
  MetricSurface surface;
  surface.grid = grid;
  surface.metric = metric;
  surface.class_index = class_index;
  if (roi) surface.roi_id = roi->roi_id;
  surface.values.assign(grid.size(), std::nullopt);
  parallel_for(grid.size(), 1, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const PixelCounts counts =
          pooled_counts(scenes, corners.at(grid.points[i]), class_index, ignore, roi);
      surface.values[i] = metric_value(metric, counts);
    }
  });
  return surface;
}

std::string surface_csv(const MetricSurface& surface) {
  std::ostringstream out;
  out << "alpha,beta,gamma,value\n";
  char buf[128];
  for (std::size_t i = 0; i < surface.grid.size(); ++i) {
    const auto& p = surface.grid.points[i];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,", p.alpha(), p.beta(), p.gamma());
    out << buf;
    if (surface.values[i]) {
      std::snprintf(buf, sizeof buf, "%.17g", *surface.values[i]);
      out << buf << '\n';
    } else {
      out << "nan\n";
    }
  }
  return out.str();
}

std::array<std::uint8_t, 3> heat_color(double value, double min, double max) {
  double t = max > min ? (value - min) / (max - min) : 1.0;
  t = std::clamp(t, 0.0, 1.0);
  return {static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - t))), 0,
          static_cast<std::uint8_t>(std::lround(255.0 * t))};
}

std::array<double, 2> heatmap_position(const BarycentricPoint& point, int width, int height) {
  const double top_x = (width - 1) / 2.0;
  const double bottom_y = height - 1;
  const double x = point.alpha() * top_x + point.gamma() * (width - 1);
  const double y = (point.beta() + point.gamma()) * bottom_y;
  return {x, y};
}

RgbImage render_heatmap(const MetricSurface& surface, int width, int height) {
  const int n = surface.grid.divisions;
  if (n < 1 || surface.values.size() != surface.grid.size() || surface.grid.size() < 3)
    throw ValidationError("degenerate grid");
  if (width < 3 || height < 2) throw ValidationError("heatmap raster too small");

  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (const auto& v : surface.values) {
    if (!v) continue;
    lo = any ? std::min(lo, *v) : *v;
    hi = any ? std::max(hi, *v) : *v;
    any = true;
  }

  // Triangle vertices R (top), A (bottom left), E (bottom right).
  const double rx = (width - 1) / 2.0, ry = 0.0;
  const double ax = 0.0, ay = height - 1;
  const double ex = width - 1, ey = height - 1;
  const double denom = (ay - ey) * (rx - ex) + (ex - ax) * (ry - ey);
  constexpr double kSnap = 1e-7;
  auto snap = [](double v) {
    const double r = std::round(v);
    return std::abs(v - r) < kSnap ? r : v;
  };

  RgbImage image(width, height, 255);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double alpha = ((ay - ey) * (x - ex) + (ex - ax) * (y - ey)) / denom;
      const double beta = ((ey - ry) * (x - ex) + (rx - ex) * (y - ey)) / denom;
      const double gamma = 1.0 - alpha - beta;
      if (alpha < -kSnap || beta < -kSnap || gamma < -kSnap) continue;

      // Lattice coordinates in (alpha, beta) index space.
      double u = std::clamp(snap(alpha * n), 0.0, double(n));
      double v = std::clamp(snap(beta * n), 0.0, double(n) - u);
      const int i = static_cast<int>(std::floor(u));
      const int j = static_cast<int>(std::floor(v));
      const double fu = u - i, fv = v - j;

      std::array<std::pair<std::array<int, 2>, double>, 3> corners;
      // Rounding can put u + v a hair past the hypotenuse; the upper
      // triangle of a cell only exists when i + j + 2 <= n.
      if (fu + fv <= 1.0 || i + j + 2 > n) {
        corners = {{{{i, j}, 1.0 - fu - fv}, {{i + 1, j}, fu}, {{i, j + 1}, fv}}};
      } else {
        corners = {{{{i + 1, j + 1}, fu + fv - 1.0}, {{i + 1, j}, 1.0 - fv}, {{i, j + 1}, 1.0 - fu}}};
      }
      double value = 0.0;
      bool defined = true;
      for (const auto& [lattice, weight] : corners) {
        if (weight == 0.0) continue;
        const auto& sample = surface.values[surface.grid.index_of(lattice[0], lattice[1])];
        if (!sample) {
          defined = false;
          break;
        }
        value += weight * *sample;
      }
      std::uint8_t* px = image.at(y, x);
      if (!defined || !any) {
        px[0] = px[1] = px[2] = 128;
      } else {
        const auto c = heat_color(value, lo, hi);
        px[0] = c[0];
        px[1] = c[1];
        px[2] = c[2];
      }
    }
  }
  return image;
}

}  // namespace costlens
