#include "costlens/sweep.hpp"
#include "costlens/decision.hpp"
#include "costlens/synth.hpp"

#include "generators.hpp"

#include "doctest.h"

#include <cstdlib>
#include <set>

using namespace costlens;

namespace {

const ClassCatalog& catalog() {
  static const ClassCatalog cat = builtin_cityscapes_catalog();
  return cat;
}

const std::vector<SceneBundle>& suite() {
  static const std::vector<SceneBundle> scenes = generate_suite(4, 7, 40, 80, 0.3, catalog());
  return scenes;
}

// Standalone pipeline: decide each scene and pool the counts.
std::optional<double> standalone(const CostMatrixd& cost, Metric metric, int k,
                                 const BinaryMask* roi = nullptr) {
  PixelCounts pooled;
  for (const auto& s : suite()) pooled += pixel_counts(decide(s.probabilities, cost), s.ground_truth, k, 255, roi);
  return metric == Metric::Recall ? recall(pooled) : precision(pooled);
}

}  // namespace

TEST_CASE("simplex grid") {
  CHECK(simplex_grid(1).size() == 3);
  CHECK(simplex_grid(4).size() == 15);
  CHECK(simplex_grid(20).size() == 231);
  CHECK_THROWS_AS(simplex_grid(0), ValidationError);

  for (int n = 1; n <= 30; ++n) {
    const SimplexGrid g = simplex_grid(n);
    CHECK(g.size() == static_cast<std::size_t>((n + 1) * (n + 2) / 2));
    std::set<std::pair<long, long>> seen;
    for (int a = 0; a <= n; ++a) {
      for (int b = 0; a + b <= n; ++b) {
        const auto& p = g.points[g.index_of(a, b)];
        CHECK(p.alpha() == static_cast<double>(a) / n);
        CHECK(p.beta() == static_cast<double>(b) / n);
        seen.emplace(a, b);
      }
    }
    CHECK(seen.size() == g.size());
    CHECK_THROWS_AS(g.index_of(n, 1), ValidationError);
  }
  const SimplexGrid g1 = simplex_grid(1);
  CHECK(g1.points[0] == BarycentricPoint(0, 0, 1));
  CHECK(g1.points[2] == BarycentricPoint(1, 0, 0));
}

TEST_CASE("grid steps") {
  CHECK(divisions_from_step("1/20") == 20);
  CHECK(divisions_from_step("0.05") == 20);
  CHECK(divisions_from_step("0.25") == 4);
  CHECK(divisions_from_step("1") == 1);
  CHECK_THROWS_AS(divisions_from_step("0.3"), ValidationError);
  CHECK_THROWS_AS(divisions_from_step("2/5"), ValidationError);
  CHECK_THROWS_AS(divisions_from_step("fine"), ValidationError);
  CHECK_THROWS_AS(divisions_from_step("0"), ValidationError);
}

TEST_CASE("corner sets") {
  const CornerSet corners = CornerSet::builtin(catalog());
  CHECK(corners.at(BarycentricPoint(1, 0, 0)) == expand_aggregate_matrix(robotistic_matrix(), catalog()));
  CHECK(corners.at(BarycentricPoint(0, 1, 0)) == expand_aggregate_matrix(altruistic_matrix(), catalog()));
  CHECK(corners.at(BarycentricPoint(0, 0, 1)) == expand_aggregate_matrix(egoistic_matrix(), catalog()));

  // Interior points keep the epsilon and sky structure of the expansion.
  const CostMatrixd mid = corners.at(BarycentricPoint(0.2, 0.3, 0.5));
  CHECK(mid(catalog().index_of("sidewalk"), catalog().index_of("terrain")) == 0.1);
  CHECK(mid(catalog().index_of("sky"), catalog().index_of("road")) == 1000.0);

  const CornerSet back = corners_from_json(Json::parse(corners.to_json().dump()), catalog());
  CHECK(back.at(BarycentricPoint(0.2, 0.3, 0.5)) == mid);
  const CornerSet named = corners_from_json(
      Json{{"robotistic", "robotistic"}, {"altruistic", "altruistic"}, {"egoistic", "egoistic"}},
      catalog());
  CHECK(named.at(BarycentricPoint(0.2, 0.3, 0.5)) == mid);
  CHECK_THROWS_AS(corners_from_json(Json{{"robotistic", "robotistic"}}, catalog()), ValidationError);

  const CornerSet full = CornerSet::from_full(corners.at(BarycentricPoint(1, 0, 0)),
                                              corners.at(BarycentricPoint(0, 1, 0)),
                                              corners.at(BarycentricPoint(0, 0, 1)),
                                              catalog().class_names());
  const CornerSet full_back = corners_from_json(Json::parse(full.to_json().dump()), catalog());
  CHECK(full_back.at(BarycentricPoint(0, 1, 0)) == full.at(BarycentricPoint(0, 1, 0)));
}

TEST_CASE("surface corner consistency and invariances") {
  const CornerSet corners = CornerSet::builtin(catalog());
  const int person = catalog().index_of("person");
  const SimplexGrid grid = simplex_grid(4);
  for (Metric metric : {Metric::Recall, Metric::Precision}) {
    const MetricSurface s = evaluate_surface(suite(), corners, grid, metric, person);
    REQUIRE(s.values.size() == 15);
    CHECK(s.values[grid.index_of(4, 0)] ==
          standalone(expand_aggregate_matrix(robotistic_matrix(), catalog()), metric, person));
    CHECK(s.values[grid.index_of(0, 4)] ==
          standalone(expand_aggregate_matrix(altruistic_matrix(), catalog()), metric, person));
    CHECK(s.values[grid.index_of(0, 0)] ==
          standalone(expand_aggregate_matrix(egoistic_matrix(), catalog()), metric, person));
    for (const auto& v : s.values)
      if (v) CHECK((*v >= 0.0 && *v <= 1.0));

    std::vector<SceneBundle> reversed(suite().rbegin(), suite().rend());
    CHECK(evaluate_surface(reversed, corners, grid, metric, person).values == s.values);

    const double mu = 7.0;
    const CornerSet scaled = CornerSet::from_full(mu * corners.at(BarycentricPoint(1, 0, 0)),
                                                  mu * corners.at(BarycentricPoint(0, 1, 0)),
                                                  mu * corners.at(BarycentricPoint(0, 0, 1)));
    const CornerSet unscaled = CornerSet::from_full(corners.at(BarycentricPoint(1, 0, 0)),
                                                    corners.at(BarycentricPoint(0, 1, 0)),
                                                    corners.at(BarycentricPoint(0, 0, 1)));
    CHECK(evaluate_surface(suite(), scaled, grid, metric, person).values ==
          evaluate_surface(suite(), unscaled, grid, metric, person).values);
  }
  CHECK(evaluate_surface(suite(), corners, simplex_grid(1), Metric::Recall, person).values.size() == 3);
  CHECK_THROWS_AS(evaluate_surface(std::vector<SceneBundle>{}, corners, grid, Metric::Recall, person),
                  ValidationError);
}

TEST_CASE("RoI-restricted surfaces") {
  const CornerSet corners = CornerSet::builtin(catalog());
  const int person = catalog().index_of("person");
  RoiMap roi(40, 80);
  roi.topRows(20).setConstant(1);
  roi.bottomRows(20).setConstant(2);
  const SimplexGrid grid = simplex_grid(2);
  const MetricSurface s = evaluate_surface(suite(), corners, grid, Metric::Recall, person, 255,
                                           RoiSelection{&roi, 2, 2});
  const BinaryMask bottom = roi_mask(roi, 2, 2);
  CHECK(s.values[grid.index_of(2, 0)] ==
        standalone(expand_aggregate_matrix(robotistic_matrix(), catalog()), Metric::Recall, person,
                   &bottom));
}

TEST_CASE("surface does not depend on the worker count") {
  const CornerSet corners = CornerSet::builtin(catalog());
  ::setenv("COSTLENS_THREADS", "1", 1);
  const auto one = evaluate_surface(suite(), corners, simplex_grid(3), Metric::Precision, 11).values;
  ::setenv("COSTLENS_THREADS", "4", 1);
  const auto four = evaluate_surface(suite(), corners, simplex_grid(3), Metric::Precision, 11).values;
  ::unsetenv("COSTLENS_THREADS");
  CHECK(one == four);
}

TEST_CASE("CSV") {
  MetricSurface s;
  s.grid = simplex_grid(1);
  s.values = {0.25, std::nullopt, 1.0 / 3.0};
  CHECK(surface_csv(s) ==
        "alpha,beta,gamma,value\n0,0,1,0.25\n0,1,0,nan\n1,0,0,0.33333333333333331\n");
}

TEST_CASE("heat ramp and rendering") {
  CHECK(heat_color(1.0, 0.0, 1.0) == std::array<std::uint8_t, 3>{0, 0, 255});
  CHECK(heat_color(0.0, 0.0, 1.0) == std::array<std::uint8_t, 3>{255, 0, 0});
  CHECK(heat_color(0.5, 0.5, 0.5) == std::array<std::uint8_t, 3>{0, 0, 255});

  const int n = 4, width = 161, height = 81;  // every lattice point lands on a pixel
  MetricSurface s;
  s.grid = simplex_grid(n);
  SplitMix64 rng(10);
  for (std::size_t i = 0; i < s.grid.size(); ++i) s.values.push_back(rng.uniform());
  const double lo = **std::min_element(s.values.begin(), s.values.end());
  const double hi = **std::max_element(s.values.begin(), s.values.end());
  const RgbImage img = render_heatmap(s, width, height);
  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    const auto xy = heatmap_position(s.grid.points[i], width, height);
    const std::uint8_t* px = img.at(static_cast<int>(std::lround(xy[1])), static_cast<int>(std::lround(xy[0])));
    const auto want = heat_color(*s.values[i], lo, hi);
    CHECK(std::array<std::uint8_t, 3>{px[0], px[1], px[2]} == want);
  }
  // Layout: C_R top centre, C_A bottom left, C_E bottom right; corners outside are white.
  CHECK(heatmap_position(BarycentricPoint(1, 0, 0), width, height) == std::array<double, 2>{80, 0});
  CHECK(heatmap_position(BarycentricPoint(0, 1, 0), width, height) == std::array<double, 2>{0, 80});
  CHECK(heatmap_position(BarycentricPoint(0, 0, 1), width, height) == std::array<double, 2>{160, 80});
  CHECK(img.at(0, 0)[0] == 255);
  CHECK(img.at(0, 0)[1] == 255);

  MetricSurface flat;
  flat.grid = simplex_grid(2);
  flat.values.assign(6, 0.7);
  const RgbImage uniform = render_heatmap(flat, 50, 40);
  for (int y = 0; y < 40; ++y)
    for (int x = 0; x < 50; ++x) {
      const std::uint8_t* px = uniform.at(y, x);
      const bool white = px[0] == 255 && px[1] == 255 && px[2] == 255;
      const bool blue = px[0] == 0 && px[1] == 0 && px[2] == 255;
      CHECK((white || blue));
    }

  MetricSurface undefined;
  undefined.grid = simplex_grid(1);
  undefined.values = {std::nullopt, std::nullopt, std::nullopt};
  CHECK(render_heatmap(undefined, 20, 20).at(19, 10)[1] == 128);
  MetricSurface broken;
  broken.grid = simplex_grid(2);
  CHECK_THROWS_AS(render_heatmap(broken, 20, 20), ValidationError);
}
