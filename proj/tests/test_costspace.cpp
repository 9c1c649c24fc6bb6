#include "costlens/costspace.hpp"
#include "costlens/rng.hpp"

#include "doctest.h"

#include <map>

using namespace costlens;

namespace {

// Aggregate membership written out by hand, independent of the catalog code.
const std::map<std::string, std::string> kAggregateOf = {
    {"road", "road"},          {"sidewalk", "flat"},         {"building", "static"},
    {"wall", "static"},        {"fence", "static"},          {"pole", "static"},
    {"traffic light", "info"}, {"traffic sign", "info"},     {"vegetation", "static"},
    {"terrain", "flat"},       {"sky", ""},                  {"person", "humans"},
    {"rider", "humans"},       {"car", "dynamic"},           {"truck", "dynamic"},
    {"bus", "dynamic"},        {"train", "dynamic"},         {"motorcycle", "static"},
    {"bicycle", "static"}};

// Altruistic entries from the published figure, rows = prediction.
const double kAltruistic[6][6] = {{0, 1, 10, 100, 1000, 100},   {1, 0, 10, 100, 1000, 100},
                                  {1, 1, 0, 100, 100, 10},      {1, 1, 1, 0, 1000, 100},
                                  {1, 1, 1, 100, 0, 10},        {1, 1, 1, 100, 1000, 0}};
const double kEgoistic[6][6] = {{0, 1, 1000, 100, 10, 100},     {1, 0, 1000, 100, 10, 100},
                                {10, 1, 0, 1000, 1, 10},        {10, 1, 1000, 0, 1, 10},
                                {10, 1, 1000, 100, 0, 100},     {10, 10, 1000, 100, 100, 0}};
const std::vector<std::string> kOrder = {"road", "flat", "static", "info", "humans", "dynamic"};

int position(const std::string& aggregate) {
  return static_cast<int>(std::find(kOrder.begin(), kOrder.end(), aggregate) - kOrder.begin());
}

// Reference expansion: the rule applied entry by entry.
double expected_entry(const double (*agg)[6], const std::string& pred, const std::string& target,
                      double eps, double sky) {
  if (pred == target) return 0.0;
  if (pred == "sky") return sky;
  if (target == "sky") return eps;
  const auto& a = kAggregateOf.at(pred);
  const auto& b = kAggregateOf.at(target);
  if (a == b) return eps;
  return agg[position(a)][position(b)];
}

Eigen::MatrixXd random_value_matrix(SplitMix64& rng, int n) {
  Eigen::MatrixXd c(n, n);
  for (int r = 0; r < n; ++r)
    for (int k = 0; k < n; ++k) c(r, k) = r == k ? 0.0 : rng.uniform(0.01, 100.0);
  return c;
}

}  // namespace

TEST_CASE("symmetric and thresholding families") {
  const CostMatrixd cs = symmetric_cost_matrix(3, 2.0);
  for (int r = 0; r < 3; ++r)
    for (int k = 0; k < 3; ++k) CHECK(cs(r, k) == (r == k ? 0.0 : 2.0));

  const CostMatrixd t = thresholding_cost_matrix(Eigen::Vector3d(1.0, 2.0, 3.0));
  for (int r = 0; r < 3; ++r)
    for (int k = 0; k < 3; ++k) CHECK(t(r, k) == (r == k ? 0.0 : k + 1.0));

  CHECK(thresholding_cost_matrix(Eigen::VectorXd::Constant(5, 0.7)) == symmetric_cost_matrix(5, 0.7));
  const CostMatrix<float> single = symmetric_cost_matrix<float>(4, 1.5f);
  CHECK(single(0, 3) == 1.5f);

  CHECK_THROWS_AS(symmetric_cost_matrix(1, 1.0), ValidationError);
  CHECK_THROWS_AS(symmetric_cost_matrix(3, 0.0), ValidationError);
  CHECK_THROWS_AS(thresholding_cost_matrix(Eigen::Vector2d(1.0, -1.0)), ValidationError);
}

TEST_CASE("inverse prior matrix") {
  const PriorVector p(Eigen::Vector3d(0.5, 0.25, 0.25));
  const CostMatrixd c = inverse_prior_cost_matrix(p, 1.0);
  CHECK(c(1, 0) == 2.0);
  CHECK(c(2, 0) == 2.0);
  CHECK(c(0, 1) == 4.0);
  CHECK(c(0, 2) == 4.0);
  CHECK(c.diagonal().isZero(0.0));
  CHECK(inverse_prior_cost_matrix(p, 3.0)(0, 1) == 12.0);
  CHECK_THROWS_AS(inverse_prior_cost_matrix(PriorVector(Eigen::Vector2d(1.0, 0.0)), 1.0),
                  ValidationError);
}

TEST_CASE("value space validation reports every offending entry") {
  Eigen::Matrix3d c;
  c << 0, 1, 1,  //
      1, 0.5, -2,  //
      1, 0, 0;
  const auto report = validate_value_space(c);
  REQUIRE(report.violations.size() == 3);
  CHECK(report.violations[0].row == 1);
  CHECK(report.violations[0].col == 1);
  CHECK(report.violations[1].col == 2);
  CHECK(report.violations[2].row == 2);
  CHECK(report.violations[2].col == 1);
  CHECK_THROWS_AS(require_value_space(c), ValidationError);
  CHECK(validate_value_space(Eigen::MatrixXd::Zero(2, 3)).violations.size() == 1);
  Eigen::Matrix2d nan;
  nan << 0, std::nan(""), 1, 0;
  CHECK(!validate_value_space(nan).ok());
  CHECK(validate_value_space(symmetric_cost_matrix(19, 1.0)).ok());
}

TEST_CASE("barycentric points") {
  CHECK_NOTHROW(BarycentricPoint(0.2, 0.3, 0.5));
  CHECK_NOTHROW(BarycentricPoint(1.0 / 3, 1.0 / 3, 1.0 / 3));
  CHECK_THROWS_WITH_AS(BarycentricPoint(0.5, 0.5, 0.5), doctest::Contains("simplex violation"),
                       ValidationError);
  CHECK_THROWS_AS(BarycentricPoint(0.5, 0.2, 0.2), ValidationError);
  CHECK_THROWS_AS(BarycentricPoint(1.2, -0.2, 0.0), ValidationError);
  CHECK_THROWS_AS(BarycentricPoint(std::nan(""), 0.5, 0.5), ValidationError);
}

TEST_CASE("expanded builtin matrices match the rule entry by entry") {
  const ClassCatalog cat = builtin_cityscapes_catalog();
  const double ones[6][6] = {{0, 1, 1, 1, 1, 1}, {1, 0, 1, 1, 1, 1}, {1, 1, 0, 1, 1, 1},
                             {1, 1, 1, 0, 1, 1}, {1, 1, 1, 1, 0, 1}, {1, 1, 1, 1, 1, 0}};
  struct Case {
    AggregateCostMatrix agg;
    const double (*table)[6];
  };
  for (const auto& [agg, table] : {Case{robotistic_matrix(), ones},
                                   Case{altruistic_matrix(), kAltruistic},
                                   Case{egoistic_matrix(), kEgoistic}}) {
    for (const auto& [eps, sky] : {std::pair{0.1, 1000.0}, std::pair{0.25, 5000.0}}) {
      const CostMatrixd full = expand_aggregate_matrix(agg, cat, eps, sky);
      REQUIRE(full.rows() == 19);
      for (int r = 0; r < 19; ++r)
        for (int k = 0; k < 19; ++k)
          CHECK(full(r, k) == expected_entry(table, cat.name(r), cat.name(k), eps, sky));
      CHECK(validate_value_space(full).ok());
    }
  }
  const CostMatrixd ca = expand_aggregate_matrix(altruistic_matrix(), cat);
  CHECK(ca(cat.index_of("road"), cat.index_of("person")) == 1000.0);
  CHECK(ca(cat.index_of("person"), cat.index_of("road")) == 1.0);
  const CostMatrixd ce = expand_aggregate_matrix(egoistic_matrix(), cat);
  CHECK(ce(cat.index_of("road"), cat.index_of("building")) == 1000.0);
}

TEST_CASE("expansion preconditions") {
  const ClassCatalog cat = builtin_cityscapes_catalog();
  CHECK_THROWS_AS(expand_aggregate_matrix(robotistic_matrix(), cat, 0.0, 1000.0), ValidationError);
  // The sky row must dominate every aggregate entry.
  CHECK_THROWS_AS(expand_aggregate_matrix(altruistic_matrix(), cat, 0.1, 999.0), ValidationError);
  CHECK_NOTHROW(expand_aggregate_matrix(altruistic_matrix(), cat, 0.1, 1000.0));
  auto wrong = robotistic_matrix();
  wrong.order[0] = "street";
  CHECK_THROWS_AS(expand_aggregate_matrix(wrong, cat), ValidationError);
  CHECK_THROWS_AS(builtin_matrix("stoic"), ValidationError);
  CHECK(is_builtin_matrix_name("egoistic"));
}

TEST_CASE("barycentric combination") {
  const auto r = robotistic_matrix(), a = altruistic_matrix(), e = egoistic_matrix();
  CHECK(barycentric_combination(BarycentricPoint(1, 0, 0), r, a, e).values == r.values);
  CHECK(barycentric_combination(BarycentricPoint(0, 1, 0), r, a, e).values == a.values);
  CHECK(barycentric_combination(BarycentricPoint(0, 0, 1), r, a, e).values == e.values);
  const auto mid = barycentric_combination(BarycentricPoint(0.5, 0.25, 0.25), r, a, e);
  CHECK(mid.values(0, 4) == doctest::Approx(0.5 + 250.0 + 2.5));

  SplitMix64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = rng.uniform_int(2, 8);
    const auto c1 = random_value_matrix(rng, n), c2 = random_value_matrix(rng, n),
               c3 = random_value_matrix(rng, n);
    const double x = rng.uniform(), y = rng.uniform() * (1 - x);
    const BarycentricPoint p(x, y, 1.0 - x - y);
    // Convex combinations of value-space matrices stay in the value space.
    CHECK(validate_value_space(barycentric_combination(p, c1, c2, c3)).ok());
  }
}

TEST_CASE("cost documents") {
  const ClassCatalog cat = builtin_cityscapes_catalog();
  SUBCASE("aggregate document in a permuted order expands like the builtin") {
    const auto a = altruistic_matrix();
    std::vector<int> perm{5, 3, 1, 0, 2, 4};
    std::vector<std::string> order;
    Eigen::MatrixXd m(6, 6);
    for (int i = 0; i < 6; ++i) order.push_back(a.order[perm[i]]);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) m(i, j) = a.values(perm[i], perm[j]);
    const auto doc = cost_document_from_json(cost_matrix_to_json(order, m));
    CHECK(is_aggregate_document(doc, cat));
    CHECK(resolve_cost_document(doc, cat) == expand_aggregate_matrix(a, cat));
  }
  SUBCASE("class document is permuted into catalog order") {
    const CostMatrixd full = expand_aggregate_matrix(egoistic_matrix(), cat);
    std::vector<std::string> order(cat.class_names().rbegin(), cat.class_names().rend());
    const Eigen::MatrixXd reversed = full.reverse();
    const auto doc = cost_document_from_json(cost_matrix_to_json(order, reversed));
    CHECK_FALSE(is_aggregate_document(doc, cat));
    CHECK(resolve_cost_document(doc, cat) == full);
  }
  SUBCASE("malformed documents") {
    CHECK_THROWS_AS(cost_document_from_json(Json::parse(R"({"order":["a"]})")), ValidationError);
    CHECK_THROWS_AS(cost_document_from_json(Json::parse(R"({"order":["a","b"],"matrix":[[0,1]]})")),
                    ValidationError);
    const auto doc = cost_document_from_json(Json::parse(R"({"order":["a","b"],"matrix":[[0,1],[1,0]]})"));
    CHECK_THROWS_AS(resolve_cost_document(doc, cat), ValidationError);
  }
}
