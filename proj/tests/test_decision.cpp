#include "costlens/decision.hpp"

#include "generators.hpp"

#include "doctest.h"

#include <cstdlib>

using namespace costlens;
using costlens::testing::random_field;
using costlens::testing::random_priors;
using costlens::testing::random_value_matrix;

namespace {

// Straight loops in long double, lowest index on ties.
Mask naive_decide(const ProbabilityField& f, const CostMatrixd& c) {
  Mask m(f.height(), f.width());
  for (int r = 0; r < f.height(); ++r) {
    for (int col = 0; col < f.width(); ++col) {
      int best = 0;
      long double best_cost = 0;
      for (int k = 0; k < f.num_classes(); ++k) {
        long double cost = 0;
        for (int j = 0; j < f.num_classes(); ++j)
          cost += static_cast<long double>(c(k, j)) * f(r, col, j);
        if (k == 0 || cost < best_cost) {
          best = k;
          best_cost = cost;
        }
      }
      m(r, col) = static_cast<std::uint8_t>(best);
    }
  }
  return m;
}

ProbabilityField single_pixel(std::vector<float> p) {
  ProbabilityField::Values v(1, static_cast<Eigen::Index>(p.size()));
  for (std::size_t k = 0; k < p.size(); ++k) v(0, k) = p[k];
  return ProbabilityField::from_values(1, 1, std::move(v));
}

}  // namespace

TEST_CASE("hand-computed decisions") {
  const auto f = single_pixel({0.5f, 0.3f, 0.2f});
  CHECK(decide(f, symmetric_cost_matrix(3, 1.0))(0, 0) == 0);
  // Costs: 0.3 + 10 * 0.2 = 2.3, 0.5 + 2 = 2.5, 0.5 + 0.3 = 0.8.
  CHECK(decide(f, thresholding_cost_matrix(Eigen::Vector3d(1, 1, 10)))(0, 0) == 2);
  CHECK(decide_bayes(f)(0, 0) == 0);
  // Likelihood ratios 1, 1.2, 0.8.
  CHECK(decide_ml(f, PriorVector(Eigen::Vector3d(0.5, 0.25, 0.25)))(0, 0) == 1);
  const PixelGrid<double> cost = expected_cost_map(f, symmetric_cost_matrix(3, 1.0), decide_bayes(f));
  CHECK(cost(0, 0) == doctest::Approx(0.5));
}

TEST_CASE("ties go to the lowest class index") {
  const auto f = single_pixel({0.25f, 0.25f, 0.25f, 0.25f});
  CHECK(decide(f, symmetric_cost_matrix(4, 1.0))(0, 0) == 0);
  CHECK(decide_bayes(f)(0, 0) == 0);
  const auto g = single_pixel({0.1f, 0.45f, 0.45f});
  CHECK(decide_bayes(g)(0, 0) == 1);
  CHECK(decide(g, symmetric_cost_matrix(3, 2.0))(0, 0) == 1);
}

TEST_CASE("decide agrees with the naive oracle") {
  SplitMix64 rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = rng.uniform_int(2, 19);
    const auto f = random_field(rng, rng.uniform_int(1, 12), rng.uniform_int(1, 12), n, true);
    const auto c = random_value_matrix(rng, n);
    CHECK((decide(f, c) == naive_decide(f, c)).all());
  }
}

TEST_CASE("Bayes, ML and scale invariance properties") {
  SplitMix64 rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = rng.uniform_int(2, 19);
    const auto f = random_field(rng, 7, 9, n, true);
    const double lambda = rng.uniform(0.1, 10.0);
    CHECK((decide(f, symmetric_cost_matrix(n, lambda)) == decide_bayes(f)).all());

    const PriorVector priors = random_priors(rng, n);
    CHECK((decide(f, inverse_prior_cost_matrix(priors, lambda)) == decide_ml(f, priors)).all());

    const auto c = random_value_matrix(rng, n);
    const Mask base = decide(f, c);
    for (double mu : {0.1, 7.0, 1000.0}) CHECK((decide(f, (mu * c).eval()) == base).all());
  }
}

TEST_CASE("large fields cross block boundaries identically for any worker count") {
  SplitMix64 rng(5);
  const auto f = random_field(rng, 61, 97, 19, true);  // 5917 pixels, three blocks
  const auto c = random_value_matrix(rng, 19);
  const Mask reference = naive_decide(f, c);
  for (const char* threads : {"1", "2", "3", "8"}) {
    ::setenv("COSTLENS_THREADS", threads, 1);
    CHECK((decide(f, c) == reference).all());
  }
  ::unsetenv("COSTLENS_THREADS");
}

TEST_CASE("float cost matrices and double fields") {
  SplitMix64 rng(8);
  const auto f = random_field(rng, 5, 5, 4, true);
  const CostMatrix<float> cf = random_value_matrix(rng, 4).cast<float>();
  CHECK((decide(f, cf) == naive_decide(f, cf.cast<double>())).all());

  const BasicProbabilityField<double> fd =
      BasicProbabilityField<double>::from_values(5, 5, f.values().cast<double>());
  CHECK((decide_bayes(fd) == decide_bayes(f)).all());
}

TEST_CASE("errors") {
  SplitMix64 rng(1);
  const auto f = random_field(rng, 2, 2, 3);
  CHECK_THROWS_AS(decide(f, symmetric_cost_matrix(4, 1.0)), ValidationError);
  CHECK_THROWS_AS(decide_ml(f, PriorVector(Eigen::Vector3d(0.5, 0.5, 0.0))), ValidationError);
  CHECK_THROWS_AS(decide_ml(f, PriorVector(Eigen::Vector2d(0.5, 0.5))), ValidationError);
}
