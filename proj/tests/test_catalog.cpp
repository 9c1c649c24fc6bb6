#include "costlens/catalog.hpp"
#include "costlens/error.hpp"
#include "costlens/rng.hpp"

#include "doctest.h"

#include <set>

using namespace costlens;

TEST_CASE("builtin catalog layout") {
  const ClassCatalog cat = builtin_cityscapes_catalog();
  CHECK(cat.size() == 19);
  CHECK(cat.aggregates().size() == 6);
  CHECK(cat.aggregate_names() ==
        std::vector<std::string>{"road", "flat", "static", "info", "humans", "dynamic"});
  CHECK(cat.name(0) == "road");
  CHECK(cat.name(18) == "bicycle");
  REQUIRE(cat.sky_index().has_value());
  CHECK(cat.name(*cat.sky_index()) == "sky");
  CHECK(cat.ignore_label() == 255);

  const auto& humans = cat.aggregates()[4];
  CHECK(humans.name == "humans");
  CHECK(std::set<int>(humans.members.begin(), humans.members.end()) ==
        std::set<int>{cat.index_of("person"), cat.index_of("rider")});
  CHECK(aggregate_of(cat, cat.index_of("vegetation")) == "static");
}

TEST_CASE("aggregates partition the non-sky classes") {
  const ClassCatalog cat = builtin_cityscapes_catalog();
  for (int k = 0; k < cat.size(); ++k) {
    int housing = 0;
    for (const auto& a : cat.aggregates())
      housing += static_cast<int>(std::count(a.members.begin(), a.members.end(), k));
    CHECK(housing == (k == *cat.sky_index() ? 0 : 1));
  }
}

TEST_CASE("aggregate_of") {
  const ClassCatalog cat = builtin_cityscapes_catalog();
  CHECK(aggregate_of(cat, cat.index_of("person")) == "humans");
  CHECK(aggregate_of(cat, cat.index_of("sky")) == "sky");
  CHECK(aggregate_of(cat, cat.index_of("terrain")) == "flat");
  CHECK_THROWS_AS(aggregate_of(cat, 99), ValidationError);
  CHECK_THROWS_AS(aggregate_of(cat, -1), ValidationError);
}

TEST_CASE("catalog construction rejects broken partitions") {
  CHECK_THROWS_AS(ClassCatalog({"a", "a"}, {{"g", {0, 1}}}, std::nullopt, 255), ValidationError);
  CHECK_THROWS_AS(ClassCatalog({"a", "b"}, {{"g", {0}}}, std::nullopt, 255), ValidationError);
  CHECK_THROWS_AS(ClassCatalog({"a", "b"}, {{"g", {0, 1}}, {"h", {1}}}, std::nullopt, 255),
                  ValidationError);
  CHECK_THROWS_AS(ClassCatalog({"a", "b"}, {{"g", {0, 1}}, {"h", {}}}, std::nullopt, 255),
                  ValidationError);
  CHECK_THROWS_AS(ClassCatalog({"a", "b", "s"}, {{"g", {0, 1, 2}}}, 2, 255), ValidationError);
  CHECK_NOTHROW(ClassCatalog({"a", "b", "s"}, {{"g", {0, 1}}}, 2, 255));
}

TEST_CASE("class_frequencies") {
  const ClassCatalog cat = builtin_cityscapes_catalog();
  const int road = cat.index_of("road"), person = cat.index_of("person");

  SUBCASE("hand-counted 2x2 map") {
    LabelField f(2, 2);
    f << road, road, person, 255;
    const std::vector<LabelField> maps{f};
    const PriorVector p = class_frequencies(maps, cat);
    CHECK(p[road] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(p[person] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    for (int k = 0; k < cat.size(); ++k)
      if (k != road && k != person) CHECK(p[k] == 0.0);
  }
  SUBCASE("single class") {
    const std::vector<LabelField> maps{LabelField::Constant(3, 4, 7), LabelField::Constant(2, 2, 7)};
    const PriorVector p = class_frequencies(maps, cat);
    CHECK(p[7] == 1.0);
    CHECK(p.values().sum() == 1.0);
  }
  SUBCASE("errors") {
    CHECK_THROWS_WITH_AS(class_frequencies(std::vector<LabelField>{}, cat), "empty dataset",
                         ValidationError);
    const std::vector<LabelField> bad{LabelField::Constant(2, 2, 200)};
    CHECK_THROWS_AS(class_frequencies(bad, cat), ValidationError);
  }
  SUBCASE("random maps sum to one") {
    SplitMix64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
      LabelField f(9, 11);
      for (Eigen::Index i = 0; i < f.size(); ++i) {
        const int v = rng.uniform_int(0, 19);
        f.data()[i] = static_cast<std::uint8_t>(v == 19 ? 255 : v);
      }
      if ((f != 255).count() == 0) continue;
      const std::vector<LabelField> maps{f};
      CHECK(std::abs(class_frequencies(maps, cat).values().sum() - 1.0) <= 1e-9);
    }
  }
}

TEST_CASE("catalog JSON keeps aggregate order") {
  const ClassCatalog cat = builtin_cityscapes_catalog();
  const Json doc = to_json(cat);
  CHECK(doc["classes"].size() == 19);
  CHECK(doc["classes"][11]["name"] == "person");
  CHECK(doc["sky_index"] == 10);
  CHECK(doc["ignore_index"] == 255);
  const ClassCatalog back = catalog_from_json(Json::parse(doc.dump()));
  CHECK(back.class_names() == cat.class_names());
  CHECK(back.aggregate_names() == cat.aggregate_names());
  CHECK(back.aggregates()[2].members == cat.aggregates()[2].members);
}

TEST_CASE("prior vector validation and JSON") {
  CHECK_THROWS_AS(PriorVector(Eigen::Vector2d(0.5, 0.6)), ValidationError);
  CHECK_THROWS_AS(PriorVector(Eigen::Vector2d(-0.1, 1.1)), ValidationError);
  const PriorVector p = priors_from_json(Json::parse(R"({"priors":[0.25,0.75]})"));
  CHECK(p[1] == 0.75);
  CHECK(priors_from_json(Json::parse("[0.5,0.5]"))[0] == 0.5);
  CHECK(priors_from_json(to_json(p)).values() == p.values());
}
