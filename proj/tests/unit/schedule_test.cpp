#include <gtest/gtest.h>

#include <cmath>

#include "xtalgen/io/toml_lite.hpp"
#include "xtalgen/sampling/schedule.hpp"

using namespace xtalgen;

TEST(Schedule, CoordinateDefaults) {
  auto s = make_geometric_sequence(10.0, 0.01, 50);
  ASSERT_EQ(s.size(), 50u);
  EXPECT_EQ(s.front(), 10.0);
  EXPECT_EQ(s.back(), 0.01);
  EXPECT_NEAR(s[24] / s[25], std::pow(1000.0, 1.0 / 49.0), 1e-12);
}

TEST(Schedule, TypeDefaults) {
  auto sched = NoiseSchedule::standard();
  EXPECT_EQ(sched.sigma_a(0), 5.0);
  EXPECT_EQ(sched.sigma_a(49), 0.01);
  EXPECT_EQ(sched.sigma_x(0), 10.0);
  EXPECT_EQ(sched.sigma_x(49), 0.01);
}

TEST(Schedule, RatioTwo) {
  auto s = make_geometric_sequence(4.0, 1.0, 3);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0], 4.0);
  EXPECT_NEAR(s[1], 2.0, 1e-15);
  EXPECT_EQ(s[2], 1.0);
}

TEST(Schedule, GeometricAndDescending) {
  for (auto [hi, lo, n] : {std::tuple{10.0, 0.01, 50}, {5.0, 0.01, 50}, {3.0, 0.2, 7}, {1.0, 0.5, 2}}) {
    auto s = make_geometric_sequence(hi, lo, n);
    const double r0 = s[0] / s[1];
    for (std::size_t j = 0; j + 1 < s.size(); ++j) {
      EXPECT_GT(s[j], s[j + 1]);
      EXPECT_NEAR(s[j] / s[j + 1], r0, 1e-9);
    }
    EXPECT_GT(s.back(), 0.0);
  }
}

TEST(Schedule, RejectsInvalid) {
  EXPECT_THROW(make_geometric_sequence(0.01, 10.0, 50), Error);
  EXPECT_THROW(make_geometric_sequence(1.0, 1.0, 5), Error);
  EXPECT_THROW(make_geometric_sequence(1.0, 0.0, 5), Error);
  EXPECT_THROW(make_geometric_sequence(1.0, 0.1, 1), Error);
  EXPECT_THROW(NoiseSchedule({1.0, 0.1, 5}, {1.0, 0.1, 6}), Error);
}

TEST(Schedule, StepSizeNonIncreasing) {
  auto sched = NoiseSchedule::standard();
  EXPECT_NEAR(sched.step_size(49, 1e-4), 1e-4, 1e-18);
  EXPECT_NEAR(sched.step_size(0, 1e-4), 100.0, 1e-9);
  for (std::size_t j = 0; j + 1 < sched.size(); ++j)
    EXPECT_GE(sched.step_size(j, 1e-4), sched.step_size(j + 1, 1e-4));
}

TEST(Schedule, TextRoundTrip) {
  NoiseSchedule s({7.5, 0.02, 12}, {3.0, 0.05, 12});
  auto back = schedule_from_text(schedule_to_text(s));
  EXPECT_EQ(back.sigma_x(), s.sigma_x());
  EXPECT_EQ(back.sigma_a(), s.sigma_a());
}

TEST(Schedule, TextErrors) {
  EXPECT_THROW(schedule_from_text("[coords]\nsigma_max = 1.0\nsigma_min = 0.1\nlevels = 3\n"), Error);
  EXPECT_THROW(schedule_from_text("[coords]\nsigma_max = 1.0\nsigma_min = 0.1\nlevels = 3.5\n"
                                  "[types]\nsigma_max = 1.0\nsigma_min = 0.1\nlevels = 3\n"),
               Error);
}

TEST(TomlLite, ParsesScalarsAndSections) {
  auto j = toml_lite::parse(R"(
# comment
name = "demo \"run\""   # trailing comment
seed = 42
eps = 1e-4
flag = true
list = [1, 2.5, "x"]
[sampler.schedule]
levels = 50
)");
  EXPECT_EQ(j["name"], "demo \"run\"");
  EXPECT_EQ(j["seed"].get<long long>(), 42);
  EXPECT_TRUE(j["seed"].is_number_integer());
  EXPECT_DOUBLE_EQ(j["eps"].get<double>(), 1e-4);
  EXPECT_EQ(j["flag"], true);
  ASSERT_EQ(j["list"].size(), 3u);
  EXPECT_EQ(j["list"][2], "x");
  EXPECT_EQ(j["sampler"]["schedule"]["levels"].get<int>(), 50);
}

TEST(TomlLite, ErrorsCarryLineNumbers) {
  try {
    toml_lite::parse("a = 1\nb = \n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  EXPECT_THROW(toml_lite::parse("a = 1\na = 2\n"), Error);
  EXPECT_THROW(toml_lite::parse("[open\n"), Error);
  EXPECT_THROW(toml_lite::parse("x = 1.2.3\n"), Error);
  EXPECT_THROW(toml_lite::parse("s = \"unterminated\n"), Error);
  EXPECT_THROW(toml_lite::parse("just text\n"), Error);
}
