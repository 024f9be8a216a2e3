#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mzr/montecarlo.hpp"
#include "mzr/problems.hpp"

using namespace mzr;

TEST_CASE("rng substreams are deterministic and distinct", "[montecarlo]") {
  SplitMix64 a = SplitMix64::substream(42, 7);
  SplitMix64 b = SplitMix64::substream(42, 7);
  SplitMix64 c = SplitMix64::substream(42, 8);
  REQUIRE(a.next() == b.next());
  REQUIRE(a.next() == b.next());
  REQUIRE(a.next() != c.next());
  SplitMix64 u(1);
  for (int i = 0; i < 1000; ++i) {
    const double x = u.uniform01();
    REQUIRE(x >= 0.0);
    REQUIRE(x < 1.0);
  }
}

TEST_CASE("config validation", "[montecarlo]") {
  McConfig cfg;
  cfg.sample_times = {1.0, 0.5};
  REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.sample_times = {};
  REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.sample_times = {1.0};
  cfg.n_samples = 0;
  REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("identical seeds give bit-identical statistics", "[montecarlo]") {
  McConfig cfg;
  cfg.n_samples = 500;
  cfg.seed = 99;
  cfg.sample_times = {0.0, 0.5, 1.0};
  ProblemSpec spec = ProblemSpec::from_name("ode");
  auto a = mc_stats(spec, cfg);
  auto b = mc_stats(spec, cfg);
  REQUIRE(a.mean == b.mean);
  REQUIRE(a.variance == b.variance);
  REQUIRE(a.stderr_mean == b.stderr_mean);
  REQUIRE(a.stderr_var == b.stderr_var);
  cfg.seed = 100;
  auto c = mc_stats(spec, cfg);
  REQUIRE(a.mean != c.mean);
}

TEST_CASE("deterministic initial data has zero time-zero variance", "[montecarlo]") {
  McConfig cfg;
  cfg.n_samples = 200;
  cfg.sample_times = {0.0};
  auto res = mc_stats(ProblemSpec{ProblemKind::linear_decay, 1, 3.0}, cfg);
  REQUIRE(res.mean[0][0] == 3.0);
  REQUIRE(res.variance[0][0] == 0.0);
}

TEST_CASE("linear decay statistics match the closed form within 4 SE",
          "[montecarlo]") {
  McConfig cfg;
  cfg.n_samples = 20000;
  cfg.seed = 12345;
  cfg.dt = 1e-2;
  cfg.sample_times = {1.0};
  auto res = mc_stats(ProblemSpec::from_name("ode"), cfg);
  auto [mean, var] = exact_linear_stats(1.0, 1.0);
  REQUIRE(std::abs(res.mean[0][0] - mean) <= 4.0 * res.stderr_mean[0][0]);
  REQUIRE(std::abs(res.variance[0][0] - var) <= 4.0 * res.stderr_var[0][0]);
  REQUIRE(res.stderr_mean[0][0] > 0.0);
  REQUIRE(res.stderr_var[0][0] > 0.0);
}

TEST_CASE("standard errors shrink like the square root of the sample count",
          "[montecarlo]") {
  McConfig small, large;
  small.n_samples = 2000;
  large.n_samples = 8000;
  small.seed = large.seed = 7;
  small.sample_times = large.sample_times = {1.0};
  ProblemSpec spec = ProblemSpec::from_name("ode");
  auto a = mc_stats(spec, small);
  auto b = mc_stats(spec, large);
  const double ratio = a.stderr_mean[0][0] / b.stderr_mean[0][0];
  REQUIRE(ratio == Catch::Approx(2.0).epsilon(0.2));
}

TEST_CASE("moment accumulator against direct formulas", "[montecarlo]") {
  detail::MomentAccumulator acc;
  const std::vector<double> xs{0.1, -0.4, 1.7, 2.2, -0.9, 0.3, 0.0, 1.1};
  for (double x : xs) acc.add(x);
  const double n = xs.size();
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double m2 = 0.0, m4 = 0.0;
  for (double x : xs) {
    m2 += (x - mean) * (x - mean);
    m4 += std::pow(x - mean, 4);
  }
  REQUIRE(acc.mean == Catch::Approx(mean).margin(1e-14));
  REQUIRE(acc.variance() == Catch::Approx(m2 / (n - 1)).margin(1e-14));
  REQUIRE(acc.m4 == Catch::Approx(m4).margin(1e-13));
}
