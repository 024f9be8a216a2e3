#include <catch2/catch_amalgamated.hpp>

#include "mzr/config.hpp"

using namespace mzr;

TEST_CASE("minimal document takes documented defaults", "[config]") {
  auto cfg = parse_config("{problem=\"ode\"}");
  REQUIRE(cfg.problem == "ode");
  REQUIRE(cfg.mode == RunMode::adaptive);
  REQUIRE(cfg.p_r == 3);
  REQUIRE(cfg.p_f == 7);
  REQUIRE(cfg.tol1 == 1e-2);
  REQUIRE(cfg.tol2 == 0.1);
  REQUIRE(cfg.dt == 1e-2);
  REQUIRE(cfg.t_end == 10.0);
}

TEST_CASE("problem-dependent defaults", "[config]") {
  auto ko1 = parse_config("problem = ko1d\n");
  REQUIRE(ko1.dt == 1e-3);
  REQUIRE(ko1.t_end == 30.0);
  auto ko2 = parse_config("problem = ko2d\n");
  REQUIRE(ko2.t_end == 10.0);
  auto ko3 = parse_config("problem = ko3d\n");
  REQUIRE(ko3.t_end == 6.0);
  // explicit values win over defaults
  auto custom = parse_config("problem = ko1d\ndt = 0.5\nt_end = 2\n");
  REQUIRE(custom.dt == 0.5);
  REQUIRE(custom.t_end == 2.0);
}

TEST_CASE("comments, blank lines and quoting", "[config]") {
  auto cfg = parse_config(
      "# leading comment\n"
      "problem = 'ko2d'   # trailing comment\n"
      "\n"
      "tol1 = 1e-3\n"
      "out_dir = \"results/run1\"\n");
  REQUIRE(cfg.problem == "ko2d");
  REQUIRE(cfg.tol1 == 1e-3);
  REQUIRE(cfg.out_dir == "results/run1");
}

TEST_CASE("unknown keys are hard errors naming key and line", "[config]") {
  try {
    parse_config("problem = ode\ntol_one = 1\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    REQUIRE(msg.find("tol_one") != std::string::npos);
    REQUIRE(msg.find("line 2") != std::string::npos);
  }
}

TEST_CASE("type and constraint violations name the key", "[config]") {
  REQUIRE_THROWS_AS(parse_config("tol1 = -1\n"), ConfigError);
  REQUIRE_THROWS_AS(parse_config("tol1 = banana\n"), ConfigError);
  REQUIRE_THROWS_AS(parse_config("p_r = 2.5\n"), ConfigError);
  REQUIRE_THROWS_AS(parse_config("tol2 = 1.5\n"), ConfigError);
  REQUIRE_THROWS_AS(parse_config("dt = 0\n"), ConfigError);
  REQUIRE_THROWS_AS(parse_config("mode = warp\n"), ConfigError);
  REQUIRE_THROWS_AS(parse_config("indicator_mode = other\n"), ConfigError);
  try {
    parse_config("tol1 = -1\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    REQUIRE(std::string(e.what()).find("tol1") != std::string::npos);
  }
}

TEST_CASE("duplicate keys are rejected", "[config]") {
  REQUIRE_THROWS_AS(parse_config("dt = 0.1\ndt = 0.2\n"), ConfigError);
}

TEST_CASE("serialize then parse is the identity", "[config]") {
  auto cfg = parse_config(
      "problem = ko2d\nmode = mc\np_r = 2\np_f = 5\ntol1 = 3e-4\n"
      "tol2 = 0.25\ndt = 0.002\nt_end = 7.5\nsample_dt = 0.05\n"
      "indicator_mode = dual-evolution\nmemory_time_mode = element-local\n"
      "refine_stride = 4\nmax_elements = 500\nseed = 98765\n"
      "mc_samples = 4321\nmc_dt = 0.004\nu0 = 1.75\nout_dir = o\nthreads = 2\n");
  auto back = parse_config(serialize_config(cfg));
  REQUIRE(back.problem == cfg.problem);
  REQUIRE(back.mode == cfg.mode);
  REQUIRE(back.p_r == cfg.p_r);
  REQUIRE(back.p_f == cfg.p_f);
  REQUIRE(back.tol1 == cfg.tol1);
  REQUIRE(back.tol2 == cfg.tol2);
  REQUIRE(back.dt == cfg.dt);
  REQUIRE(back.t_end == cfg.t_end);
  REQUIRE(back.sample_dt == cfg.sample_dt);
  REQUIRE(back.indicator_mode == cfg.indicator_mode);
  REQUIRE(back.memory_time_mode == cfg.memory_time_mode);
  REQUIRE(back.refine_stride == cfg.refine_stride);
  REQUIRE(back.max_elements == cfg.max_elements);
  REQUIRE(back.seed == cfg.seed);
  REQUIRE(back.mc_samples == cfg.mc_samples);
  REQUIRE(back.mc_dt == cfg.mc_dt);
  REQUIRE(back.u0 == cfg.u0);
  REQUIRE(back.out_dir == cfg.out_dir);
  REQUIRE(back.threads == cfg.threads);
}

TEST_CASE("unknown problem name fails at parse time", "[config]") {
  REQUIRE_THROWS(parse_config("problem = heat\n"));
}
