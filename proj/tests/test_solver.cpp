#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "mzr/problems.hpp"
#include "mzr/solver.hpp"

using namespace mzr;

TEST_CASE("rk4 single step on exponential decay", "[solver]") {
  std::vector<double> y{1.0};
  auto rhs = [](const std::vector<double>& u, double, std::vector<double>& du) {
    du[0] = -u[0];
  };
  rk4_step(rhs, y, 0.0, 0.1);
  REQUIRE(y[0] == Catch::Approx(0.9048375).margin(1e-15));
}

TEST_CASE("rk4 fourth-order convergence", "[solver]") {
  auto rhs = [](const std::vector<double>& u, double, std::vector<double>& du) {
    du[0] = -u[0];
  };
  auto err_at = [&](double dt) {
    std::vector<double> y{1.0};
    const int n = static_cast<int>(std::llround(1.0 / dt));
    for (int i = 0; i < n; ++i) rk4_step(rhs, y, i * dt, dt);
    return std::abs(y[0] - std::exp(-1.0));
  };
  const double e1 = err_at(0.1);
  const double e2 = err_at(0.05);
  REQUIRE(e1 / e2 == Catch::Approx(16.0).epsilon(0.15));
}

TEST_CASE("config validation", "[solver]") {
  RefinementConfig cfg;
  cfg.tol1 = -1.0;
  REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = RefinementConfig{};
  cfg.p_r = cfg.p_f = 3;  // refining needs p_r < p_f
  REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.tol1 = std::numeric_limits<double>::infinity();
  REQUIRE_NOTHROW(cfg.validate());
  cfg = RefinementConfig{};
  cfg.tol2 = 1.5;
  REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("global gPC resolves the linear decay problem at short times",
          "[solver]") {
  auto traj = run_global_gpc(ProblemSpec::from_name("ode"), 7, 1.0, 1e-2);
  REQUIRE(traj.final_mesh.elements.size() == 1);
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    auto [m, v] = exact_linear_stats(1.0, traj.times[i]);
    REQUIRE(traj.mean[0][i] == Catch::Approx(m).margin(1e-9));
    REQUIRE(traj.variance[0][i] == Catch::Approx(v).margin(1e-7));
  }
}

TEST_CASE("huge threshold never refines", "[solver]") {
  RefinementConfig cfg;
  cfg.tol1 = 1e9;
  cfg.t_end = 2.0;
  auto traj = run_adaptive(ProblemSpec::from_name("ode"), cfg);
  REQUIRE(traj.final_mesh.elements.size() == 1);
  REQUIRE(traj.final_mesh.log.empty());
  for (int n : traj.n_elements) REQUIRE(n == 1);
}

TEST_CASE("adaptive run bookkeeping invariants", "[solver]") {
  RefinementConfig cfg;
  cfg.tol1 = 1e-2;
  cfg.t_end = 4.0;
  auto traj = run_adaptive(ProblemSpec::from_name("ode"), cfg);
  REQUIRE(traj.times.front() == 0.0);
  REQUIRE(traj.times.back() == Catch::Approx(4.0).margin(1e-12));
  REQUIRE(traj.times.size() == traj.mean[0].size());
  REQUIRE(traj.times.size() == traj.n_elements.size());
  // element counts never decrease
  for (std::size_t i = 1; i < traj.n_elements.size(); ++i)
    REQUIRE(traj.n_elements[i] >= traj.n_elements[i - 1]);
  REQUIRE(traj.n_elements.back() > 1);
  REQUIRE(traj.final_mesh.total_probability() == Catch::Approx(1.0).margin(1e-12));
  // every logged split names live children
  for (const auto& ev : traj.final_mesh.log)
    if (!ev.degenerate) REQUIRE_FALSE(ev.children.empty());
}

TEST_CASE("dual-evolution indicator mode runs and refines", "[solver]") {
  RefinementConfig cfg;
  cfg.tol1 = 1e-2;
  cfg.t_end = 3.0;
  cfg.indicator_mode = IndicatorMode::dual_evolution;
  auto traj = run_adaptive(ProblemSpec::from_name("ode"), cfg);
  REQUIRE(traj.final_mesh.elements.size() > 1);
  for (const auto& e : traj.final_mesh.elements)
    REQUIRE(e.reduced.supported_on(
        MultiIndexSet(1, cfg.p_f, cfg.p_r).resolved_size()));
}

TEST_CASE("element-local memory time mode runs", "[solver]") {
  RefinementConfig cfg;
  cfg.tol1 = 1e-2;
  cfg.t_end = 2.0;
  cfg.memory_time_mode = MemoryTimeMode::element_local;
  auto traj = run_adaptive(ProblemSpec::from_name("ode"), cfg);
  REQUIRE(traj.final_mesh.total_probability() == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("worker threads do not change the result", "[solver]") {
  RefinementConfig a;
  a.tol1 = 1e-2;
  a.t_end = 2.0;
  RefinementConfig b = a;
  b.threads = 4;
  auto ta = run_adaptive(ProblemSpec::from_name("ode"), a);
  auto tb = run_adaptive(ProblemSpec::from_name("ode"), b);
  REQUIRE(ta.mean[0] == tb.mean[0]);
  REQUIRE(ta.variance[0] == tb.variance[0]);
  REQUIRE(ta.n_elements == tb.n_elements);
}

TEST_CASE("runaway refinement is reported, not looped", "[solver]") {
  RefinementConfig cfg;
  cfg.tol1 = 1e-12;
  cfg.t_end = 2.0;
  cfg.max_elements = 8;
  REQUIRE_THROWS_AS(run_adaptive(ProblemSpec::from_name("ode"), cfg),
                    std::runtime_error);
}
