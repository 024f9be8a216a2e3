#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mzr/io.hpp"
#include "mzr/rng.hpp"

using namespace mzr;

TEST_CASE("shortest round-trip double formatting", "[io]") {
  for (double v : {0.0, 1.0, -0.5, 0.1, 1e-12, 3.141592653589793, 1.0 / 3.0,
                   -2.2250738585072014e-308}) {
    REQUIRE(std::stod(format_double(v)) == v);
  }
  REQUIRE(format_double(0.1) == "0.1");
  REQUIRE(format_double(2.0) == "2");
}

TEST_CASE("trajectory CSV layout", "[io]") {
  Trajectory traj;
  traj.times = {0.0, 0.5};
  traj.mean = {{1.0, 0.9}, {0.0, 0.1}};
  traj.variance = {{0.0, 0.25}, {0.0, 0.01}};
  traj.n_elements = {1, 2};
  const std::string csv = trajectory_csv(traj);
  REQUIRE(csv ==
          "t,mean_1,mean_2,var_1,var_2,n_elements\n"
          "0,1,0,0,0,1\n"
          "0.5,0.9,0.1,0.25,0.01,2\n");
}

TEST_CASE("mc CSV layout", "[io]") {
  McResult res;
  res.times = {1.0};
  res.mean = {{2.0}};
  res.variance = {{0.5}};
  res.stderr_mean = {{0.01}};
  res.stderr_var = {{0.02}};
  const std::string csv = mc_csv(res);
  REQUIRE(csv ==
          "t,mean_1,var_1,stderr_mean_1,stderr_var_1\n"
          "1,2,0.5,0.01,0.02\n");
}

TEST_CASE("mesh snapshot round-trips bit exactly", "[io]") {
  SplitMix64 rng(77);
  Mesh mesh;
  mesh.dimension = 2;
  for (int id = 0; id < 3; ++id) {
    Element e;
    e.id = id;
    e.lo = {-1.0 + 0.25 * id, -1.0};
    e.hi = {-0.75 + 0.25 * id, 1.0};
    e.probability = Element::measure_probability(e.lo, e.hi);
    e.birth_time = 0.1 * id;
    e.state = GalerkinState(2, 6);
    for (auto& x : e.state.c) x = rng.uniform_sym();
    mesh.elements.push_back(std::move(e));
  }
  mesh.next_id = 3;
  RefineEvent ev;
  ev.time = 0.2;
  ev.parent = 0;
  ev.dims = {0};
  ev.children = {1, 2};
  mesh.log.push_back(ev);

  auto doc = snapshot_to_json(mesh, 0.3);
  Mesh back = snapshot_from_json(doc);
  auto doc2 = snapshot_to_json(back, 0.3);
  REQUIRE(doc.dump() == doc2.dump());

  REQUIRE(back.dimension == 2);
  REQUIRE(back.next_id == 3);
  REQUIRE(back.elements.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    REQUIRE(back.elements[i].state.c == mesh.elements[i].state.c);
    REQUIRE(back.elements[i].probability == mesh.elements[i].probability);
    REQUIRE(back.elements[i].birth_time == mesh.elements[i].birth_time);
  }
  REQUIRE(back.log.size() == 1);
  REQUIRE(back.log[0].children == std::vector<int>{1, 2});
}

TEST_CASE("file round trip", "[io]") {
  const std::string path = "io_roundtrip.tmp";
  write_file(path, "a,b\n1,2\n");
  REQUIRE(read_file(path) == "a,b\n1,2\n");
  REQUIRE_THROWS_AS(read_file("does/not/exist.csv"), std::runtime_error);
  std::remove(path.c_str());
}
