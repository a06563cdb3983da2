#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "rain/grid.hpp"
#include "rain/rng.hpp"
#include "rain/scenarios.hpp"

using namespace rain;
using estimation::OccupancyGrid;

namespace {

OccupancyGrid uniform_grid() {
  return OccupancyGrid::uniform(20, 20, 0.5, {0.0, 0.0});
}

}  // namespace

TEST_CASE("axis-aligned ray visits cells in order") {
  const auto g = uniform_grid();
  const auto cells = estimation::ray_trace(g, {0.25, 0.25}, 0.0, 1.2);
  REQUIRE(cells.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(cells[i].r == 0);
    CHECK(cells[i].c == i);
  }
  CHECK(cells[0].entry == doctest::Approx(0.0));
  CHECK(cells[1].entry == doctest::Approx(0.25));
  CHECK(cells[2].entry == doctest::Approx(0.75));
}

TEST_CASE("zero-length ray returns only the origin cell") {
  const auto g = uniform_grid();
  const auto cells = estimation::ray_trace(g, {3.3, 4.4}, 1.0, 0.0);
  REQUIRE(cells.size() == 1);
  CHECK(cells[0].c == 6);
  CHECK(cells[0].r == 8);
}

TEST_CASE("ray origin outside the grid is rejected") {
  const auto g = uniform_grid();
  CHECK_THROWS_AS(estimation::ray_trace(g, {-1.0, 0.0}, 0.0, 1.0), Error);
}

TEST_CASE("ray cells match a dense sampling of the segment") {
  const auto g = uniform_grid();
  Rng rng(53, "ray");
  for (int rep = 0; rep < 50; ++rep) {
    const Eigen::Vector2d from(rng.uniform(0.3, 9.7), rng.uniform(0.3, 9.7));
    const double heading = rng.uniform(-M_PI, M_PI);
    const double range = rng.uniform(0.1, 4.0);
    const auto cells = estimation::ray_trace(g, from, heading, range);

    std::vector<std::pair<int, int>> sampled;
    for (int i = 0; i <= 1000; ++i) {
      const double t = range * i / 1000.0;
      const double x = from.x() + t * std::cos(heading);
      const double y = from.y() + t * std::sin(heading);
      if (!g.contains(x, y)) break;
      const int c = static_cast<int>(x / g.resolution);
      const int r = static_cast<int>(y / g.resolution);
      if (sampled.empty() || sampled.back() != std::make_pair(r, c)) {
        sampled.emplace_back(r, c);
      }
    }
    // The traced list must contain the sampled cells as a subsequence (the
    // sampling can skip corner-clipped cells).
    size_t k = 0;
    for (const auto& rc : sampled) {
      while (k < cells.size() && std::make_pair(cells[k].r, cells[k].c) != rc) ++k;
      if (k == cells.size()) break;
    }
    CHECK(k < cells.size());
  }
}

TEST_CASE("max-range beam frees traversed cells without occupying any") {
  auto g = uniform_grid();
  world::BeamSensorConfig cfg{1, 0.0, 2.0, 0.01};
  const auto out = estimation::grid_update(g, {0.25, 0.25, 0, 0}, {2.0}, cfg);
  int freed = 0, occupied = 0;
  for (int r = 0; r < g.rows; ++r) {
    for (int c = 0; c < g.cols; ++c) {
      if (out.at(r, c) < 0) ++freed;
      if (out.at(r, c) > 0) ++occupied;
    }
  }
  CHECK(freed >= 3);
  CHECK(occupied == 0);
}

TEST_CASE("repeated hits drive occupancy towards one") {
  auto g = uniform_grid();
  world::BeamSensorConfig cfg{1, 0.0, 2.0, 0.01};
  double last = 0.5;
  for (int i = 0; i < 30; ++i) {
    g = estimation::grid_update(g, {0.25, 0.25, 0, 0}, {1.1}, cfg);
    const int c = static_cast<int>((0.25 + 1.1) / g.resolution);
    const double p = g.prob(0, c);
    CHECK(p >= last - 1e-12);
    last = p;
  }
  CHECK(last > 0.99);
  // Log odds stay clamped.
  for (double l : g.log_odds) {
    CHECK(l <= 10.0);
    CHECK(l >= -10.0);
  }
}

TEST_CASE("untouched cells keep their probability") {
  auto g = uniform_grid();
  world::BeamSensorConfig cfg{1, 0.0, 2.0, 0.01};
  const auto out = estimation::grid_update(g, {0.25, 0.25, 0, 0}, {1.0}, cfg);
  CHECK(out.prob(19, 19) == doctest::Approx(0.5));
}

TEST_CASE("non-overlapping beams commute") {
  auto g = uniform_grid();
  world::BeamSensorConfig cfg{1, 0.0, 1.5, 0.01};
  world::RobotState east{5.0, 5.0, 0.0, 0};
  world::RobotState north{5.0, 5.0, M_PI / 2, 0};
  const auto ab = estimation::grid_update(estimation::grid_update(g, east, {1.0}, cfg),
                                          north, {1.0}, cfg);
  const auto ba = estimation::grid_update(estimation::grid_update(g, north, {1.0}, cfg),
                                          east, {1.0}, cfg);
  CHECK(ab.log_odds == ba.log_odds);
}

TEST_CASE("grid entropy of a uniform grid is cells times ln 2") {
  auto g = OccupancyGrid::uniform(10, 10, 0.5, {0, 0});
  CHECK(estimation::grid_entropy(g) == doctest::Approx(100.0 * std::log(2.0)));
}

TEST_CASE("csqmi is near zero on a fully known grid") {
  auto g = uniform_grid();
  for (size_t i = 0; i < g.log_odds.size(); ++i) {
    const double p = (i % 7 == 0) ? 0.999 : 0.001;
    g.log_odds[i] = std::log(p / (1 - p));
  }
  world::BeamSensorConfig cfg{16, 0.0, 1.5, 0.01};
  const double v = estimation::csqmi(g, {{5.0, 5.0, 0.3, 0}}, cfg);
  CHECK(v >= 0.0);
  CHECK(v <= 1e-3);
}

TEST_CASE("csqmi of an empty pose list is zero") {
  const auto g = uniform_grid();
  world::BeamSensorConfig cfg{16, 0.0, 1.5, 0.01};
  CHECK(estimation::csqmi(g, {}, cfg) == 0.0);
}

TEST_CASE("a duplicated pose adds nothing after pruning") {
  const auto g = uniform_grid();
  world::BeamSensorConfig cfg{16, 0.0, 1.5, 0.01};
  const world::RobotState pose{5.0, 5.0, 0.7, 0};
  const double one = estimation::csqmi(g, {pose}, cfg);
  const double two = estimation::csqmi(g, {pose, pose}, cfg);
  CHECK(one > 0.0);
  CHECK(two <= one * 1.05);
  CHECK(two >= one * 0.95);
}

TEST_CASE("csqmi accumulation never decreases as poses are added") {
  const auto g = uniform_grid();
  world::BeamSensorConfig cfg{12, 0.0, 1.5, 0.01};
  Rng rng(59, "csqmi");
  std::vector<world::RobotState> poses;
  double prev = 0.0;
  for (int i = 0; i < 8; ++i) {
    poses.push_back({rng.uniform(1, 9), rng.uniform(1, 9), rng.uniform(-M_PI, M_PI), 0});
    const double v = estimation::csqmi(g, poses, cfg);
    CHECK(v >= prev - 1e-12);
    prev = v;
  }
}

TEST_CASE("pose outside the grid is rejected") {
  const auto g = uniform_grid();
  world::BeamSensorConfig cfg{4, 0.0, 1.5, 0.01};
  CHECK_THROWS_AS(estimation::csqmi(g, {{100.0, 0.0, 0, 0}}, cfg), Error);
  CHECK_THROWS_AS(estimation::grid_update(g, {100.0, 0.0, 0, 0}, {1.0}, cfg), Error);
}

TEST_CASE("pgm round trip preserves the grid") {
  const auto g = scenarios::make_squares_map();
  const std::string path = "/tmp/rain_test_map.pgm";
  estimation::write_pgm(g, path);
  const auto back = estimation::read_pgm(path);
  REQUIRE(back.rows == g.rows);
  REQUIRE(back.cols == g.cols);
  CHECK(back.resolution == doctest::Approx(g.resolution));
  int mismatches = 0;
  for (int r = 0; r < g.rows; ++r) {
    for (int c = 0; c < g.cols; ++c) {
      if ((back.prob(r, c) > 0.5) != (g.prob(r, c) > 0.5)) ++mismatches;
    }
  }
  CHECK(mismatches == 0);
  std::filesystem::remove(path);
  std::filesystem::remove(path + ".meta");
}

TEST_CASE("csqmi objective helpers agree with each other") {
  estimation::RolloutSetup setup;
  setup.robot_states = {{2, 2, 0, 0}, {6, 6, 0, 1.0}, {4, 7, 0, -1.0}};
  setup.control_set = {{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}};
  setup.tau = 1.0;
  setup.t_plan = 2;
  auto grid = OccupancyGrid::uniform(20, 20, 0.5, {0, 0});
  setup.clamp_box = Eigen::AlignedBox2d(Eigen::Vector2d(0.5, 0.5), Eigen::Vector2d(9.5, 9.5));
  world::BeamSensorConfig cfg{8, 0.0, 1.5, 0.01};
  estimation::CsqmiObjective objective(setup, grid, cfg);

  planning::IndexPlans plans{{1, 2}, {2, 1}, {0, 1}};
  // bind_single and best_single agree with value() bit for bit.
  auto eval = objective.bind_single(plans, 0b001, 1);
  CHECK(eval(plans[1]) == objective.value(plans, 0b011));

  planning::IndexSeq best;
  double best_value = 0.0;
  REQUIRE(objective.best_single(plans, 0b001, 1, best, best_value));
  double exhaustive = -1.0;
  planning::IndexSeq exhaustive_seq;
  for (const auto& seq : planning::enumerate_sequences(2, 3)) {
    planning::IndexPlans p = plans;
    p[1] = seq;
    const double v = objective.value(p, 0b011);
    if (v > exhaustive) {
      exhaustive = v;
      exhaustive_seq = seq;
    }
  }
  CHECK(best_value == exhaustive);
  CHECK(best == exhaustive_seq);
}
