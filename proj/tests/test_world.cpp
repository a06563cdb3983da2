#include <doctest.h>

#include <cmath>

#include "rain/rng.hpp"
#include "rain/world.hpp"

using namespace rain;
using world::ControlInput;
using world::RobotState;

namespace {

// Independent oracle: fine-step Euler integration of the continuous
// unicycle ODE.
RobotState euler_unicycle(const RobotState& s, const ControlInput& u, double tau, int steps) {
  RobotState out = s;
  const double h = tau / steps;
  for (int i = 0; i < steps; ++i) {
    out.x += h * u.v * std::cos(out.theta);
    out.y += h * u.v * std::sin(out.theta);
    out.theta += h * u.omega;
  }
  out.theta = world::wrap_angle(out.theta);
  return out;
}

}  // namespace

TEST_CASE("unicycle straight-line motion") {
  const auto s = world::unicycle_step({0, 0, 0, 0}, {1.0, 0.0}, 0.5);
  CHECK(s.x == doctest::Approx(0.5));
  CHECK(s.y == doctest::Approx(0.0));
  CHECK(s.theta == doctest::Approx(0.0));
}

TEST_CASE("unicycle pure rotation") {
  const auto s = world::unicycle_step({0, 0, 0, 0}, {0.0, 1.0}, 0.5);
  CHECK(s.x == doctest::Approx(0.0));
  CHECK(s.y == doctest::Approx(0.0));
  CHECK(s.theta == doctest::Approx(0.5));
}

TEST_CASE("unicycle arc matches fine-step integration") {
  RobotState s0{1, 2, 0, M_PI / 2};
  const auto fine = euler_unicycle(s0, {2.0, 2.0}, 0.5, 10000);
  const auto s = world::unicycle_step(s0, {2.0, 2.0}, 0.5);
  CHECK(std::abs(s.x - fine.x) <= 1e-3);
  CHECK(std::abs(s.y - fine.y) <= 1e-3);
  CHECK(std::abs(s.theta - fine.theta) <= 1e-3);
}

TEST_CASE("unicycle is continuous as omega approaches zero") {
  RobotState s0{3, -1, 0, 0.7};
  const auto a = world::unicycle_step(s0, {2.0, 1e-9}, 0.5);
  const auto b = world::unicycle_step(s0, {2.0, 0.0}, 0.5);
  CHECK(std::abs(a.x - b.x) <= 1e-6);
  CHECK(std::abs(a.y - b.y) <= 1e-6);
}

TEST_CASE("heading stays in (-pi, pi]") {
  Rng rng(3, "world");
  RobotState s{0, 0, 0, 0};
  for (int i = 0; i < 200; ++i) {
    s = world::unicycle_step(s, {1.0, rng.uniform(-4.0, 4.0)}, 0.9);
    CHECK(s.theta > -M_PI);
    CHECK(s.theta <= M_PI);
  }
  CHECK(world::wrap_angle(-M_PI) == doctest::Approx(M_PI));
  CHECK(world::wrap_angle(3 * M_PI) == doctest::Approx(M_PI));
}

TEST_CASE("3d unicycle keeps altitude and matches the planar step") {
  const auto s = world::unicycle3d_step({0, 0, 5, 0}, {1.0, 0.0}, 1.0);
  CHECK(s.x == doctest::Approx(1.0));
  CHECK(s.z == doctest::Approx(5.0));

  Rng rng(5, "world3d");
  for (int i = 0; i < 20; ++i) {
    RobotState s0{rng.uniform(-5, 5), rng.uniform(-5, 5), 7.0, rng.uniform(-3, 3)};
    ControlInput u{rng.uniform(0.5, 3.0), rng.uniform(-2, 2)};
    const auto a = world::unicycle3d_step(s0, u, 0.7);
    const auto b = world::unicycle_step(s0, u, 0.7);
    CHECK(a.x == b.x);
    CHECK(a.y == b.y);
    CHECK(a.theta == b.theta);
    CHECK(a.z == 7.0);
  }
}

TEST_CASE("double integrator blocks") {
  const auto m = world::double_integrator_model(0.5, 0.001);
  CHECK(m.F(0, 2) == doctest::Approx(0.5));
  CHECK(m.W(0, 0) == doctest::Approx(0.001 * 0.125 / 3.0));
  CHECK((m.W - m.W.transpose()).norm() == doctest::Approx(0.0));
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(m.W);
  CHECK(es.eigenvalues().minCoeff() >= -1e-12);

  const auto z = world::double_integrator_model(0.5, 0.0);
  CHECK(z.W.norm() == doctest::Approx(0.0));
}

TEST_CASE("landmark noise grows linearly") {
  CHECK(world::landmark_noise(0, 0.01).norm() == doctest::Approx(0.0));
  CHECK(world::landmark_noise(7, 0.01)(1, 1) == doctest::Approx(0.07));
  CHECK((world::landmark_noise(10, 0.02) - 2.0 * world::landmark_noise(5, 0.02)).norm() ==
        doctest::Approx(0.0));
}

TEST_CASE("range-bearing observation of a 3-4-5 target") {
  world::SensorConfig cfg{10.0, M_PI, 0.15, 0.087};
  const auto rb = world::range_bearing_observe({0, 0, 0, 0}, {3, 4}, cfg);
  REQUIRE(rb.has_value());
  CHECK(rb->h(0) == doctest::Approx(5.0));
  CHECK(rb->h(1) == doctest::Approx(std::atan2(4.0, 3.0)));
}

TEST_CASE("range-bearing gating") {
  world::SensorConfig cfg{10.0, M_PI / 2, 0.15, 0.087};
  CHECK_FALSE(world::range_bearing_observe({0, 0, 0, 0}, {11, 0}, cfg).has_value());
  // Inside range but outside the field of view.
  CHECK_FALSE(world::range_bearing_observe({0, 0, 0, 0}, {0, 5}, cfg).has_value());
  CHECK(world::range_bearing_observe({0, 0, 0, 0}, {5, 0}, cfg).has_value());
  CHECK_THROWS_AS(world::range_bearing_observe({0, 0, 0, 0}, {0, 0}, cfg), Error);
}

TEST_CASE("range-bearing jacobian matches central finite differences") {
  world::SensorConfig cfg{100.0, 2 * M_PI, 0.15, 0.087};
  Rng rng(17, "jacobian");
  const double step = 1e-6;
  for (int i = 0; i < 100; ++i) {
    world::RobotState s{rng.uniform(-10, 10), rng.uniform(-10, 10), 0, rng.uniform(-3, 3)};
    Eigen::Vector2d y{s.x + rng.uniform(-8, 8), s.y + rng.uniform(-8, 8)};
    if ((y - Eigen::Vector2d(s.x, s.y)).norm() < 0.5) continue;
    const auto rb = world::range_bearing_observe(s, y, cfg);
    REQUIRE(rb.has_value());
    for (int d = 0; d < 2; ++d) {
      Eigen::Vector2d hi = y, lo = y;
      hi(d) += step;
      lo(d) -= step;
      const auto oh = world::range_bearing_observe(s, hi, cfg);
      const auto ol = world::range_bearing_observe(s, lo, cfg);
      REQUIRE(oh.has_value());
      REQUIRE(ol.has_value());
      const double dr = (oh->h(0) - ol->h(0)) / (2 * step);
      const double db = world::wrap_angle(oh->h(1) - ol->h(1)) / (2 * step);
      CHECK(std::abs(rb->H(0, d) - dr) <= 1e-5);
      CHECK(std::abs(rb->H(1, d) - db) <= 1e-5);
    }
    // Velocity columns are zero.
    CHECK(rb->H(0, 2) == 0.0);
    CHECK(rb->H(1, 3) == 0.0);
  }
}

TEST_CASE("measurement variance grows with range and stays positive") {
  world::SensorConfig cfg{10.0, 2 * M_PI, 0.15, 0.087};
  const auto near = world::range_bearing_observe({0, 0, 0, 0}, {1, 0}, cfg);
  const auto far = world::range_bearing_observe({0, 0, 0, 0}, {9, 0}, cfg);
  REQUIRE(near.has_value());
  REQUIRE(far.has_value());
  CHECK(near->V(0, 0) < far->V(0, 0));
  CHECK(far->V(0, 0) <= cfg.sigma_r * cfg.sigma_r + 1e-12);
  CHECK(near->V(0, 0) >= 1e-6);
  CHECK(near->V(1, 1) >= 1e-6);
}

TEST_CASE("beam likelihood branches and normalization") {
  world::BeamSensorConfig cfg{16, 0.2, 1.5, 0.01};
  const double peak = 1.0 / (cfg.sigma * std::sqrt(2.0 * M_PI));
  CHECK(world::beam_likelihood(1.0, 1.0, cfg) == doctest::Approx(peak));
  CHECK(world::beam_likelihood(2.5, 1.5, cfg) == doctest::Approx(peak));
  CHECK(world::beam_likelihood(0.1, 0.0, cfg) == doctest::Approx(peak));

  // Numeric quadrature over z for each branch.
  for (double d : {0.1, 0.9, 2.5}) {
    const double lo = -1.0, hi = 3.0;
    const int n = 200000;
    const double h = (hi - lo) / n;
    double integral = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double z = lo + i * h;
      const double w = (i == 0 || i == n) ? 0.5 : 1.0;
      integral += w * world::beam_likelihood(d, z, cfg);
    }
    integral *= h;
    CHECK(std::abs(integral - 1.0) <= 1e-6);
  }
}

TEST_CASE("range-only observation") {
  const auto ro = world::range_only_observe({0, 0, 0, 0}, {1, 2, 2}, 10.0);
  REQUIRE(ro.has_value());
  CHECK(ro->h == doctest::Approx(3.0));
  CHECK_FALSE(world::range_only_observe({0, 0, 0, 0}, {10, 0.5, 0}, 10.0).has_value());

  // Jacobian against central differences.
  Rng rng(29, "range-only");
  const double step = 1e-6;
  for (int i = 0; i < 100; ++i) {
    world::RobotState s{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(2, 8), 0};
    Eigen::Vector3d y{rng.uniform(-5, 5), rng.uniform(-5, 5), 0.0};
    const auto obs = world::range_only_observe(s, y, 100.0);
    REQUIRE(obs.has_value());
    for (int d = 0; d < 3; ++d) {
      Eigen::Vector3d hi = y, lo = y;
      hi(d) += step;
      lo(d) -= step;
      const double fd = (world::range_only_observe(s, hi, 100.0)->h -
                         world::range_only_observe(s, lo, 100.0)->h) /
                        (2 * step);
      CHECK(std::abs(obs->H(0, d) - fd) <= 1e-5);
    }
  }
}
