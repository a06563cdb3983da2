#include <doctest.h>

#include <cmath>

#include "rain/estimation.hpp"
#include "rain/rng.hpp"
#include "rain/scenarios.hpp"

using namespace rain;
using estimation::GaussianBelief;

namespace {

GaussianBelief scalar_belief(double mean, double var) {
  GaussianBelief b;
  b.mean = Eigen::VectorXd::Constant(1, mean);
  b.cov = Eigen::MatrixXd::Constant(1, 1, var);
  return b;
}

GaussianBelief random_belief(Rng& rng, int dim) {
  GaussianBelief b;
  b.mean = Eigen::VectorXd::Zero(dim);
  Eigen::MatrixXd a(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) a(i, j) = rng.uniform(-1, 1);
  }
  b.cov = a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(dim, dim);
  return b;
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  return es.eigenvalues().minCoeff();
}

// A static scalar target observed every step with H = 1, V = 1. The
// posterior variance follows 1/p_t = 1/p_0 + t.
class ScalarStaticModel final : public estimation::TargetModel {
 public:
  int dim() const override { return 1; }
  const Eigen::MatrixXd& transition() const override { return F_; }
  Eigen::MatrixXd process_noise(int) const override { return Eigen::MatrixXd::Zero(1, 1); }
  std::optional<estimation::Observation> observe(const world::RobotState&,
                                                 const Eigen::VectorXd&) const override {
    estimation::Observation obs;
    obs.H = Eigen::MatrixXd::Identity(1, 1);
    obs.V = Eigen::MatrixXd::Identity(1, 1);
    obs.predicted = Eigen::VectorXd::Zero(1);
    return obs;
  }

 private:
  Eigen::MatrixXd F_ = Eigen::MatrixXd::Identity(1, 1);
};

}  // namespace

TEST_CASE("scalar prediction adds process noise") {
  const auto out = estimation::kf_predict(scalar_belief(0.0, 1.0),
                                          Eigen::MatrixXd::Identity(1, 1),
                                          Eigen::MatrixXd::Constant(1, 1, 0.5));
  CHECK(out.cov(0, 0) == doctest::Approx(1.5));
}

TEST_CASE("identity prediction with zero noise is a no-op") {
  Rng rng(31, "kf");
  const auto b = random_belief(rng, 4);
  const auto out = estimation::kf_predict(b, Eigen::MatrixXd::Identity(4, 4),
                                          Eigen::MatrixXd::Zero(4, 4));
  CHECK((out.cov - b.cov).norm() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK((out.mean - b.mean).norm() == doctest::Approx(0.0));
}

TEST_CASE("prediction keeps covariances symmetric positive semidefinite") {
  Rng rng(37, "kf-psd");
  auto b = random_belief(rng, 4);
  const auto di = world::double_integrator_model(0.5, 0.001);
  for (int i = 0; i < 100; ++i) {
    b = estimation::kf_predict(b, di.F, di.W);
    CHECK((b.cov - b.cov.transpose()).norm() <= 1e-10);
    CHECK(min_eigenvalue(b.cov) >= -1e-10);
  }
}

TEST_CASE("scalar covariance update halves unit variance") {
  const auto out = estimation::kf_update_covariance(scalar_belief(0.0, 1.0),
                                                    Eigen::MatrixXd::Identity(1, 1),
                                                    Eigen::MatrixXd::Identity(1, 1));
  CHECK(out.cov(0, 0) == doctest::Approx(0.5));
  CHECK(out.mean(0) == doctest::Approx(0.0));
}

TEST_CASE("zero measurement matrix leaves the covariance unchanged") {
  Rng rng(41, "kf-h0");
  const auto b = random_belief(rng, 3);
  const auto out = estimation::kf_update_covariance(b, Eigen::MatrixXd::Zero(1, 3),
                                                    Eigen::MatrixXd::Identity(1, 1));
  CHECK((out.cov - b.cov).norm() <= 1e-12);
}

TEST_CASE("posterior covariance never exceeds the prior") {
  Rng rng(43, "kf-order");
  for (int i = 0; i < 100; ++i) {
    const int dim = 2 + rng.uniform_int(3);
    const auto b = random_belief(rng, dim);
    Eigen::MatrixXd H(1, dim);
    for (int d = 0; d < dim; ++d) H(0, d) = rng.uniform(-1, 1);
    const auto out = estimation::kf_update_covariance(
        b, H, Eigen::MatrixXd::Constant(1, 1, rng.uniform(0.05, 1.0)));
    CHECK(min_eigenvalue(b.cov - out.cov) >= -1e-8);
  }
}

TEST_CASE("singular innovation is rejected") {
  auto b = scalar_belief(0.0, 1.0);
  CHECK_THROWS_AS(estimation::kf_update_covariance(b, Eigen::MatrixXd::Identity(1, 1),
                                                   Eigen::MatrixXd::Constant(1, 1, -1.0)),
                  Error);
}

TEST_CASE("dimension mismatches are rejected") {
  auto b = scalar_belief(0.0, 1.0);
  CHECK_THROWS_AS(estimation::kf_predict(b, Eigen::MatrixXd::Identity(2, 2),
                                         Eigen::MatrixXd::Zero(2, 2)),
                  Error);
}

TEST_CASE("mean update applies the Kalman gain") {
  const auto out = estimation::kf_update(scalar_belief(1.0, 1.0),
                                         Eigen::MatrixXd::Identity(1, 1),
                                         Eigen::MatrixXd::Identity(1, 1),
                                         Eigen::VectorXd::Constant(1, 2.0));
  CHECK(out.mean(0) == doctest::Approx(2.0));  // 1 + 0.5 * 2
  CHECK(out.cov(0, 0) == doctest::Approx(0.5));
}

TEST_CASE("rollout objective matches the closed-form scalar recursion") {
  // One robot observing one static scalar target every step:
  //   J = (1/T) sum_t log(1 + t) with unit prior and unit noise.
  ScalarStaticModel model;
  estimation::RolloutSetup setup;
  setup.robot_states = {{0, 0, 0, 0}};
  setup.control_set = {{0.0, 0.0}};
  setup.tau = 1.0;
  setup.t_plan = 6;
  estimation::BeliefState beliefs;
  beliefs.targets.push_back(scalar_belief(0.0, 1.0));
  beliefs.since_visit = {0};

  estimation::EkfRolloutObjective objective(setup, beliefs, {&model});
  planning::IndexPlans plans{planning::IndexSeq(6, 0)};
  const double j = objective.value(plans, 0b1);

  double expected = 0.0;
  for (int t = 1; t <= 6; ++t) expected += std::log(1.0 + t);
  expected /= 6.0;
  CHECK(j == doctest::Approx(expected).epsilon(1e-12));

  // The empty set is the exact baseline.
  CHECK(objective.value(plans, 0) == 0.0);
}

TEST_CASE("rollout objective is monotone and normalized on tracking instances") {
  Rng rng(47, "rollout");
  scenarios::TrackingTargetModel model(0.5, 0.001, {10.0, M_PI / 2, 0.15, 0.087});

  for (int rep = 0; rep < 5; ++rep) {
    const int n = 3 + rng.uniform_int(3);
    estimation::RolloutSetup setup;
    for (int i = 0; i < n; ++i) {
      setup.robot_states.push_back(
          {rng.uniform(0, 30), rng.uniform(0, 30), 0, rng.uniform(-M_PI, M_PI)});
    }
    setup.control_set = {{1.0, 0.0}, {3.0, 0.0}, {1.0, 1.0}, {1.0, -1.0}};
    setup.tau = 0.5;
    setup.t_plan = 3;
    estimation::BeliefState beliefs;
    std::vector<const estimation::TargetModel*> models;
    const int targets = 4 + rng.uniform_int(4);
    for (int m = 0; m < targets; ++m) {
      GaussianBelief b;
      b.mean = Eigen::Vector4d(rng.uniform(0, 30), rng.uniform(0, 30), 0, 0);
      b.cov = Eigen::Vector4d(1, 1, 0.25, 0.25).asDiagonal();
      beliefs.targets.push_back(b);
      models.push_back(&model);
    }
    beliefs.since_visit.assign(targets, 0);
    estimation::EkfRolloutObjective objective(setup, beliefs, models);

    planning::IndexPlans plans(n);
    for (auto& p : plans) {
      p.resize(3);
      for (auto& c : p) c = rng.uniform_int(4);
    }
    CHECK(objective.value(plans, 0) == 0.0);
    for (int pair = 0; pair < 100; ++pair) {
      const uint64_t b = rng.next_u64() & setfn::full_mask(n);
      const uint64_t a = rng.next_u64() & b;
      CHECK(objective.value(plans, b) >= objective.value(plans, a) - 1e-9);
    }
    // bind_single agrees with value() exactly.
    for (int i = 0; i < n; ++i) {
      const uint64_t ctx = rng.next_u64() & setfn::full_mask(n) & ~(1ull << i);
      auto eval = objective.bind_single(plans, ctx, i);
      CHECK(eval(plans[i]) == objective.value(plans, ctx | (1ull << i)));
    }
  }
}

TEST_CASE("rollout covariances stay positive definite") {
  scenarios::TrackingTargetModel model(0.5, 0.001, {10.0, M_PI, 0.15, 0.087});
  estimation::RolloutSetup setup;
  setup.robot_states = {{5, 5, 0, 0}};
  setup.control_set = {{1.0, 0.5}};
  setup.tau = 0.5;
  setup.t_plan = 30;
  estimation::BeliefState beliefs;
  GaussianBelief b;
  b.mean = Eigen::Vector4d(6, 5, 0, 0);
  b.cov = Eigen::Vector4d(1, 1, 0.25, 0.25).asDiagonal();
  beliefs.targets.push_back(b);
  beliefs.since_visit = {0};
  estimation::EkfRolloutObjective objective(setup, beliefs, {&model});
  planning::IndexPlans plans{planning::IndexSeq(30, 0)};
  const double j = objective.value(plans, 0b1);
  CHECK(std::isfinite(j));
  CHECK(j >= 0.0);
}
