#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <vector>

#include "rain/error.hpp"
#include "rain/objective.hpp"
#include "rain/world.hpp"

namespace rain::estimation {

// Gaussian belief over a (stacked or per-target) state.
struct GaussianBelief {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

// Prediction step: mean <- F mean, cov <- F cov F^T + W (re-symmetrized).
GaussianBelief kf_predict(const GaussianBelief& b, const Eigen::MatrixXd& F,
                          const Eigen::MatrixXd& W);

// Covariance-only measurement update in Joseph form; the mean is untouched
// (planning rolls out predicted covariances, no measurements are realized).
GaussianBelief kf_update_covariance(const GaussianBelief& b, const Eigen::MatrixXd& H,
                                    const Eigen::MatrixXd& V);

// Full update applied during execution: Joseph-form covariance plus the mean
// correction K * residual.
GaussianBelief kf_update(const GaussianBelief& b, const Eigen::MatrixXd& H,
                         const Eigen::MatrixXd& V, const Eigen::VectorXd& residual);

// log det of a symmetric positive-definite matrix.
double logdet_spd(const Eigen::MatrixXd& m);

struct Observation {
  Eigen::MatrixXd H;
  Eigen::MatrixXd V;
  Eigen::VectorXd predicted;  // h(x, y_hat)
};

// Scenario-supplied target process + sensor pair. Implementations must be
// pure: identical inputs give identical outputs.
class TargetModel {
 public:
  virtual ~TargetModel() = default;
  virtual int dim() const = 0;
  virtual const Eigen::MatrixXd& transition() const = 0;
  // Process noise; k is the steps-since-visit counter (ignored unless
  // visit_based()).
  virtual Eigen::MatrixXd process_noise(int k) const = 0;
  virtual bool visit_based() const { return false; }
  virtual std::optional<Observation> observe(const world::RobotState& robot,
                                             const Eigen::VectorXd& mean) const = 0;
  // Measurement residual; overridden where components need angle wrapping.
  virtual Eigen::VectorXd residual(const Eigen::VectorXd& z,
                                   const Eigen::VectorXd& predicted) const {
    return z - predicted;
  }
};

// A planning-time snapshot of the filter: per-target beliefs plus the
// steps-since-visit counters used by visit-based noise models.
struct BeliefState {
  std::vector<GaussianBelief> targets;
  std::vector<int> since_visit;
};

// Kinematics + geometry shared by the rollout and the executor.
struct RolloutSetup {
  std::vector<world::RobotState> robot_states;  // poses at planning time
  std::vector<world::ControlInput> control_set;
  double tau = 1.0;
  int t_plan = 1;        // rollout steps
  int control_hold = 1;  // steps each planned decision is held for
  bool three_d = false;
  std::optional<Eigen::AlignedBox2d> clamp_box;  // environment bounds, if any
  int first_meas_step = 1;  // steps before this are predict-only
};

// One kinematic step under the setup's dynamics and bounds. Planning and
// execution share this path so planned and realized poses agree exactly.
world::RobotState advance_robot(const RolloutSetup& setup, const world::RobotState& s,
                                const world::ControlInput& u);

// Entropy-reduction objective over robot subsets: J(S) is the time-averaged
// drop in log det covariance relative to the measurement-free rollout, with
// only subset S's (field-of-view gated) measurements applied along the
// planned trajectories. Normalized, non-negative and non-decreasing in S.
class EkfRolloutObjective final : public planning::JointObjective {
 public:
  EkfRolloutObjective(RolloutSetup setup, BeliefState beliefs,
                      std::vector<const TargetModel*> models);

  int num_robots() const override { return static_cast<int>(setup_.robot_states.size()); }
  int decisions_per_robot() const override;
  int options_per_decision() const override { return static_cast<int>(setup_.control_set.size()); }

  double value(const planning::IndexPlans& plans, uint64_t active) const override;
  planning::SingleRobotEvaluator bind_single(const planning::IndexPlans& fixed,
                                             uint64_t context_active, int robot) const override;

  // Pose trajectory (steps 1..t_plan) induced by one robot's index plan.
  std::vector<world::RobotState> pose_trajectory(int robot,
                                                 const planning::IndexSeq& seq) const;

  const RolloutSetup& setup() const { return setup_; }

 private:
  struct StepObs {
    int robot;
    int step;  // 1-based rollout step
    Eigen::MatrixXd H;
    Eigen::MatrixXd V;
  };
  // Observations grouped per target, each stream ordered by (step, robot).
  using ObsByTarget = std::vector<std::vector<StepObs>>;

  ObsByTarget collect_obs(int robot, const planning::IndexSeq& seq) const;
  static void merge_obs(ObsByTarget& into, const ObsByTarget& from);
  // Entropy reduction of one target under its observation stream. Targets
  // without observations follow the baseline exactly and contribute zero, so
  // only observed targets are ever rolled.
  double target_contribution(int m, const std::vector<StepObs>& obs) const;

  RolloutSetup setup_;
  BeliefState beliefs_;
  std::vector<const TargetModel*> models_;
  std::vector<Eigen::VectorXd> predicted_means_;   // [step][target], step 0 = now
  std::vector<std::vector<double>> baseline_logdet_;  // [step][target], measurement-free
};

// Convenience wrapper matching the operation name used across the library.
double rollout_objective(const EkfRolloutObjective& objective,
                         const planning::IndexPlans& plans, uint64_t active);

}  // namespace rain::estimation
