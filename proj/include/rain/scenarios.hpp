#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rain/attacks.hpp"
#include "rain/estimation.hpp"
#include "rain/grid.hpp"
#include "rain/planning.hpp"
#include "rain/world.hpp"

namespace rain::scenarios {

enum class ScenarioKind { Tracking, Occupancy, Surveillance };

const char* scenario_kind_name(ScenarioKind kind);
ScenarioKind scenario_kind_from_string(const std::string& s);

struct AttackConfig {
  attacks::AttackKind kind = attacks::AttackKind::None;
  int alpha = 0;
  attacks::AttackCadence cadence = attacks::AttackCadence::EveryStep;
  // With PerWindow cadence: steps between re-draws of the attacked set
  // (0 = once per planning window).
  int redraw_period = 0;
};

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::Tracking;
  int num_robots = 1;
  int num_targets = 1;  // targets or landmarks; unused for occupancy
  planning::HorizonConfig horizon;
  std::vector<world::ControlInput> control_set;
  int control_hold = 1;
  double tau = 1.0;
  double q = 0.0;

  world::SensorConfig sensor;          // tracking
  world::BeamSensorConfig beam;        // occupancy
  double range_sigma = 0.1;            // surveillance range sensor stddev
  double robot_altitude = 5.0;         // surveillance flight height

  Eigen::AlignedBox2d bounds;              // tracking environment box
  estimation::OccupancyGrid truth_map;     // occupancy ground truth
  std::string map_name;                    // squares | corridor
  std::vector<Eigen::Vector3d> landmarks;  // surveillance
  estimation::CsqmiConfig csqmi;

  AttackConfig attack;

  double prior_pos_var = 1.0;
  double prior_vel_var = 0.25;
  double prior_landmark_var = 1.0;
  double min_separation = 2.0;

  // Fixed initial conditions; when absent they are derived from the trial
  // seed and recorded in the trace.
  std::optional<std::vector<world::RobotState>> initial_poses;
  std::optional<std::vector<Eigen::Vector4d>> initial_targets;

  void validate() const;
};

// Scenario builders with the published parameters as defaults. `overrides`
// replaces individual fields; unknown keys are rejected.
ScenarioConfig build_tracking(int n, int M, int alpha, const nlohmann::json& overrides = {});
ScenarioConfig build_occupancy(const std::string& map_kind, int alpha,
                               const nlohmann::json& overrides = {});
ScenarioConfig build_surveillance(int n, int num_landmarks, int alpha,
                                  const nlohmann::json& overrides = {});

// Reduced problem sizes that keep exhaustive search and full runs fast on a
// desk machine; applied by the harness unless --paper-scale is given.
nlohmann::json desk_scale_overrides(ScenarioKind kind);

// Bundled synthetic environments.
estimation::OccupancyGrid make_squares_map();
estimation::OccupancyGrid make_corridor_map();
std::vector<Eigen::Vector3d> default_landmarks(int count);

// One row per timestep of one trial.
struct TrialRecord {
  int t = 0;
  std::vector<int> attacked;
  std::vector<double> target_entropy;  // per target (tracking / surveillance)
  std::vector<double> target_rmse;     // per target (tracking)
  double grid_entropy = std::numeric_limits<double>::quiet_NaN();
  std::vector<int> since_visit;        // surveillance: per-landmark counters
  std::vector<uint8_t> observed;       // surveillance: observed at this step
  double plan_seconds = 0.0;           // wall clock, nonzero on replan steps
};

struct MetricsSummary {
  double mean_rmse = std::numeric_limits<double>::quiet_NaN();
  double peak_rmse = std::numeric_limits<double>::quiet_NaN();
  double mean_entropy = std::numeric_limits<double>::quiet_NaN();
  double final_grid_entropy = std::numeric_limits<double>::quiet_NaN();
  double mean_unobserved_duration = std::numeric_limits<double>::quiet_NaN();
};

// Aggregates a trace: RMSE statistics, mean per-target entropy, final grid
// entropy and the average gap between consecutive observations of the same
// landmark.
MetricsSummary compute_metrics(const std::vector<TrialRecord>& trace);

// Concrete target models used by both the rollout objective and the executor.
class TrackingTargetModel final : public estimation::TargetModel {
 public:
  TrackingTargetModel(double tau, double q, world::SensorConfig sensor);
  int dim() const override { return 4; }
  const Eigen::MatrixXd& transition() const override { return F_; }
  Eigen::MatrixXd process_noise(int) const override { return W_; }
  std::optional<estimation::Observation> observe(const world::RobotState& robot,
                                                 const Eigen::VectorXd& mean) const override;
  Eigen::VectorXd residual(const Eigen::VectorXd& z,
                           const Eigen::VectorXd& predicted) const override;
  const Eigen::MatrixXd& process_noise_matrix() const { return W_; }

 private:
  Eigen::MatrixXd F_;
  Eigen::MatrixXd W_;
  world::SensorConfig sensor_;
};

class LandmarkTargetModel final : public estimation::TargetModel {
 public:
  LandmarkTargetModel(double q, double r_sense, double sigma);
  int dim() const override { return 3; }
  const Eigen::MatrixXd& transition() const override { return F_; }
  Eigen::MatrixXd process_noise(int k) const override;
  bool visit_based() const override { return true; }
  std::optional<estimation::Observation> observe(const world::RobotState& robot,
                                                 const Eigen::VectorXd& mean) const override;

 private:
  Eigen::MatrixXd F_;
  double q_;
  double r_sense_;
  double sigma_;
};

}  // namespace rain::scenarios
