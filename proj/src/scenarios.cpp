#include "rain/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace rain::scenarios {

using nlohmann::json;

const char* scenario_kind_name(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::Tracking: return "tracking";
    case ScenarioKind::Occupancy: return "occupancy";
    case ScenarioKind::Surveillance: return "surveillance";
  }
  return "tracking";
}

ScenarioKind scenario_kind_from_string(const std::string& s) {
  if (s == "tracking") return ScenarioKind::Tracking;
  if (s == "occupancy") return ScenarioKind::Occupancy;
  if (s == "surveillance") return ScenarioKind::Surveillance;
  throw_error(ErrorCode::ConfigInvalid, "unknown scenario '" + s + "'");
}

void ScenarioConfig::validate() const {
  if (num_robots < 1) throw_error(ErrorCode::ConfigInvalid, "need at least one robot");
  if (kind != ScenarioKind::Occupancy && num_targets < 1) {
    throw_error(ErrorCode::ConfigInvalid, "need at least one target");
  }
  if (control_set.empty()) throw_error(ErrorCode::ConfigInvalid, "empty control set");
  for (const auto& u : control_set) {
    if (!std::isfinite(u.v) || !std::isfinite(u.omega)) {
      throw_error(ErrorCode::ConfigInvalid, "non-finite control input");
    }
  }
  planning::HorizonConfig h = horizon;
  h.validate(num_robots);
  if (tau <= 0.0) throw_error(ErrorCode::ConfigInvalid, "tau must be positive");
  if (control_hold < 1 || horizon.t_plan % control_hold != 0) {
    throw_error(ErrorCode::ConfigInvalid, "t_plan must be a multiple of control_hold");
  }
  if (kind == ScenarioKind::Occupancy) {
    if (beam.num_beams < 1 || beam.z_min < 0.0 || beam.z_min >= beam.z_max) {
      throw_error(ErrorCode::ConfigInvalid, "invalid beam sensor");
    }
    if (truth_map.rows == 0 || truth_map.cols == 0) {
      throw_error(ErrorCode::ConfigInvalid, "occupancy scenario needs a ground-truth map");
    }
  }
  if (kind == ScenarioKind::Surveillance &&
      static_cast<int>(landmarks.size()) != num_targets) {
    throw_error(ErrorCode::ConfigInvalid, "landmark count mismatch");
  }
}

namespace {

std::vector<world::ControlInput> control_grid(const std::vector<double>& vs,
                                              const std::vector<double>& omegas) {
  std::vector<world::ControlInput> out;
  for (double v : vs) {
    for (double w : omegas) out.push_back({v, w});
  }
  return out;
}

void apply_common_overrides(ScenarioConfig& cfg, const json& overrides) {
  static const std::set<std::string> known = {
      "t_task", "t_plan", "t_replan", "alpha", "tau", "q", "r_sense", "psi",
      "sigma_r", "sigma_b", "sigma", "beams", "control_hold", "controls",
      "attack_kind", "attack_alpha", "attack_cadence", "attack_redraw", "min_separation",
      "prior_pos_var", "prior_vel_var", "prior_landmark_var", "altitude",
      "csqmi_overlap", "csqmi_unknown_lo", "csqmi_unknown_hi"};
  for (const auto& [key, value] : overrides.items()) {
    if (!known.count(key)) {
      throw_error(ErrorCode::ConfigInvalid, "unknown override '" + key + "'");
    }
    if (key == "t_task") cfg.horizon.t_task = value.get<int>();
    else if (key == "t_plan") cfg.horizon.t_plan = value.get<int>();
    else if (key == "t_replan") cfg.horizon.t_replan = value.get<int>();
    else if (key == "alpha") cfg.horizon.alpha = value.get<int>();
    else if (key == "tau") cfg.tau = value.get<double>();
    else if (key == "q") cfg.q = value.get<double>();
    else if (key == "r_sense") cfg.sensor.r_sense = value.get<double>();
    else if (key == "psi") cfg.sensor.psi = value.get<double>();
    else if (key == "sigma_r") cfg.sensor.sigma_r = value.get<double>();
    else if (key == "sigma_b") cfg.sensor.sigma_b = value.get<double>();
    else if (key == "sigma") cfg.beam.sigma = value.get<double>();
    else if (key == "beams") cfg.beam.num_beams = value.get<int>();
    else if (key == "control_hold") cfg.control_hold = value.get<int>();
    else if (key == "controls") {
      cfg.control_set.clear();
      for (const auto& pair : value) {
        cfg.control_set.push_back({pair.at(0).get<double>(), pair.at(1).get<double>()});
      }
    } else if (key == "attack_kind") {
      cfg.attack.kind = attacks::attack_kind_from_string(value.get<std::string>());
    } else if (key == "attack_alpha") cfg.attack.alpha = value.get<int>();
    else if (key == "attack_redraw") cfg.attack.redraw_period = value.get<int>();
    else if (key == "attack_cadence") {
      const auto s = value.get<std::string>();
      if (s == "every_step") cfg.attack.cadence = attacks::AttackCadence::EveryStep;
      else if (s == "per_window") cfg.attack.cadence = attacks::AttackCadence::PerWindow;
      else throw_error(ErrorCode::ConfigInvalid, "unknown cadence '" + s + "'");
    } else if (key == "min_separation") cfg.min_separation = value.get<double>();
    else if (key == "prior_pos_var") cfg.prior_pos_var = value.get<double>();
    else if (key == "prior_vel_var") cfg.prior_vel_var = value.get<double>();
    else if (key == "prior_landmark_var") cfg.prior_landmark_var = value.get<double>();
    else if (key == "altitude") cfg.robot_altitude = value.get<double>();
    else if (key == "csqmi_overlap") cfg.csqmi.overlap_threshold = value.get<double>();
    else if (key == "csqmi_unknown_lo") cfg.csqmi.unknown_lo = value.get<double>();
    else if (key == "csqmi_unknown_hi") cfg.csqmi.unknown_hi = value.get<double>();
  }
  // The attacker draws from the same budget the planner defends against
  // unless overridden explicitly.
  if (!overrides.contains("attack_alpha")) cfg.attack.alpha = cfg.horizon.alpha;
}

constexpr double deg(double d) { return d * M_PI / 180.0; }

}  // namespace

ScenarioConfig build_tracking(int n, int M, int alpha, const json& overrides) {
  ScenarioConfig cfg;
  cfg.kind = ScenarioKind::Tracking;
  cfg.num_robots = n;
  cfg.num_targets = M;
  cfg.horizon = {500, 25, 25, alpha};
  cfg.control_set = control_grid({1.0, 3.0}, {0.0, 1.0, -1.0, 3.0, -3.0});
  cfg.tau = 0.5;
  cfg.q = 0.001;
  cfg.sensor = {10.0, deg(94.0), 0.15, deg(5.0)};
  cfg.bounds = Eigen::AlignedBox2d(Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(64.0, 64.0));
  cfg.attack = {attacks::AttackKind::WorstGreedy, alpha, attacks::AttackCadence::EveryStep};
  apply_common_overrides(cfg, overrides);
  cfg.validate();
  return cfg;
}

ScenarioConfig build_occupancy(const std::string& map_kind, int alpha, const json& overrides) {
  ScenarioConfig cfg;
  cfg.kind = ScenarioKind::Occupancy;
  cfg.num_robots = 6;
  cfg.num_targets = 1;
  // The attacked set is re-drawn at the end of each planning window, so the
  // replanning period equals the planning horizon.
  cfg.horizon = {map_kind == "corridor" ? 100 : 50, 4, 4, alpha};
  cfg.control_set = control_grid({0.0, 1.0, 2.0}, {0.0, 1.0, -1.0, 2.0, -2.0});
  cfg.tau = 1.0;
  cfg.beam = {16, 0.0, 1.5, 0.01};
  cfg.min_separation = 0.8;
  if (map_kind == "squares") {
    cfg.truth_map = make_squares_map();
  } else if (map_kind == "corridor") {
    cfg.truth_map = make_corridor_map();
  } else {
    throw_error(ErrorCode::ConfigInvalid, "unknown map '" + map_kind + "'");
  }
  cfg.map_name = map_kind;
  cfg.attack = {attacks::AttackKind::WorstGreedy, alpha, attacks::AttackCadence::PerWindow};
  apply_common_overrides(cfg, overrides);
  cfg.validate();
  return cfg;
}

ScenarioConfig build_surveillance(int n, int num_landmarks, int alpha, const json& overrides) {
  ScenarioConfig cfg;
  cfg.kind = ScenarioKind::Surveillance;
  cfg.num_robots = n;
  cfg.num_targets = num_landmarks;
  cfg.horizon = {300, 10, 5, alpha};
  // The published turn-rate set has no negative entries.
  cfg.control_set = control_grid({1.0, 3.0}, {0.0, 1.0, 2.0});
  cfg.control_hold = 5;  // keeps the 10-step window exhaustively solvable
  cfg.tau = 1.0;
  cfg.q = 0.01;
  cfg.sensor.r_sense = 10.0;
  cfg.range_sigma = 0.1;
  cfg.robot_altitude = 5.0;
  cfg.landmarks = default_landmarks(num_landmarks);
  cfg.attack = {attacks::AttackKind::WorstGreedy, alpha, attacks::AttackCadence::EveryStep};
  apply_common_overrides(cfg, overrides);
  cfg.validate();
  return cfg;
}

json desk_scale_overrides(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::Tracking:
      // Held decisions keep the paper-length lookahead while the search
      // space stays exhaustively enumerable.
      return json{{"t_task", 100}, {"t_plan", 24}, {"t_replan", 8}, {"control_hold", 8}};
    case ScenarioKind::Occupancy:
      return json{{"beams", 10},
                  {"controls", json::array({{0.0, 0.0}, {0.0, 1.0}, {0.0, -1.0},
                                            {1.0, 0.0}, {1.0, 1.0}, {1.0, -1.0},
                                            {2.0, 0.0}, {2.0, 1.0}, {2.0, -1.0}})}};
    case ScenarioKind::Surveillance:
      return json{{"t_task", 100}};
  }
  return {};
}

estimation::OccupancyGrid make_squares_map() {
  // 8 x 8 m at 0.2 m/cell, walled boundary with three square blocks, sized
  // so a six-robot team with short-range sensors contends for frontiers.
  auto g = estimation::OccupancyGrid::uniform(40, 40, 0.2, {0.0, 0.0});
  for (double& l : g.log_odds) l = -10.0;
  auto block = [&](int r0, int c0, int r1, int c1) {
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) g.at(r, c) = 10.0;
    }
  };
  block(0, 0, 0, 39);
  block(39, 0, 39, 39);
  block(0, 0, 39, 0);
  block(0, 39, 39, 39);
  // Two blocks sit near opposite walls, leaving narrow shadowed channels
  // that have to be entered to be mapped; one block sits in the open.
  block(4, 10, 15, 21);
  block(24, 18, 35, 29);
  block(17, 4, 22, 9);
  return g;
}

estimation::OccupancyGrid make_corridor_map() {
  auto g = estimation::OccupancyGrid::uniform(64, 64, 0.2, {0.0, 0.0});
  for (double& l : g.log_odds) l = -10.0;
  auto block = [&](int r0, int c0, int r1, int c1) {
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) g.at(r, c) = 10.0;
    }
  };
  block(0, 0, 0, 63);
  block(63, 0, 63, 63);
  block(0, 0, 63, 0);
  block(0, 63, 63, 63);
  // Two long walls with door gaps carve a central corridor and side rooms.
  block(21, 1, 23, 17);
  block(21, 27, 23, 45);
  block(21, 53, 23, 62);
  block(41, 1, 43, 10);
  block(41, 19, 43, 38);
  block(41, 47, 43, 62);
  return g;
}

std::vector<Eigen::Vector3d> default_landmarks(int count) {
  // Deterministic scatter over a 40 x 40 m field, one landmark per building.
  static const double layout[][2] = {
      {6.0, 8.0},  {18.0, 5.0},  {32.0, 9.0},  {9.0, 20.0},  {22.0, 18.0},
      {35.0, 22.0}, {5.0, 33.0}, {17.0, 30.0}, {28.0, 34.0}, {36.0, 36.0},
      {12.0, 12.0}, {26.0, 26.0}, {8.0, 27.0}, {30.0, 15.0}, {20.0, 38.0},
      {38.0, 30.0}};
  std::vector<Eigen::Vector3d> out;
  const int available = static_cast<int>(sizeof(layout) / sizeof(layout[0]));
  for (int i = 0; i < count; ++i) {
    const auto& p = layout[i % available];
    const double shift = 2.5 * (i / available);  // reuse with offset beyond the table
    out.emplace_back(p[0] + shift, p[1] + shift, 0.0);
  }
  return out;
}

MetricsSummary compute_metrics(const std::vector<TrialRecord>& trace) {
  if (trace.empty()) throw_error(ErrorCode::EmptyTrace, "no records");
  MetricsSummary s;

  bool has_rmse = false, has_entropy = false, has_grid = false, has_visits = false;
  double rmse_sum = 0.0, rmse_peak = 0.0;
  double entropy_sum = 0.0;
  int entropy_rows = 0, rmse_rows = 0;
  for (const auto& rec : trace) {
    if (!rec.target_rmse.empty()) {
      has_rmse = true;
      double sq = 0.0;
      for (double e : rec.target_rmse) sq += e * e;
      const double step_rmse = std::sqrt(sq / rec.target_rmse.size());
      rmse_sum += step_rmse;
      rmse_peak = std::max(rmse_peak, step_rmse);
      ++rmse_rows;
    }
    if (!rec.target_entropy.empty()) {
      has_entropy = true;
      double sum = 0.0;
      for (double h : rec.target_entropy) sum += h;
      entropy_sum += sum / rec.target_entropy.size();
      ++entropy_rows;
    }
    if (std::isfinite(rec.grid_entropy)) has_grid = true;
    if (!rec.observed.empty()) has_visits = true;
  }
  if (has_rmse) {
    s.mean_rmse = rmse_sum / rmse_rows;
    s.peak_rmse = rmse_peak;
  }
  if (has_entropy) s.mean_entropy = entropy_sum / entropy_rows;
  if (has_grid) s.final_grid_entropy = trace.back().grid_entropy;

  if (has_visits) {
    const int num_landmarks = static_cast<int>(trace.front().observed.size());
    const int t_end = trace.back().t;
    double gap_sum = 0.0;
    long gap_count = 0;
    for (int m = 0; m < num_landmarks; ++m) {
      int last_obs = 0;
      bool seen = false;
      for (const auto& rec : trace) {
        if (rec.observed[m]) {
          gap_sum += rec.t - last_obs;
          ++gap_count;
          last_obs = rec.t;
          seen = true;
        }
      }
      if (!seen) {
        gap_sum += t_end;
        ++gap_count;
      } else if (t_end - last_obs >= 1) {
        gap_sum += t_end - last_obs;
        ++gap_count;
      }
    }
    s.mean_unobserved_duration = gap_sum / gap_count;
  }
  return s;
}

TrackingTargetModel::TrackingTargetModel(double tau, double q, world::SensorConfig sensor)
    : sensor_(sensor) {
  const auto di = world::double_integrator_model(tau, q);
  F_ = di.F;
  W_ = di.W;
}

std::optional<estimation::Observation> TrackingTargetModel::observe(
    const world::RobotState& robot, const Eigen::VectorXd& mean) const {
  auto rb = world::range_bearing_observe(robot, mean.head<2>(), sensor_);
  if (!rb) return std::nullopt;
  estimation::Observation obs;
  obs.H = rb->H;
  obs.V = rb->V;
  obs.predicted = rb->h;
  return obs;
}

Eigen::VectorXd TrackingTargetModel::residual(const Eigen::VectorXd& z,
                                              const Eigen::VectorXd& predicted) const {
  Eigen::VectorXd r = z - predicted;
  r(1) = world::wrap_angle(r(1));
  return r;
}

LandmarkTargetModel::LandmarkTargetModel(double q, double r_sense, double sigma)
    : q_(q), r_sense_(r_sense), sigma_(sigma) {
  F_ = Eigen::Matrix3d::Identity();
}

Eigen::MatrixXd LandmarkTargetModel::process_noise(int k) const {
  return world::landmark_noise(k, q_);
}

std::optional<estimation::Observation> LandmarkTargetModel::observe(
    const world::RobotState& robot, const Eigen::VectorXd& mean) const {
  auto ro = world::range_only_observe(robot, mean.head<3>(), r_sense_, sigma_);
  if (!ro) return std::nullopt;
  estimation::Observation obs;
  obs.H = ro->H;
  obs.V = Eigen::MatrixXd::Constant(1, 1, ro->var);
  obs.predicted = Eigen::VectorXd::Constant(1, ro->h);
  return obs;
}

}  // namespace rain::scenarios
