#include "rain/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>

#include "rain/attacks.hpp"
#include "rain/grid.hpp"
#include "rain/rng.hpp"

namespace rain::planning {

namespace {

using scenarios::ScenarioConfig;
using scenarios::ScenarioKind;
using scenarios::TrialRecord;

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::vector<world::RobotState> sample_poses(const ScenarioConfig& cfg, Rng& rng) {
  std::vector<world::RobotState> poses;
  Eigen::AlignedBox2d box;
  if (cfg.kind == ScenarioKind::Tracking) {
    box = Eigen::AlignedBox2d(cfg.bounds.min() + Eigen::Vector2d(2, 2),
                              cfg.bounds.max() - Eigen::Vector2d(2, 2));
  } else if (cfg.kind == ScenarioKind::Occupancy) {
    const auto& g = cfg.truth_map;
    const double margin = 3 * g.resolution;
    box = Eigen::AlignedBox2d(g.origin + Eigen::Vector2d(margin, margin),
                              g.origin + Eigen::Vector2d(g.width() - margin,
                                                         g.height() - margin));
  } else {
    Eigen::AlignedBox2d hull;
    for (const auto& lm : cfg.landmarks) hull.extend(Eigen::Vector2d(lm.x(), lm.y()));
    box = Eigen::AlignedBox2d(hull.min() - Eigen::Vector2d(4, 4),
                              hull.max() + Eigen::Vector2d(4, 4));
  }

  for (int i = 0; i < cfg.num_robots; ++i) {
    for (int attempt = 0; attempt < 20000; ++attempt) {
      world::RobotState s;
      s.x = rng.uniform(box.min().x(), box.max().x());
      s.y = rng.uniform(box.min().y(), box.max().y());
      s.theta = rng.uniform(-M_PI, M_PI);
      s.z = cfg.kind == ScenarioKind::Surveillance ? cfg.robot_altitude : 0.0;
      if (cfg.kind == ScenarioKind::Occupancy) {
        const auto& g = cfg.truth_map;
        const int c = static_cast<int>((s.x - g.origin.x()) / g.resolution);
        const int r = static_cast<int>((s.y - g.origin.y()) / g.resolution);
        if (g.prob(r, c) > 0.3) continue;
      }
      bool ok = true;
      for (const auto& other : poses) {
        if (std::hypot(other.x - s.x, other.y - s.y) < cfg.min_separation) {
          ok = false;
          break;
        }
      }
      if (ok) {
        poses.push_back(s);
        break;
      }
    }
    if (static_cast<int>(poses.size()) != i + 1) {
      throw_error(ErrorCode::ConfigInvalid, "could not place robots with the given separation");
    }
  }
  return poses;
}

// Shared plumbing of one trial. Scenario-specific parts are the belief
// representation and the measurement fusion.
class TrialRunner {
 public:
  TrialRunner(const ScenarioConfig& cfg, PlannerKind planner,
              const scenarios::AttackConfig& attack, uint64_t seed)
      : cfg_(cfg),
        planner_(planner),
        attack_cfg_(attack),
        init_rng_(seed, "init"),
        target_rng_(seed, "targets"),
        meas_rng_(seed, "measurements") {
    cfg_.validate();
    attack_model_.kind = attack.kind;
    attack_model_.alpha = std::clamp(attack.alpha, 0, cfg_.num_robots);
    attack_model_.stream = Rng(seed, "attacks");

    setup_.control_set = cfg_.control_set;
    setup_.tau = cfg_.tau;
    setup_.t_plan = cfg_.horizon.t_plan;
    setup_.control_hold = cfg_.control_hold;
    setup_.three_d = cfg_.kind == ScenarioKind::Surveillance;
    if (cfg_.kind == ScenarioKind::Tracking) {
      setup_.clamp_box = cfg_.bounds;
    } else if (cfg_.kind == ScenarioKind::Occupancy) {
      const auto& g = cfg_.truth_map;
      const double margin = g.resolution;
      setup_.clamp_box = Eigen::AlignedBox2d(
          g.origin + Eigen::Vector2d(margin, margin),
          g.origin + Eigen::Vector2d(g.width() - margin, g.height() - margin));
    }

    robots_.resize(cfg_.num_robots);
    for (int i = 0; i < cfg_.num_robots; ++i) robots_[i] = i;

    init_states();
  }

  Trial run() {
    Trial trial;
    trial.initial_poses = states_;
    trial.initial_targets = truth_targets_;

    int window_start = 0;
    setfn::AttackSet current_attack;
    for (int t = 0; t < cfg_.horizon.t_task; ++t) {
      double plan_seconds = 0.0;
      if (t % cfg_.horizon.t_replan == 0) {
        const double tic = now_seconds();
        replan();
        plan_seconds = now_seconds() - tic;
        window_start = t;
      }

      // Execute one control per robot.
      for (int i = 0; i < cfg_.num_robots; ++i) {
        const int decision = (t - window_start) / cfg_.control_hold;
        const auto& u = cfg_.control_set[plans_[i][decision]];
        states_[i] = estimation::advance_robot(setup_, states_[i], u);
      }

      advance_truth();

      // Attack on the measurements of the step just completed.
      const int period = attack_cfg_.redraw_period;
      const bool redraw = attack_cfg_.cadence == attacks::AttackCadence::EveryStep ||
                          t == window_start ||
                          (period > 0 && (t - window_start) % period == 0);
      if (redraw) {
        current_attack = draw_attack_now(t, window_start);
      }

      const setfn::SubsetMask attacked = current_attack.removed_mask();
      TrialRecord rec;
      rec.t = t + 1;
      rec.attacked = current_attack.removed;
      rec.plan_seconds = plan_seconds;
      fuse_and_record(attacked, rec);
      trial.records.push_back(std::move(rec));
    }
    return trial;
  }

 private:
  void init_states() {
    if (cfg_.initial_poses) {
      states_ = *cfg_.initial_poses;
    } else {
      states_ = sample_poses(cfg_, init_rng_);
    }

    if (cfg_.kind == ScenarioKind::Tracking) {
      tracking_model_ = std::make_unique<scenarios::TrackingTargetModel>(
          cfg_.tau, cfg_.q, cfg_.sensor);
      const Eigen::AlignedBox2d inner(cfg_.bounds.min() + Eigen::Vector2d(8, 8),
                                      cfg_.bounds.max() - Eigen::Vector2d(8, 8));
      if (cfg_.initial_targets) {
        truth_targets_ = *cfg_.initial_targets;
      } else {
        for (int m = 0; m < cfg_.num_targets; ++m) {
          Eigen::Vector4d y = Eigen::Vector4d::Zero();
          y.x() = init_rng_.uniform(inner.min().x(), inner.max().x());
          y.y() = init_rng_.uniform(inner.min().y(), inner.max().y());
          truth_targets_.push_back(y);
        }
      }
      for (int m = 0; m < cfg_.num_targets; ++m) {
        estimation::GaussianBelief b;
        b.mean = truth_targets_[m];
        Eigen::Vector4d d(cfg_.prior_pos_var, cfg_.prior_pos_var, cfg_.prior_vel_var,
                          cfg_.prior_vel_var);
        b.cov = d.asDiagonal();
        belief_.targets.push_back(std::move(b));
      }
      belief_.since_visit.assign(cfg_.num_targets, 0);
      if (cfg_.q > 0.0) {
        const Eigen::Matrix4d W = world::double_integrator_model(cfg_.tau, cfg_.q).W;
        noise_chol_ = Eigen::LLT<Eigen::Matrix4d>(W).matrixL();
      }
    } else if (cfg_.kind == ScenarioKind::Surveillance) {
      landmark_model_ = std::make_unique<scenarios::LandmarkTargetModel>(
          cfg_.q, cfg_.sensor.r_sense, cfg_.range_sigma);
      for (int m = 0; m < cfg_.num_targets; ++m) {
        estimation::GaussianBelief b;
        b.mean = cfg_.landmarks[m];
        b.cov = cfg_.prior_landmark_var * Eigen::Matrix3d::Identity();
        belief_.targets.push_back(std::move(b));
      }
      belief_.since_visit.assign(cfg_.num_targets, 0);
    } else {
      grid_ = estimation::OccupancyGrid::uniform(cfg_.truth_map.rows, cfg_.truth_map.cols,
                                                 cfg_.truth_map.resolution,
                                                 cfg_.truth_map.origin);
    }
  }

  std::vector<const estimation::TargetModel*> models() const {
    std::vector<const estimation::TargetModel*> out;
    const estimation::TargetModel* model =
        cfg_.kind == ScenarioKind::Tracking
            ? static_cast<const estimation::TargetModel*>(tracking_model_.get())
            : static_cast<const estimation::TargetModel*>(landmark_model_.get());
    out.assign(cfg_.num_targets, model);
    return out;
  }

  std::unique_ptr<JointObjective> make_objective(int first_meas_step) const {
    estimation::RolloutSetup setup = setup_;
    setup.robot_states = snapshot_states_;
    setup.first_meas_step = first_meas_step;
    if (cfg_.kind == ScenarioKind::Occupancy) {
      return std::make_unique<estimation::CsqmiObjective>(setup, snapshot_grid_, cfg_.beam,
                                                          cfg_.csqmi);
    }
    return std::make_unique<estimation::EkfRolloutObjective>(setup, snapshot_belief_, models());
  }

  void replan() {
    snapshot_states_ = states_;
    snapshot_belief_ = belief_;
    snapshot_grid_ = grid_;
    const auto objective = make_objective(1);
    if (planner_ == PlannerKind::Rain) {
      auto result = rtp(*objective, robots_, cfg_.horizon.alpha);
      plans_ = std::move(result.assignment.plans);
    } else {
      auto result = coordinate_descent(*objective, robots_);
      plans_ = std::move(result.plans);
    }
  }

  setfn::AttackSet draw_attack_now(int t, int window_start) {
    if (attack_model_.kind == attacks::AttackKind::None || attack_model_.alpha == 0) {
      return {{}, attack_model_.alpha};
    }
    if (attack_model_.kind == attacks::AttackKind::Random) {
      setfn::SetObjective dummy(cfg_.num_robots, [](setfn::SubsetMask) { return 0.0; });
      return attacks::draw_attack(attack_model_, dummy);
    }
    // Worst-case attackers score removals on the remaining planned window,
    // from the planning-time belief.
    const auto objective = make_objective(t + 1 - window_start);
    const auto set_view = make_set_objective(*objective, plans_);
    return attacks::draw_attack(attack_model_, set_view);
  }

  void advance_truth() {
    if (cfg_.kind != ScenarioKind::Tracking) return;  // maps and landmarks are static
    const Eigen::Matrix4d F = world::double_integrator_model(cfg_.tau, cfg_.q).F;
    for (auto& y : truth_targets_) {
      Eigen::Vector4d xi;
      for (int i = 0; i < 4; ++i) xi(i) = target_rng_.normal();
      y = F * y + noise_chol_ * xi;
      // Reflect position and velocity at the environment boundary.
      for (int axis = 0; axis < 2; ++axis) {
        const double lo = cfg_.bounds.min()(axis);
        const double hi = cfg_.bounds.max()(axis);
        if (y(axis) < lo) {
          y(axis) = 2 * lo - y(axis);
          y(axis + 2) = -y(axis + 2);
        } else if (y(axis) > hi) {
          y(axis) = 2 * hi - y(axis);
          y(axis + 2) = -y(axis + 2);
        }
      }
    }
  }

  void fuse_and_record(setfn::SubsetMask attacked, TrialRecord& rec) {
    if (cfg_.kind == ScenarioKind::Occupancy) {
      for (int i = 0; i < cfg_.num_robots; ++i) {
        if (setfn::mask_contains(attacked, i)) continue;
        std::vector<double> zs(cfg_.beam.num_beams);
        for (int b = 0; b < cfg_.beam.num_beams; ++b) {
          const double heading = states_[i].theta + 2.0 * M_PI * b / cfg_.beam.num_beams;
          const double d =
              estimation::trace_true_range(cfg_.truth_map, states_[i], heading, cfg_.beam.z_max);
          double center = d;
          if (d < cfg_.beam.z_min) center = 0.0;
          else if (d > cfg_.beam.z_max) center = cfg_.beam.z_max;
          zs[b] = std::clamp(center + cfg_.beam.sigma * meas_rng_.normal(), 0.0,
                             cfg_.beam.z_max);
        }
        grid_ = estimation::grid_update(grid_, states_[i], zs, cfg_.beam);
      }
      rec.grid_entropy = estimation::grid_entropy(grid_);
      return;
    }

    // EKF scenarios: predict, then fuse the non-attacked robots' measurements.
    const auto mods = models();
    for (int m = 0; m < cfg_.num_targets; ++m) {
      belief_.targets[m] = estimation::kf_predict(
          belief_.targets[m], mods[m]->transition(),
          mods[m]->process_noise(belief_.since_visit[m]));
    }
    std::vector<uint8_t> observed(cfg_.num_targets, 0);
    for (int i = 0; i < cfg_.num_robots; ++i) {
      if (setfn::mask_contains(attacked, i)) continue;
      for (int m = 0; m < cfg_.num_targets; ++m) {
        if (cfg_.kind == ScenarioKind::Tracking) {
          // Physical gating on the true target; linearization at the mean.
          auto truth_obs =
              world::range_bearing_observe(states_[i], truth_targets_[m].head<2>(), cfg_.sensor);
          if (!truth_obs) continue;
          Eigen::Vector2d z = truth_obs->h;
          z(0) += std::sqrt(truth_obs->V(0, 0)) * meas_rng_.normal();
          z(1) = world::wrap_angle(z(1) + std::sqrt(truth_obs->V(1, 1)) * meas_rng_.normal());
          auto lin = mods[m]->observe(states_[i], belief_.targets[m].mean);
          if (!lin) continue;  // estimate too far off to linearize in view
          const Eigen::VectorXd residual = mods[m]->residual(z, lin->predicted);
          belief_.targets[m] =
              estimation::kf_update(belief_.targets[m], lin->H, lin->V, residual);
          observed[m] = 1;
        } else {
          const Eigen::Vector3d truth = cfg_.landmarks[m];
          auto truth_obs = world::range_only_observe(states_[i], truth, cfg_.sensor.r_sense,
                                                     cfg_.range_sigma);
          if (!truth_obs) continue;
          // Landmark positions are known; the artificial uncertainty is
          // collapsed by a covariance-only update.
          auto lin = mods[m]->observe(states_[i], belief_.targets[m].mean);
          if (!lin) continue;
          belief_.targets[m] =
              estimation::kf_update_covariance(belief_.targets[m], lin->H, lin->V);
          observed[m] = 1;
        }
      }
    }
    for (int m = 0; m < cfg_.num_targets; ++m) {
      belief_.since_visit[m] = observed[m] ? 0 : belief_.since_visit[m] + 1;
      const int d = mods[m]->dim();
      rec.target_entropy.push_back(
          0.5 * (d * std::log(2.0 * M_PI * M_E) + estimation::logdet_spd(belief_.targets[m].cov)));
      if (cfg_.kind == ScenarioKind::Tracking) {
        rec.target_rmse.push_back(
            (belief_.targets[m].mean.head<2>() - truth_targets_[m].head<2>()).norm());
      }
    }
    if (cfg_.kind == ScenarioKind::Surveillance) {
      rec.since_visit = belief_.since_visit;
      rec.observed = observed;
    }
  }

  ScenarioConfig cfg_;
  PlannerKind planner_;
  scenarios::AttackConfig attack_cfg_;
  Rng init_rng_;
  Rng target_rng_;
  Rng meas_rng_;
  attacks::AttackModel attack_model_;

  estimation::RolloutSetup setup_;
  std::vector<RobotId> robots_;
  std::vector<world::RobotState> states_;
  std::vector<Eigen::Vector4d> truth_targets_;
  Eigen::Matrix4d noise_chol_ = Eigen::Matrix4d::Zero();
  estimation::BeliefState belief_;
  estimation::OccupancyGrid grid_;

  std::unique_ptr<scenarios::TrackingTargetModel> tracking_model_;
  std::unique_ptr<scenarios::LandmarkTargetModel> landmark_model_;

  IndexPlans plans_;
  std::vector<world::RobotState> snapshot_states_;
  estimation::BeliefState snapshot_belief_;
  estimation::OccupancyGrid snapshot_grid_;
};

}  // namespace

Trial rain_run(const scenarios::ScenarioConfig& scenario, PlannerKind planner,
               const scenarios::AttackConfig& attack, uint64_t seed) {
  TrialRunner runner(scenario, planner, attack, seed);
  return runner.run();
}

}  // namespace rain::planning
