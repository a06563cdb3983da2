#pragma once

#include <vector>

#include "rain/planning.hpp"
#include "rain/scenarios.hpp"

namespace rain::planning {

struct Trial {
  std::vector<scenarios::TrialRecord> records;
  // Seed-derived initial conditions, recorded for reproducibility.
  std::vector<world::RobotState> initial_poses;
  std::vector<Eigen::Vector4d> initial_targets;  // tracking only
};

// The receding-horizon acquisition loop: every t_replan steps the configured
// planner produces a joint plan from the current belief; each step the
// robots execute one control, the attacker removes up to alpha robots'
// sensing, the remaining measurements are fused, and metrics are recorded.
// Bit-deterministic given (scenario, planner, attack, seed).
Trial rain_run(const scenarios::ScenarioConfig& scenario, PlannerKind planner,
               const scenarios::AttackConfig& attack, uint64_t seed);

}  // namespace rain::planning
