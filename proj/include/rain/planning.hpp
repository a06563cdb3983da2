#pragma once

#include <vector>

#include "rain/error.hpp"
#include "rain/objective.hpp"
#include "rain/setfn.hpp"
#include "rain/world.hpp"

namespace rain::planning {

using setfn::RobotId;
using setfn::SubsetMask;

struct HorizonConfig {
  int t_task = 1;
  int t_plan = 1;
  int t_replan = 1;
  int alpha = 0;

  // Enforces 1 <= t_replan <= t_plan <= t_task and 0 <= alpha <= num_robots
  // (alpha above the team size is clamped down).
  void validate(int num_robots);
};

struct PlanAssignment {
  IndexPlans plans;                  // one decision sequence per robot in V
  double value = 0.0;                // objective of the full team under this assignment
  SubsetMask planned = 0;            // robots covered by `plans`
  std::vector<double> stage_values;  // team value after each robot (coordinate descent)
};

struct SingleRobotPlan {
  IndexSeq seq;
  double value = 0.0;
};

enum class JointSolver { CoordinateDescent, ExactJoint };

enum class PlannerKind { Rain, NonResilient };

struct RtpResult {
  PlanAssignment assignment;
  std::vector<RobotId> bait;              // L, ascending; |L| = min(alpha, |V|)
  std::vector<double> singleton_values;   // value of planning alone, indexed by RobotId
};

// Expand a decision sequence into per-step control inputs of length t_plan.
world::ControlSequence expand_controls(const IndexSeq& seq,
                                       const std::vector<world::ControlInput>& control_set,
                                       int t_plan, int control_hold);

// Exhaustive forward search over all decision sequences of one robot, with
// the context robots' plans held fixed; returns the maximizer. Ties go to
// the lexicographically smallest sequence. Guarded to 1e7 sequences.
SingleRobotPlan single_robot_plan(const JointObjective& objective, RobotId robot,
                                  const IndexPlans& context, SubsetMask context_active);

// Robots plan one at a time in ascending id order, each conditioning on the
// previously fixed plans. stage_values records the team value after each
// robot; it is non-decreasing for a monotone objective.
PlanAssignment coordinate_descent(const JointObjective& objective,
                                  const std::vector<RobotId>& robots,
                                  const IndexPlans& context = {},
                                  SubsetMask context_active = 0);

// Brute force over the joint assignment space of `robots` (context fixed).
// Used where the suboptimality analysis assumes exact subsolvers.
PlanAssignment exact_joint_plan(const JointObjective& objective,
                                const std::vector<RobotId>& robots,
                                const IndexPlans& context = {},
                                SubsetMask context_active = 0);

// Robust trajectory planner: picks the `alpha` robots with the largest
// single-robot values as the bait set L (ties to the lowest id), assigns
// each its individually best plan, and plans the remaining robots jointly
// while ignoring the bait's measurements.
RtpResult rtp(const JointObjective& objective, const std::vector<RobotId>& robots, int alpha,
              JointSolver step2 = JointSolver::CoordinateDescent);

}  // namespace rain::planning
