#include "rain/planning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rain/parallel.hpp"

namespace rain::planning {

namespace {

long sequence_count(const JointObjective& objective) {
  const double count =
      std::pow(static_cast<double>(objective.options_per_decision()),
               static_cast<double>(objective.decisions_per_robot()));
  if (count > 1e7) {
    throw_error(ErrorCode::SearchSpaceTooLarge,
                "single-robot search tree has " + std::to_string(count) + " nodes");
  }
  return static_cast<long>(count);
}

// Decode a lexicographic rank (first decision most significant) into a
// sequence.
void decode_rank(long rank, int decisions, int options, IndexSeq& seq) {
  for (int d = decisions - 1; d >= 0; --d) {
    seq[d] = static_cast<int>(rank % options);
    rank /= options;
  }
}

}  // namespace

void HorizonConfig::validate(int num_robots) {
  if (t_replan < 1 || t_replan > t_plan || t_plan > t_task) {
    throw_error(ErrorCode::ConfigInvalid, "need 1 <= t_replan <= t_plan <= t_task");
  }
  if (alpha < 0) throw_error(ErrorCode::ConfigInvalid, "alpha must be non-negative");
  if (alpha > num_robots) alpha = num_robots;
}

world::ControlSequence expand_controls(const IndexSeq& seq,
                                       const std::vector<world::ControlInput>& control_set,
                                       int t_plan, int control_hold) {
  world::ControlSequence out;
  out.reserve(t_plan);
  for (int s = 0; s < t_plan; ++s) out.push_back(control_set[seq[s / control_hold]]);
  return out;
}

SingleRobotPlan single_robot_plan(const JointObjective& objective, RobotId robot,
                                  const IndexPlans& context, SubsetMask context_active) {
  const int decisions = objective.decisions_per_robot();
  const int options = objective.options_per_decision();
  const long total = sequence_count(objective);

  IndexPlans padded = context;
  padded.resize(objective.num_robots());

  {
    SingleRobotPlan plan;
    plan.seq.assign(decisions, 0);
    if (objective.best_single(padded, context_active, robot, plan.seq, plan.value)) {
      return plan;
    }
  }
  auto evaluate = objective.bind_single(padded, context_active, robot);

  long best_rank = 0;
  double best_value = -std::numeric_limits<double>::infinity();

#ifdef _OPENMP
  if (parallel_enabled() && total >= 64) {
    long global_rank = -1;
    double global_value = -std::numeric_limits<double>::infinity();
#pragma omp parallel num_threads(jobs())
    {
      auto local_eval = objective.bind_single(padded, context_active, robot);
      IndexSeq seq(decisions);
      long local_rank = -1;
      double local_value = -std::numeric_limits<double>::infinity();
#pragma omp for schedule(static)
      for (long rank = 0; rank < total; ++rank) {
        decode_rank(rank, decisions, options, seq);
        const double v = local_eval(seq);
        if (v > local_value || (v == local_value && rank < local_rank)) {
          local_value = v;
          local_rank = rank;
        }
      }
#pragma omp critical
      {
        if (local_rank >= 0 && (local_value > global_value ||
                                (local_value == global_value && local_rank < global_rank))) {
          global_value = local_value;
          global_rank = local_rank;
        }
      }
    }
    best_rank = global_rank;
    best_value = global_value;
  } else
#endif
  {
    IndexSeq seq(decisions);
    for (long rank = 0; rank < total; ++rank) {
      decode_rank(rank, decisions, options, seq);
      const double v = evaluate(seq);
      if (v > best_value) {  // ties keep the lexicographically first sequence
        best_value = v;
        best_rank = rank;
      }
    }
  }

  SingleRobotPlan plan;
  plan.seq.resize(decisions);
  decode_rank(best_rank, decisions, options, plan.seq);
  plan.value = best_value;
  return plan;
}

PlanAssignment coordinate_descent(const JointObjective& objective,
                                  const std::vector<RobotId>& robots,
                                  const IndexPlans& context, SubsetMask context_active) {
  std::vector<RobotId> order = robots;
  std::sort(order.begin(), order.end());

  PlanAssignment result;
  result.plans = context;
  result.plans.resize(objective.num_robots());
  SubsetMask active = context_active;
  result.value = objective.value(result.plans, active);

  for (RobotId robot : order) {
    const SingleRobotPlan plan = single_robot_plan(objective, robot, result.plans, active);
    result.plans[robot] = plan.seq;
    active |= SubsetMask{1} << robot;
    result.value = plan.value;
    result.stage_values.push_back(plan.value);
  }
  result.planned = active & ~context_active;
  return result;
}

PlanAssignment exact_joint_plan(const JointObjective& objective,
                                const std::vector<RobotId>& robots,
                                const IndexPlans& context, SubsetMask context_active) {
  std::vector<RobotId> order = robots;
  std::sort(order.begin(), order.end());
  const int k = static_cast<int>(order.size());
  const int decisions = objective.decisions_per_robot();
  const int options = objective.options_per_decision();
  const long per_robot = sequence_count(objective);

  double joint = 1.0;
  for (int i = 0; i < k; ++i) joint *= static_cast<double>(per_robot);
  if (joint > 1e7) {
    throw_error(ErrorCode::SearchSpaceTooLarge, "joint assignment space too large");
  }
  const long total = std::max<long>(1, static_cast<long>(joint));

  SubsetMask active = context_active;
  for (RobotId r : order) active |= SubsetMask{1} << r;

  auto assignment_value = [&](long index, IndexPlans& plans) {
    long rem = index;
    for (int i = k - 1; i >= 0; --i) {
      decode_rank(rem % per_robot, decisions, options, plans[order[i]]);
      rem /= per_robot;
    }
    return objective.value(plans, active);
  };

  IndexPlans base = context;
  base.resize(objective.num_robots());
  for (RobotId r : order) base[r].assign(decisions, 0);

  long best_index = 0;
  double best_value = -std::numeric_limits<double>::infinity();
#ifdef _OPENMP
  if (parallel_enabled() && total >= 64) {
    long global_index = -1;
    double global_value = -std::numeric_limits<double>::infinity();
#pragma omp parallel num_threads(jobs())
    {
      IndexPlans plans = base;
      long local_index = -1;
      double local_value = -std::numeric_limits<double>::infinity();
#pragma omp for schedule(static)
      for (long i = 0; i < total; ++i) {
        const double v = assignment_value(i, plans);
        if (v > local_value || (v == local_value && i < local_index)) {
          local_value = v;
          local_index = i;
        }
      }
#pragma omp critical
      {
        if (local_index >= 0 && (local_value > global_value ||
                                 (local_value == global_value && local_index < global_index))) {
          global_value = local_value;
          global_index = local_index;
        }
      }
    }
    best_index = global_index;
    best_value = global_value;
  } else
#endif
  {
    IndexPlans plans = base;
    for (long i = 0; i < total; ++i) {
      const double v = assignment_value(i, plans);
      if (v > best_value) {
        best_value = v;
        best_index = i;
      }
    }
  }

  PlanAssignment result;
  result.plans = base;
  long rem = best_index;
  for (int i = k - 1; i >= 0; --i) {
    decode_rank(rem % per_robot, decisions, options, result.plans[order[i]]);
    rem /= per_robot;
  }
  result.value = best_value;
  result.planned = active & ~context_active;
  return result;
}

RtpResult rtp(const JointObjective& objective, const std::vector<RobotId>& robots, int alpha,
              JointSolver step2) {
  std::vector<RobotId> order = robots;
  std::sort(order.begin(), order.end());
  const int n = static_cast<int>(order.size());
  alpha = std::clamp(alpha, 0, n);

  // Step 1: each robot plans alone, with no other robots and no attacks.
  std::vector<SingleRobotPlan> singles(order.size());
  const IndexPlans empty_context(objective.num_robots());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(jobs()) if (parallel_enabled())
#endif
  for (int i = 0; i < n; ++i) {
    singles[i] = single_robot_plan(objective, order[i], empty_context, 0);
  }

  // The bait set: alpha robots with the largest singleton values, ties to
  // the lowest id.
  std::vector<int> by_value(order.size());
  std::iota(by_value.begin(), by_value.end(), 0);
  std::stable_sort(by_value.begin(), by_value.end(), [&](int a, int b) {
    if (singles[a].value != singles[b].value) return singles[a].value > singles[b].value;
    return order[a] < order[b];
  });

  RtpResult result;
  result.singleton_values.assign(objective.num_robots(), 0.0);
  for (int i = 0; i < n; ++i) result.singleton_values[order[i]] = singles[i].value;

  result.assignment.plans.resize(objective.num_robots());
  SubsetMask bait_mask = 0;
  for (int i = 0; i < alpha; ++i) {
    const int idx = by_value[i];
    result.bait.push_back(order[idx]);
    result.assignment.plans[order[idx]] = singles[idx].seq;
    bait_mask |= SubsetMask{1} << order[idx];
  }
  std::sort(result.bait.begin(), result.bait.end());

  // Step 2: the remaining robots plan as if the bait did not exist.
  std::vector<RobotId> rest;
  for (RobotId r : order) {
    if (!setfn::mask_contains(bait_mask, r)) rest.push_back(r);
  }
  if (!rest.empty()) {
    const PlanAssignment joint =
        (step2 == JointSolver::ExactJoint)
            ? exact_joint_plan(objective, rest, result.assignment.plans, 0)
            : coordinate_descent(objective, rest, result.assignment.plans, 0);
    for (RobotId r : rest) result.assignment.plans[r] = joint.plans[r];
    result.assignment.stage_values = joint.stage_values;
  }

  SubsetMask team = 0;
  for (RobotId r : order) team |= SubsetMask{1} << r;
  result.assignment.planned = team;
  result.assignment.value = objective.value(result.assignment.plans, team);
  return result;
}

}  // namespace rain::planning
