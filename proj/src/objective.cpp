#include "rain/objective.hpp"

namespace rain::planning {

SingleRobotEvaluator JointObjective::bind_single(const IndexPlans& fixed, uint64_t context_active,
                                                 int robot) const {
  IndexPlans plans = fixed;
  const uint64_t active = context_active | (1ull << robot);
  return [this, plans, active, robot](const IndexSeq& seq) mutable {
    plans[robot] = seq;
    return value(plans, active);
  };
}

setfn::SetObjective make_set_objective(const JointObjective& objective, IndexPlans plans) {
  const int n = objective.num_robots();
  return setfn::SetObjective(
      n, [&objective, plans = std::move(plans)](setfn::SubsetMask mask) {
        return objective.value(plans, mask);
      });
}

std::vector<IndexSeq> enumerate_sequences(int decisions, int options) {
  std::vector<IndexSeq> out;
  IndexSeq seq(decisions, 0);
  while (true) {
    out.push_back(seq);
    int d = decisions - 1;
    while (d >= 0 && seq[d] == options - 1) {
      seq[d] = 0;
      --d;
    }
    if (d < 0) break;
    ++seq[d];
  }
  return out;
}

}  // namespace rain::planning
