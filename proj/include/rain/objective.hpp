#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "rain/setfn.hpp"

namespace rain::planning {

// A plan is a sequence of decision indices; each index selects one entry of
// the scenario's admissible control set (or, for synthetic objectives, one
// abstract option). Length equals the number of decisions in the horizon.
using IndexSeq = std::vector<int>;

// One plan per robot, indexed by RobotId. Entries of robots outside the
// active set may be empty.
using IndexPlans = std::vector<IndexSeq>;

using SingleRobotEvaluator = std::function<double(const IndexSeq&)>;

// Team objective evaluated on a joint plan restricted to an active robot
// subset. Implementations must be pure; value() must not depend on any
// mutable state so subsets can be evaluated concurrently.
class JointObjective {
 public:
  virtual ~JointObjective() = default;

  virtual int num_robots() const = 0;
  virtual int decisions_per_robot() const = 0;
  virtual int options_per_decision() const = 0;

  virtual double value(const IndexPlans& plans, uint64_t active) const = 0;

  // Evaluator specialized for varying `robot`'s plan while the context
  // robots' plans stay fixed. Must equal value() on the combined input
  // bit-for-bit. The default just substitutes and re-evaluates; scenario
  // objectives override it to cache the context work.
  virtual SingleRobotEvaluator bind_single(const IndexPlans& fixed, uint64_t context_active,
                                           int robot) const;

  // Optional exhaustive argmax over one robot's plan space with the context
  // fixed. Implementations must return the lexicographically first maximizer
  // and match value() exactly. Returns false when unsupported, in which case
  // the planner enumerates through bind_single.
  virtual bool best_single(const IndexPlans& /*fixed*/, uint64_t /*context_active*/,
                           int /*robot*/, IndexSeq& /*best_seq*/, double& /*best_value*/) const {
    return false;
  }
};

// Set-function view of a joint objective under fixed plans (memoized).
setfn::SetObjective make_set_objective(const JointObjective& objective, IndexPlans plans);

// All index sequences of the given shape, in lexicographic order.
std::vector<IndexSeq> enumerate_sequences(int decisions, int options);

}  // namespace rain::planning
