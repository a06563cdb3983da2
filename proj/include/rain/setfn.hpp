#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <unordered_map>
#include <vector>

#include "rain/error.hpp"

namespace rain::setfn {

// Robots are identified by dense indices 0..n-1 within a team.
using RobotId = int;

// Subset of a ground set of at most 64 robots, robot i at bit i.
using SubsetMask = uint64_t;

inline SubsetMask full_mask(int n) {
  return n >= 64 ? ~0ull : ((1ull << n) - 1ull);
}
inline bool mask_contains(SubsetMask mask, RobotId i) { return (mask >> i) & 1ull; }
inline int mask_size(SubsetMask mask) { return __builtin_popcountll(mask); }

std::vector<RobotId> mask_to_ids(SubsetMask mask);
SubsetMask ids_to_mask(std::span<const RobotId> ids);

// Monotone set function over robot subsets. Evaluation is pure and
// deterministic; values are memoized by subset bitmask since planners and
// oracles re-evaluate overlapping subsets heavily. Thread-safe.
class SetObjective {
 public:
  SetObjective(int ground_size, std::function<double(SubsetMask)> eval);

  int ground_size() const { return n_; }
  SubsetMask ground_mask() const { return full_mask(n_); }

  double value(SubsetMask subset) const;
  double value(std::span<const RobotId> subset) const;

 private:
  int n_;
  std::function<double(SubsetMask)> eval_;
  mutable std::mutex mu_;
  mutable std::unordered_map<SubsetMask, double> cache_;
};

struct CurvatureReport {
  double kappa = 0.0;    // curvature
  double total_c = 0.0;  // total curvature
  int ground_size = 0;
};

struct AttackSet {
  std::vector<RobotId> removed;  // ascending
  int budget = 0;

  SubsetMask removed_mask() const { return ids_to_mask(removed); }
};

// Curvature of a monotone submodular objective:
//   1 - min_v [f(V) - f(V \ {v})] / f(v).
// Requires f(v) != 0 for every singleton. The raw value is clamped into
// [0, 1] when it exceeds the bounds by at most `tol`, and rejected beyond.
double curvature(const SetObjective& f, double tol = 1e-9);

// Total curvature of a monotone objective:
//   1 - min_v min_{A,B subseteq V\{v}} [f({v} u A) - f(A)] / [f({v} u B) - f(B)],
// by exhaustive enumeration of per-element marginals. Pairs whose denominator
// falls below 1e-12 are skipped. Guarded to |V| <= 12.
double total_curvature(const SetObjective& f, double tol = 1e-9);

// Removes alpha elements iteratively, each round dropping the element whose
// removal minimizes f(V \ removed). Ties go to the lowest RobotId.
AttackSet greedy_attack(const SetObjective& f, int alpha);

// Brute-force minimizer of f(V \ A) over |A| <= alpha. Ties broken by
// lexicographic order of the sorted id list. Guarded by subset count.
AttackSet exact_attack(const SetObjective& f, int alpha);

// Exact robust value: max over joint plan choices of the min over
// alpha-removals of the assignment objective. Plans are addressed by index;
// `value` receives one chosen plan index per robot plus the active subset.
// Guarded by (product of plan counts) * (number of removals).
double robust_value_oracle(
    const std::vector<int>& plan_counts,
    const std::function<double(std::span<const int>, SubsetMask)>& value, int alpha);

// Enumerates subsets of the ground set with size <= max_size in lexicographic
// order of their sorted id lists, invoking fn(mask) for each (including the
// empty set). Used by the attack oracles and exposed for tests.
void for_each_subset_upto(int n, int max_size, const std::function<void(SubsetMask)>& fn);

}  // namespace rain::setfn
