#include "rain/setfn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rain/parallel.hpp"

namespace rain::setfn {

namespace {

// Binomial coefficient, saturating at a large sentinel to avoid overflow.
double choose(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c *= static_cast<double>(n - k + i) / i;
  return c;
}

double subsets_upto(int n, int max_size) {
  double total = 0.0;
  for (int k = 0; k <= max_size; ++k) total += choose(n, k);
  return total;
}

void enumerate_lex(int n, int max_size, SubsetMask current, int size, int next,
                   const std::function<void(SubsetMask)>& fn) {
  fn(current);
  if (size == max_size) return;
  for (int i = next; i < n; ++i) {
    enumerate_lex(n, max_size, current | (1ull << i), size + 1, i + 1, fn);
  }
}

}  // namespace

std::vector<RobotId> mask_to_ids(SubsetMask mask) {
  std::vector<RobotId> ids;
  for (int i = 0; mask >> i; ++i) {
    if (mask_contains(mask, i)) ids.push_back(i);
  }
  return ids;
}

SubsetMask ids_to_mask(std::span<const RobotId> ids) {
  SubsetMask m = 0;
  for (RobotId i : ids) m |= 1ull << i;
  return m;
}

SetObjective::SetObjective(int ground_size, std::function<double(SubsetMask)> eval)
    : n_(ground_size), eval_(std::move(eval)) {
  if (n_ < 0 || n_ > 64) throw_error(ErrorCode::ConfigInvalid, "ground set must have 0..64 elements");
}

double SetObjective::value(SubsetMask subset) const {
  subset &= ground_mask();
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(subset);
    if (it != cache_.end()) return it->second;
  }
  const double v = eval_(subset);
  std::lock_guard<std::mutex> lock(mu_);
  cache_.emplace(subset, v);
  return v;
}

double SetObjective::value(std::span<const RobotId> subset) const {
  return value(ids_to_mask(subset));
}

void for_each_subset_upto(int n, int max_size, const std::function<void(SubsetMask)>& fn) {
  enumerate_lex(n, std::min(max_size, n), 0ull, 0, 0, fn);
}

double curvature(const SetObjective& f, double tol) {
  const int n = f.ground_size();
  if (n == 0) return 0.0;
  const SubsetMask all = f.ground_mask();
  const double f_all = f.value(all);

  double min_ratio = std::numeric_limits<double>::infinity();
  for (int v = 0; v < n; ++v) {
    const double fv = f.value(SubsetMask{1} << v);
    if (std::abs(fv) <= 1e-12) {
      throw_error(ErrorCode::SingletonZero, "f({" + std::to_string(v) + "}) = 0");
    }
    const double marginal = f_all - f.value(all & ~(SubsetMask{1} << v));
    if (marginal < -tol) {
      throw_error(ErrorCode::MonotoneViolation,
                  "f(V) < f(V\\{" + std::to_string(v) + "}) by " + std::to_string(-marginal));
    }
    min_ratio = std::min(min_ratio, marginal / fv);
  }

  const double raw = 1.0 - min_ratio;
  if (raw < -tol || raw > 1.0 + tol) {
    throw_error(ErrorCode::CurvatureOutOfRange, "raw curvature " + std::to_string(raw));
  }
  return std::clamp(raw, 0.0, 1.0);
}

double total_curvature(const SetObjective& f, double tol) {
  const int n = f.ground_size();
  if (n == 0) return 0.0;
  if (n > 12) throw_error(ErrorCode::GroundSetTooLarge, "|V| = " + std::to_string(n) + " > 12");

  // For each element the admissible pair ratio is minimized by the smallest
  // marginal over the largest one, so a single sweep over subsets of V\{v}
  // suffices; this equals the pairwise enumeration exactly.
  constexpr double kDenomFloor = 1e-12;
  double min_ratio = std::numeric_limits<double>::infinity();
  bool any_admissible = false;
  for (int v = 0; v < n; ++v) {
    const SubsetMask rest = f.ground_mask() & ~(SubsetMask{1} << v);
    double min_marginal = std::numeric_limits<double>::infinity();
    double max_marginal = -std::numeric_limits<double>::infinity();
    // Enumerate subsets of `rest` via the standard subset-walk of its bits.
    SubsetMask sub = 0;
    while (true) {
      const double m = f.value(sub | (SubsetMask{1} << v)) - f.value(sub);
      min_marginal = std::min(min_marginal, m);
      max_marginal = std::max(max_marginal, m);
      if (sub == rest) break;
      sub = (sub - rest) & rest;
    }
    if (max_marginal < kDenomFloor) continue;  // no admissible denominator for v
    any_admissible = true;
    min_ratio = std::min(min_ratio, min_marginal / max_marginal);
  }
  if (!any_admissible) {
    throw_error(ErrorCode::DegenerateDenominator, "all marginals below 1e-12");
  }

  const double raw = 1.0 - min_ratio;
  if (raw < -tol || raw > 1.0 + tol) {
    throw_error(ErrorCode::CurvatureOutOfRange, "raw total curvature " + std::to_string(raw));
  }
  return std::clamp(raw, 0.0, 1.0);
}

AttackSet greedy_attack(const SetObjective& f, int alpha) {
  const int n = f.ground_size();
  alpha = std::clamp(alpha, 0, n);
  AttackSet attack;
  attack.budget = alpha;
  SubsetMask remaining = f.ground_mask();
  for (int round = 0; round < alpha; ++round) {
    int best = -1;
    double best_value = std::numeric_limits<double>::infinity();
    for (int v = 0; v < n; ++v) {
      if (!mask_contains(remaining, v)) continue;
      const double value = f.value(remaining & ~(SubsetMask{1} << v));
      if (value < best_value) {  // ties keep the lowest id (scan order)
        best_value = value;
        best = v;
      }
    }
    remaining &= ~(SubsetMask{1} << best);
    attack.removed.push_back(best);
  }
  std::sort(attack.removed.begin(), attack.removed.end());
  return attack;
}

AttackSet exact_attack(const SetObjective& f, int alpha) {
  const int n = f.ground_size();
  alpha = std::clamp(alpha, 0, n);
  if (subsets_upto(n, alpha) > 2e6) {
    throw_error(ErrorCode::TooManySubsets, "too many removal candidates");
  }

  std::vector<SubsetMask> candidates;
  for_each_subset_upto(n, alpha, [&](SubsetMask m) { candidates.push_back(m); });

  const SubsetMask all = f.ground_mask();
  const auto count = static_cast<long>(candidates.size());
  long best_idx = 0;
  double best_value = f.value(all & ~candidates[0]);

#ifdef _OPENMP
  if (parallel_enabled() && count > 256) {
    long global_idx = -1;
    double global_value = std::numeric_limits<double>::infinity();
#pragma omp parallel num_threads(jobs())
    {
      long local_idx = -1;
      double local_value = std::numeric_limits<double>::infinity();
#pragma omp for schedule(static)
      for (long i = 0; i < count; ++i) {
        const double v = f.value(all & ~candidates[i]);
        if (v < local_value || (v == local_value && i < local_idx)) {
          local_value = v;
          local_idx = i;
        }
      }
#pragma omp critical
      {
        if (local_idx >= 0 && (local_value < global_value ||
                               (local_value == global_value && local_idx < global_idx))) {
          global_value = local_value;
          global_idx = local_idx;
        }
      }
    }
    best_idx = global_idx;
    best_value = global_value;
  } else
#endif
  {
    for (long i = 1; i < count; ++i) {
      const double v = f.value(all & ~candidates[i]);
      if (v < best_value) {  // ties keep the earliest, i.e. lexicographic, set
        best_value = v;
        best_idx = i;
      }
    }
  }

  AttackSet attack;
  attack.budget = alpha;
  attack.removed = mask_to_ids(candidates[best_idx]);
  return attack;
}

double robust_value_oracle(
    const std::vector<int>& plan_counts,
    const std::function<double(std::span<const int>, SubsetMask)>& value, int alpha) {
  const int n = static_cast<int>(plan_counts.size());
  alpha = std::clamp(alpha, 0, n);

  double assignments = 1.0;
  for (int c : plan_counts) {
    if (c < 1) throw_error(ErrorCode::ConfigInvalid, "robot with no candidate plans");
    assignments *= c;
  }
  if (assignments * subsets_upto(n, alpha) > 1e7) {
    throw_error(ErrorCode::SearchSpaceTooLarge, "joint assignment space too large");
  }

  std::vector<SubsetMask> removals;
  for_each_subset_upto(n, alpha, [&](SubsetMask m) { removals.push_back(m); });
  const SubsetMask all = full_mask(n);
  const long total = static_cast<long>(assignments);

  auto assignment_value = [&](long index) {
    std::vector<int> choice(n);
    long rem = index;
    for (int i = 0; i < n; ++i) {
      choice[i] = static_cast<int>(rem % plan_counts[i]);
      rem /= plan_counts[i];
    }
    double worst = std::numeric_limits<double>::infinity();
    for (SubsetMask removed : removals) {
      worst = std::min(worst, value(choice, all & ~removed));
    }
    return worst;
  };

  double best = -std::numeric_limits<double>::infinity();
#ifdef _OPENMP
  if (parallel_enabled() && total > 64) {
#pragma omp parallel for schedule(static) reduction(max : best) num_threads(jobs())
    for (long a = 0; a < total; ++a) best = std::max(best, assignment_value(a));
    return best;
  }
#endif
  for (long a = 0; a < total; ++a) best = std::max(best, assignment_value(a));
  return best;
}

}  // namespace rain::setfn
