#include <algorithm>
#include <cmath>
#include <limits>

#include "rain/harness.hpp"
#include "rain/parallel.hpp"

namespace rain::harness {

namespace {

using planning::IndexPlans;
using planning::IndexSeq;
using planning::JointObjective;

// Weighted-coverage objective with per-element count exponents:
//   f(S) = sum_e w_e * n_e(S)^{gamma_e},
// where n_e counts the active robots whose chosen plan covers e. Concave
// exponents (<= 1) give a submodular function for every assignment; exponents
// above 1 break submodularity while keeping monotonicity.
class CoverageObjective final : public JointObjective {
 public:
  CoverageObjective(int robots, int decisions, int options,
                    std::vector<std::vector<uint32_t>> cover, std::vector<double> weights,
                    std::vector<double> exponents)
      : robots_(robots),
        decisions_(decisions),
        options_(options),
        cover_(std::move(cover)),
        weights_(std::move(weights)) {
    const int elements = static_cast<int>(weights_.size());
    powers_.resize(elements);
    for (int e = 0; e < elements; ++e) {
      powers_[e].resize(robots_ + 1);
      for (int c = 0; c <= robots_; ++c) {
        powers_[e][c] = weights_[e] * std::pow(static_cast<double>(c), exponents[e]);
      }
    }
  }

  int num_robots() const override { return robots_; }
  int decisions_per_robot() const override { return decisions_; }
  int options_per_decision() const override { return options_; }

  int plans_per_robot() const {
    int p = 1;
    for (int d = 0; d < decisions_; ++d) p *= options_;
    return p;
  }

  int plan_index(const IndexSeq& seq) const {
    int idx = 0;
    for (int d = 0; d < decisions_; ++d) idx = idx * options_ + seq[d];
    return idx;
  }

  double value_by_choice(const std::vector<int>& choice, uint64_t active) const {
    const int elements = static_cast<int>(weights_.size());
    int counts[32] = {0};
    for (int i = 0; i < robots_; ++i) {
      if (!((active >> i) & 1ull)) continue;
      const uint32_t mask = cover_[i][choice[i]];
      for (int e = 0; e < elements; ++e) {
        if ((mask >> e) & 1u) ++counts[e];
      }
    }
    double total = 0.0;
    for (int e = 0; e < elements; ++e) total += powers_[e][counts[e]];
    return total;
  }

  double value(const IndexPlans& plans, uint64_t active) const override {
    std::vector<int> choice(robots_, 0);
    for (int i = 0; i < robots_; ++i) {
      if (((active >> i) & 1ull) && !plans[i].empty()) choice[i] = plan_index(plans[i]);
    }
    return value_by_choice(choice, active);
  }

 private:
  int robots_;
  int decisions_;
  int options_;
  std::vector<std::vector<uint32_t>> cover_;  // [robot][plan] -> element mask
  std::vector<double> weights_;
  std::vector<std::vector<double>> powers_;   // [element][count] -> w * count^gamma
};

IndexSeq seq_from_plan_index(int index, int decisions, int options) {
  IndexSeq seq(decisions, 0);
  for (int d = decisions - 1; d >= 0; --d) {
    seq[d] = index % options;
    index /= options;
  }
  return seq;
}

// Total curvature over (robot, plan) elements: marginal ratios of the same
// robot-with-plan across every context subset and every context assignment.
// This is the curvature notion the coordinate-descent analysis leans on; it
// upper-bounds the fixed-assignment total curvature.
double extended_total_curvature(const CoverageObjective& obj) {
  const int n = obj.num_robots();
  const int plans = obj.plans_per_robot();
  double min_ratio = 1.0;

  std::vector<int> choice(n, 0);
  for (int v = 0; v < n; ++v) {
    const uint64_t rest_mask = setfn::full_mask(n) & ~(1ull << v);
    for (int pv = 0; pv < plans; ++pv) {
      double min_marginal = std::numeric_limits<double>::infinity();
      double max_marginal = -std::numeric_limits<double>::infinity();
      // Iterate every subset of the other robots and every assignment of
      // plans to that subset: robots outside the subset keep plan 0 but are
      // masked out, so their entry is irrelevant.
      uint64_t sub = 0;
      while (true) {
        std::vector<int> members = setfn::mask_to_ids(sub);
        std::vector<int> assign(members.size(), 0);
        while (true) {
          for (size_t i = 0; i < members.size(); ++i) choice[members[i]] = assign[i];
          choice[v] = pv;
          const double with = obj.value_by_choice(choice, sub | (1ull << v));
          const double without = obj.value_by_choice(choice, sub);
          const double m = with - without;
          min_marginal = std::min(min_marginal, m);
          max_marginal = std::max(max_marginal, m);
          size_t d = 0;
          while (d < assign.size() && assign[d] == plans - 1) assign[d++] = 0;
          if (d == assign.size()) break;
          ++assign[d];
        }
        if (sub == rest_mask) break;
        sub = (sub - rest_mask) & rest_mask;
      }
      if (max_marginal < 1e-12) continue;
      min_ratio = std::min(min_ratio, min_marginal / max_marginal);
    }
  }
  return std::clamp(1.0 - min_ratio, 0.0, 1.0);
}

struct InstanceOutcome {
  double ratio_exact = 1.0;   // attacked value of exact-RTP / robust optimum
  double ratio_cd = 1.0;      // attacked value of cd-RTP / robust optimum
  double kappa_exact = 0.0, kappa_cd = 0.0;
  double c_exact = 0.0, c_cd = 0.0, c_ext = 0.0;
  double cd_over_opt = 1.0;   // coordinate descent / brute-force joint optimum
  bool alpha0_plans_match = true;
  double kappa_minus_c = 0.0;  // submodular instances: |kappa - c|
  double kappa_modular = 0.0, c_modular = 0.0;
  bool degenerate = false;
};

InstanceOutcome evaluate_instance(const SyntheticInstance& inst) {
  const auto& obj = *std::static_pointer_cast<CoverageObjective>(inst.objective);
  const int n = obj.num_robots();
  std::vector<planning::RobotId> team(n);
  for (int i = 0; i < n; ++i) team[i] = i;
  const uint64_t full = setfn::full_mask(n);

  InstanceOutcome out;

  // Robust optimum q*(V, alpha).
  std::vector<int> plan_counts(n, obj.plans_per_robot());
  const double q_star = setfn::robust_value_oracle(
      plan_counts,
      [&](std::span<const int> choice, setfn::SubsetMask keep) {
        return obj.value_by_choice(std::vector<int>(choice.begin(), choice.end()), keep);
      },
      inst.alpha);
  if (q_star <= 1e-12) {
    out.degenerate = true;
    return out;
  }

  auto attacked_ratio = [&](const planning::PlanAssignment& assignment, double& kappa,
                            double& total_c) {
    setfn::SetObjective fhat = planning::make_set_objective(obj, assignment.plans);
    kappa = inst.family == ObjectiveFamily::Monotone ? 0.0 : setfn::curvature(fhat);
    total_c = setfn::total_curvature(fhat);
    const auto worst = setfn::exact_attack(fhat, inst.alpha);
    return fhat.value(full & ~worst.removed_mask()) / q_star;
  };

  const auto rtp_exact = planning::rtp(obj, team, inst.alpha, planning::JointSolver::ExactJoint);
  out.ratio_exact = attacked_ratio(rtp_exact.assignment, out.kappa_exact, out.c_exact);

  const auto rtp_cd = planning::rtp(obj, team, inst.alpha, planning::JointSolver::CoordinateDescent);
  out.ratio_cd = attacked_ratio(rtp_cd.assignment, out.kappa_cd, out.c_cd);

  // Coordinate descent against the brute-force joint optimum.
  const auto cd = planning::coordinate_descent(obj, team);
  const auto opt = planning::exact_joint_plan(obj, team);
  out.cd_over_opt = cd.value / opt.value;

  if (inst.family == ObjectiveFamily::Monotone) {
    out.c_ext = extended_total_curvature(obj);
  }

  // alpha = 0 reduces the robust planner to plain coordinate descent.
  const auto rtp0 = planning::rtp(obj, team, 0, planning::JointSolver::CoordinateDescent);
  out.alpha0_plans_match = rtp0.assignment.plans == cd.plans;

  if (inst.family != ObjectiveFamily::Monotone) {
    out.kappa_minus_c = std::abs(out.kappa_exact - out.c_exact);
  }
  if (inst.family == ObjectiveFamily::Modular) {
    out.kappa_modular = out.kappa_exact;
    out.c_modular = out.c_exact;
  }
  return out;
}

void tally(BoundCheck& check, double ratio, double bound, double tol = 1e-9) {
  ++check.instances;
  const double margin = ratio - bound;
  check.worst_margin = std::min(check.worst_margin, margin);
  if (margin < -tol) ++check.violations;
}

}  // namespace

bool BoundSuiteReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const BoundCheck& c) { return c.violations == 0; });
}

SyntheticInstance make_synthetic_instance(Rng& rng, ObjectiveFamily family, int max_team) {
  SyntheticInstance inst;
  inst.family = family;
  inst.alpha = 1 + rng.uniform_int(2);

  // Monotone (possibly non-submodular) instances stay small so the extended
  // curvature enumeration is cheap.
  const int team_cap = family == ObjectiveFamily::Monotone ? std::min(4, max_team) : max_team;
  int n = inst.alpha + 1 + rng.uniform_int(std::max(1, team_cap - inst.alpha));
  n = std::min(n, team_cap);

  int t_plan = 1 + rng.uniform_int(2);
  int options = 2 + rng.uniform_int(2);
  if (family == ObjectiveFamily::Monotone && t_plan == 2 && options == 3) options = 2;
  auto per_robot = [&] { return static_cast<int>(std::pow(options, t_plan)); };
  // Keep the joint enumeration spaces small.
  while (std::pow(per_robot(), n) > 2e5 && n > inst.alpha + 1) --n;
  while (std::pow(per_robot(), n) > 2e5 && t_plan > 1) --t_plan;

  const int elements = 4 + rng.uniform_int(7);
  std::vector<double> weights(elements);
  std::vector<double> exponents(elements);
  for (int e = 0; e < elements; ++e) {
    weights[e] = rng.uniform(0.2, 1.0);
    switch (family) {
      case ObjectiveFamily::Modular: exponents[e] = 1.0; break;
      case ObjectiveFamily::Submodular: exponents[e] = rng.uniform(0.3, 1.0); break;
      case ObjectiveFamily::Monotone: exponents[e] = rng.uniform(0.6, 1.45); break;
    }
  }
  if (family == ObjectiveFamily::Monotone) {
    exponents[rng.uniform_int(elements)] = rng.uniform(1.1, 1.45);
  }

  std::vector<std::vector<uint32_t>> cover(n);
  for (int i = 0; i < n; ++i) {
    cover[i].resize(per_robot());
    for (int p = 0; p < per_robot(); ++p) {
      uint32_t mask = 0;
      for (int e = 0; e < elements; ++e) {
        if (rng.uniform() < 0.45) mask |= 1u << e;
      }
      if (mask == 0) mask |= 1u << rng.uniform_int(elements);
      cover[i][p] = mask;
    }
  }

  inst.objective = std::make_shared<CoverageObjective>(n, t_plan, options, std::move(cover),
                                                       std::move(weights), std::move(exponents));
  return inst;
}

BoundSuiteReport run_bound_suite(const BoundSuiteOptions& options) {
  BoundSuiteReport report;
  BoundCheck sub_exact{"submodular: attacked/optimal >= max(1-kappa, 1/(1+alpha))"};
  BoundCheck mono_exact{"monotone: attacked/optimal >= (1-c)^2"};
  BoundCheck sub_cd{"submodular, cd step 2: attacked/optimal >= 1/2 max(1-kappa, 1/(1+alpha))"};
  BoundCheck mono_cd{"monotone, cd step 2: attacked/optimal >= 1/2 (1-c)^3"};
  BoundCheck lemma_sub{"coordinate descent >= 1/2 of joint optimum (submodular)"};
  BoundCheck lemma_mono{"coordinate descent >= (1-c)/2 of joint optimum (monotone)"};
  BoundCheck alpha0{"alpha=0: robust plan equals coordinate descent plan"};
  BoundCheck sanity_mod{"modular: kappa = c = 0"};
  BoundCheck sanity_sub{"submodular: |kappa - c| <= 1e-9"};

  struct Task {
    SyntheticInstance inst;
    InstanceOutcome outcome;
  };
  std::vector<Task> tasks;
  Rng master(options.seed, "bound-suite");
  for (int i = 0; i < options.instances; ++i) {
    ObjectiveFamily family = ObjectiveFamily::Submodular;
    if (i % 3 == 1) family = ObjectiveFamily::Monotone;
    if (i % 3 == 2) family = ObjectiveFamily::Modular;
    tasks.push_back({make_synthetic_instance(master, family, options.max_team), {}});
  }

  const int count = static_cast<int>(tasks.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(jobs()) if (parallel_enabled())
#endif
  for (int i = 0; i < count; ++i) {
    tasks[i].outcome = evaluate_instance(tasks[i].inst);
  }

  for (const auto& [inst, o] : tasks) {
    if (o.degenerate) continue;
    const double inv = 1.0 / (1.0 + inst.alpha);
    if (inst.family == ObjectiveFamily::Monotone) {
      tally(mono_exact, o.ratio_exact, (1.0 - o.c_exact) * (1.0 - o.c_exact));
      const double c3 = (1.0 - o.c_ext) * (1.0 - o.c_ext) * (1.0 - o.c_ext);
      tally(mono_cd, o.ratio_cd, 0.5 * c3);
      tally(lemma_mono, o.cd_over_opt, 0.5 * (1.0 - o.c_ext));
    } else {
      tally(sub_exact, o.ratio_exact, std::max(1.0 - o.kappa_exact, inv));
      tally(sub_cd, o.ratio_cd, 0.5 * std::max(1.0 - o.kappa_cd, inv));
      tally(lemma_sub, o.cd_over_opt, 0.5);
      tally(sanity_sub, 1e-9, o.kappa_minus_c, 0.0);
    }
    if (inst.family == ObjectiveFamily::Modular) {
      tally(sanity_mod, 1e-12, std::max(o.kappa_modular, o.c_modular), 0.0);
    }
    tally(alpha0, o.alpha0_plans_match ? 1.0 : 0.0, 1.0, 0.0);
  }

  report.checks = {sub_exact, mono_exact, sub_cd,     mono_cd,   lemma_sub,
                   lemma_mono, alpha0,    sanity_mod, sanity_sub};
  return report;
}

}  // namespace rain::harness
