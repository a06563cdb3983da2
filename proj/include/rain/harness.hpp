#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "rain/attacks.hpp"
#include "rain/rng.hpp"
#include "rain/scenarios.hpp"
#include "rain/sim.hpp"

namespace rain::harness {

struct ManifestScenario {
  scenarios::ScenarioKind kind = scenarios::ScenarioKind::Tracking;
  int n = 5;
  int targets = 10;             // targets or landmarks
  std::string map_kind = "squares";
  int alpha = 0;
  nlohmann::json overrides;     // manifest overrides, applied last
};

struct RunManifest {
  ManifestScenario scenario;
  std::vector<planning::PlannerKind> planners = {planning::PlannerKind::Rain,
                                                 planning::PlannerKind::NonResilient};
  std::string attack_kind;      // empty: scenario default
  int attack_alpha = -1;        // -1: follow scenario alpha
  std::string attack_cadence;   // empty: scenario default
  std::vector<uint64_t> seeds = {1};
  std::vector<int> treplan_sweep;  // optional sweep; empty = single point
  std::string output_dir = "out";
  int jobs = 1;
  bool traces = false;
  bool paper_scale = false;     // full published sizes instead of desk scale

  static RunManifest from_json(const nlohmann::json& j);
  static RunManifest from_file(const std::string& path);
};

// Scenario construction with scaling + manifest overrides applied
// (flag > file > default).
scenarios::ScenarioConfig build_scenario(const ManifestScenario& ms, bool paper_scale,
                                         int t_replan_override = 0);
scenarios::AttackConfig resolve_attack(const RunManifest& manifest,
                                       const scenarios::ScenarioConfig& cfg);

struct ResultRow {
  int t_replan = 0;
  uint64_t seed = 0;
  planning::PlannerKind planner = planning::PlannerKind::Rain;
  attacks::AttackKind attack = attacks::AttackKind::None;
  int alpha = 0;
  std::string scenario;
  std::string map;
  scenarios::MetricsSummary metrics;
  std::string status = "ok";
  double wall_seconds = 0.0;  // written to timings.csv only
};

struct ResultTable {
  int schema_version = 1;
  std::vector<ResultRow> rows;  // canonical order: (t_replan, seed, planner)

  bool any_failed() const;
};

// Executes every (t_replan x seed x planner) cell, possibly in parallel;
// writes results.csv, timings.csv and optional per-trial traces into
// manifest.output_dir. The aggregate is independent of the parallelism
// degree.
ResultTable run(const RunManifest& manifest);

void write_results_csv(const ResultTable& table, const std::string& path);
ResultTable read_results_csv(const std::string& path);
void write_timings_csv(const ResultTable& table, const std::string& path);

// Deterministic SVGs derived from results.csv and any trace files present.
// Returns the files written.
std::vector<std::string> emit_plots(const std::string& results_dir);

const char* planner_name(planning::PlannerKind kind);
planning::PlannerKind planner_from_string(const std::string& s);

// ---------------------------------------------------------------------------
// Suboptimality-bound certification on random synthetic instances.

enum class ObjectiveFamily { Modular, Submodular, Monotone };

struct SyntheticInstance {
  std::shared_ptr<planning::JointObjective> objective;
  int alpha = 0;
  ObjectiveFamily family = ObjectiveFamily::Submodular;
};

struct BoundSuiteOptions {
  int instances = 200;
  int max_team = 6;
  uint64_t seed = 20240601;
};

struct BoundCheck {
  std::string name;
  int instances = 0;
  int violations = 0;
  double worst_margin = std::numeric_limits<double>::infinity();  // min(ratio - bound)
};

struct BoundSuiteReport {
  std::vector<BoundCheck> checks;
  bool all_passed() const;
};

SyntheticInstance make_synthetic_instance(Rng& rng, ObjectiveFamily family, int max_team);

// Certifies, with exact and coordinate-descent subsolvers, that the robust
// planner's worst-case-attacked value stays above the curvature bounds, and
// that coordinate descent stays within its half-optimal guarantee.
BoundSuiteReport run_bound_suite(const BoundSuiteOptions& options);

}  // namespace rain::harness
