#include "rain/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rain/parallel.hpp"

namespace rain::harness {

namespace fs = std::filesystem;
using nlohmann::json;

const char* planner_name(planning::PlannerKind kind) {
  return kind == planning::PlannerKind::Rain ? "rain" : "nonresilient";
}

planning::PlannerKind planner_from_string(const std::string& s) {
  if (s == "rain") return planning::PlannerKind::Rain;
  if (s == "nonresilient") return planning::PlannerKind::NonResilient;
  throw_error(ErrorCode::ConfigInvalid, "unknown planner '" + s + "'");
}

RunManifest RunManifest::from_json(const json& j) {
  RunManifest m;
  const auto& sc = j.at("scenario");
  m.scenario.kind = scenarios::scenario_kind_from_string(sc.at("kind").get<std::string>());
  m.scenario.n = sc.value("n", m.scenario.n);
  m.scenario.targets = sc.value("targets", m.scenario.targets);
  m.scenario.map_kind = sc.value("map", m.scenario.map_kind);
  m.scenario.alpha = sc.value("alpha", 0);
  if (sc.contains("overrides")) m.scenario.overrides = sc.at("overrides");

  if (j.contains("planners")) {
    m.planners.clear();
    for (const auto& p : j.at("planners")) {
      m.planners.push_back(planner_from_string(p.get<std::string>()));
    }
  }
  if (j.contains("attack")) {
    const auto& a = j.at("attack");
    m.attack_kind = a.value("kind", std::string{});
    m.attack_alpha = a.value("alpha", -1);
    m.attack_cadence = a.value("cadence", std::string{});
  }
  if (j.contains("seeds")) {
    m.seeds.clear();
    for (const auto& s : j.at("seeds")) m.seeds.push_back(s.get<uint64_t>());
  }
  if (j.contains("treplan_sweep")) {
    m.treplan_sweep.clear();
    for (const auto& s : j.at("treplan_sweep")) m.treplan_sweep.push_back(s.get<int>());
  }
  m.output_dir = j.value("output_dir", m.output_dir);
  m.jobs = j.value("jobs", m.jobs);
  m.traces = j.value("traces", m.traces);
  m.paper_scale = j.value("paper_scale", m.paper_scale);

  if (m.seeds.empty()) throw_error(ErrorCode::ConfigInvalid, "manifest needs seeds");
  std::vector<uint64_t> sorted = m.seeds;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw_error(ErrorCode::ConfigInvalid, "seeds must be distinct");
  }
  return m;
}

RunManifest RunManifest::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_error(ErrorCode::IoError, "cannot read manifest " + path);
  json j;
  in >> j;
  return from_json(j);
}

scenarios::ScenarioConfig build_scenario(const ManifestScenario& ms, bool paper_scale,
                                         int t_replan_override) {
  json overrides = paper_scale ? json::object() : scenarios::desk_scale_overrides(ms.kind);
  for (const auto& [key, value] : ms.overrides.items()) overrides[key] = value;
  if (t_replan_override > 0) overrides["t_replan"] = t_replan_override;

  switch (ms.kind) {
    case scenarios::ScenarioKind::Tracking:
      return scenarios::build_tracking(ms.n, ms.targets, ms.alpha, overrides);
    case scenarios::ScenarioKind::Occupancy:
      return scenarios::build_occupancy(ms.map_kind, ms.alpha, overrides);
    case scenarios::ScenarioKind::Surveillance:
      return scenarios::build_surveillance(ms.n, ms.targets, ms.alpha, overrides);
  }
  throw_error(ErrorCode::ConfigInvalid, "bad scenario kind");
}

scenarios::AttackConfig resolve_attack(const RunManifest& manifest,
                                       const scenarios::ScenarioConfig& cfg) {
  scenarios::AttackConfig attack = cfg.attack;
  if (!manifest.attack_kind.empty()) {
    attack.kind = attacks::attack_kind_from_string(manifest.attack_kind);
  }
  if (manifest.attack_alpha >= 0) attack.alpha = manifest.attack_alpha;
  if (!manifest.attack_cadence.empty()) {
    attack.cadence = manifest.attack_cadence == "per_window"
                         ? attacks::AttackCadence::PerWindow
                         : attacks::AttackCadence::EveryStep;
  }
  return attack;
}

namespace {

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

std::string trace_filename(const ResultRow& row) {
  std::ostringstream name;
  name << "trace_" << row.scenario;
  if (!row.map.empty()) name << "_" << row.map;
  name << "_tr" << row.t_replan << "_" << planner_name(row.planner) << "_"
       << attacks::attack_kind_name(row.attack) << "_seed" << row.seed << ".csv";
  return name.str();
}

void write_trace_csv(const planning::Trial& trial, const scenarios::ScenarioConfig& cfg,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw_error(ErrorCode::IoError, "cannot write " + path);
  out << "t,attacked,plan_seconds";
  const int M = cfg.num_targets;
  if (cfg.kind == scenarios::ScenarioKind::Occupancy) {
    out << ",grid_entropy";
  } else {
    for (int m = 0; m < M; ++m) out << ",entropy_" << m;
    if (cfg.kind == scenarios::ScenarioKind::Tracking) {
      for (int m = 0; m < M; ++m) out << ",rmse_" << m;
    } else {
      for (int m = 0; m < M; ++m) out << ",since_visit_" << m;
      for (int m = 0; m < M; ++m) out << ",observed_" << m;
    }
  }
  out << "\n";
  // Initial conditions, for reproducibility.
  out << "# initial_poses:";
  for (const auto& p : trial.initial_poses) {
    out << " (" << format_double(p.x) << " " << format_double(p.y) << " "
        << format_double(p.z) << " " << format_double(p.theta) << ")";
  }
  out << "\n";
  if (!trial.initial_targets.empty()) {
    out << "# initial_targets:";
    for (const auto& y : trial.initial_targets) {
      out << " (" << format_double(y(0)) << " " << format_double(y(1)) << " "
          << format_double(y(2)) << " " << format_double(y(3)) << ")";
    }
    out << "\n";
  }
  for (const auto& rec : trial.records) {
    out << rec.t << ",";
    for (size_t i = 0; i < rec.attacked.size(); ++i) {
      if (i) out << "|";
      out << rec.attacked[i];
    }
    out << "," << format_double(rec.plan_seconds);
    if (cfg.kind == scenarios::ScenarioKind::Occupancy) {
      out << "," << format_double(rec.grid_entropy);
    } else {
      for (double h : rec.target_entropy) out << "," << format_double(h);
      if (cfg.kind == scenarios::ScenarioKind::Tracking) {
        for (double e : rec.target_rmse) out << "," << format_double(e);
      } else {
        for (int k : rec.since_visit) out << "," << k;
        for (uint8_t o : rec.observed) out << "," << int(o);
      }
    }
    out << "\n";
  }
}

void sort_rows(std::vector<ResultRow>& rows) {
  std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    if (a.t_replan != b.t_replan) return a.t_replan < b.t_replan;
    if (a.seed != b.seed) return a.seed < b.seed;
    return std::string(planner_name(a.planner)) < planner_name(b.planner);
  });
}

}  // namespace

bool ResultTable::any_failed() const {
  return std::any_of(rows.begin(), rows.end(),
                     [](const ResultRow& r) { return r.status != "ok"; });
}

ResultTable run(const RunManifest& manifest) {
  fs::create_directories(manifest.output_dir);
  set_jobs(manifest.jobs);

  std::vector<int> sweep = manifest.treplan_sweep;
  if (sweep.empty()) sweep.push_back(0);  // scenario default

  struct Cell {
    int t_replan;
    uint64_t seed;
    planning::PlannerKind planner;
  };
  std::vector<Cell> cells;
  for (int tr : sweep) {
    for (uint64_t seed : manifest.seeds) {
      for (auto planner : manifest.planners) cells.push_back({tr, seed, planner});
    }
  }

  ResultTable table;
  table.rows.resize(cells.size());

  const int count = static_cast<int>(cells.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(jobs()) if (parallel_enabled())
#endif
  for (int c = 0; c < count; ++c) {
    const Cell& cell = cells[c];
    ResultRow row;
    row.seed = cell.seed;
    row.planner = cell.planner;
    const auto tic = std::chrono::steady_clock::now();
    try {
      const auto cfg = build_scenario(manifest.scenario, manifest.paper_scale, cell.t_replan);
      const auto attack = resolve_attack(manifest, cfg);
      row.t_replan = cfg.horizon.t_replan;
      row.attack = attack.kind;
      row.alpha = attack.alpha;
      row.scenario = scenarios::scenario_kind_name(cfg.kind);
      row.map = cfg.map_name;
      const auto trial = planning::rain_run(cfg, cell.planner, attack, cell.seed);
      row.metrics = scenarios::compute_metrics(trial.records);
      if (manifest.traces) {
        write_trace_csv(trial, cfg, (fs::path(manifest.output_dir) / trace_filename(row)).string());
      }
    } catch (const std::exception& e) {
      row.status = std::string("failed: ") + e.what();
      std::replace(row.status.begin(), row.status.end(), ',', ';');
      std::replace(row.status.begin(), row.status.end(), '\n', ' ');
    }
    row.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - tic).count();
    table.rows[c] = std::move(row);
  }

  sort_rows(table.rows);
  write_results_csv(table, (fs::path(manifest.output_dir) / "results.csv").string());
  write_timings_csv(table, (fs::path(manifest.output_dir) / "timings.csv").string());
  return table;
}

void write_results_csv(const ResultTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw_error(ErrorCode::IoError, "cannot write " + path);
  out << "schema_version,scenario,map,planner,attack,alpha,t_replan,seed,status,"
         "mean_rmse,peak_rmse,mean_entropy,final_grid_entropy,mean_unobserved\n";
  for (const auto& r : table.rows) {
    out << table.schema_version << "," << r.scenario << "," << r.map << ","
        << planner_name(r.planner) << "," << attacks::attack_kind_name(r.attack) << ","
        << r.alpha << "," << r.t_replan << "," << r.seed << "," << r.status << ","
        << format_double(r.metrics.mean_rmse) << "," << format_double(r.metrics.peak_rmse)
        << "," << format_double(r.metrics.mean_entropy) << ","
        << format_double(r.metrics.final_grid_entropy) << ","
        << format_double(r.metrics.mean_unobserved_duration) << "\n";
  }
}

ResultTable read_results_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_error(ErrorCode::IoError, "cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) throw_error(ErrorCode::EmptyTable, "empty results file");
  ResultTable table;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(cell);
    cols.resize(14);
    ResultRow r;
    table.schema_version = static_cast<int>(parse_double(cols[0]));
    r.scenario = cols[1];
    r.map = cols[2];
    r.planner = planner_from_string(cols[3]);
    r.attack = attacks::attack_kind_from_string(cols[4]);
    r.alpha = static_cast<int>(parse_double(cols[5]));
    r.t_replan = static_cast<int>(parse_double(cols[6]));
    std::from_chars(cols[7].data(), cols[7].data() + cols[7].size(), r.seed);
    r.status = cols[8];
    r.metrics.mean_rmse = parse_double(cols[9]);
    r.metrics.peak_rmse = parse_double(cols[10]);
    r.metrics.mean_entropy = parse_double(cols[11]);
    r.metrics.final_grid_entropy = parse_double(cols[12]);
    r.metrics.mean_unobserved_duration = parse_double(cols[13]);
    table.rows.push_back(std::move(r));
  }
  return table;
}

void write_timings_csv(const ResultTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw_error(ErrorCode::IoError, "cannot write " + path);
  out << "scenario,planner,attack,t_replan,seed,wall_seconds\n";
  for (const auto& r : table.rows) {
    out << r.scenario << "," << planner_name(r.planner) << ","
        << attacks::attack_kind_name(r.attack) << "," << r.t_replan << "," << r.seed << ","
        << format_double(r.wall_seconds) << "\n";
  }
}

}  // namespace rain::harness
