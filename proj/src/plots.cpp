#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "rain/harness.hpp"
#include "rain/svg.hpp"

namespace rain::harness {

namespace fs = std::filesystem;

namespace {

struct TraceCurve {
  std::vector<double> t;
  std::vector<double> value;
};

// Reads one numeric column ("grid_entropy") or the row-mean of a column
// family ("entropy_", "rmse_") from a trace file.
TraceCurve read_trace_column(const std::string& path, const std::string& column) {
  std::ifstream in(path);
  if (!in) throw_error(ErrorCode::IoError, "cannot read " + path);
  std::string header;
  std::getline(in, header);
  std::vector<std::string> names;
  {
    std::stringstream ss(header);
    std::string cell;
    while (std::getline(ss, cell, ',')) names.push_back(cell);
  }
  std::vector<int> picks;
  for (int i = 0; i < static_cast<int>(names.size()); ++i) {
    if (names[i] == column ||
        (column.back() == '_' && names[i].rfind(column, 0) == 0)) {
      picks.push_back(i);
    }
  }
  TraceCurve curve;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.empty() || picks.empty()) continue;
    double sum = 0.0;
    int used = 0;
    for (int idx : picks) {
      if (idx >= static_cast<int>(cells.size()) || cells[idx].empty()) continue;
      double v = 0.0;
      std::from_chars(cells[idx].data(), cells[idx].data() + cells[idx].size(), v);
      sum += v;
      ++used;
    }
    if (!used) continue;
    double t = 0.0;
    std::from_chars(cells[0].data(), cells[0].data() + cells[0].size(), t);
    curve.t.push_back(t);
    curve.value.push_back(sum / used);
  }
  return curve;
}

// Mean of several curves sharing the same time axis.
TraceCurve mean_curve(const std::vector<TraceCurve>& curves) {
  TraceCurve out;
  if (curves.empty()) return out;
  const size_t len = curves.front().t.size();
  out.t = curves.front().t;
  out.value.assign(len, 0.0);
  int used = 0;
  for (const auto& c : curves) {
    if (c.t.size() != len) continue;
    for (size_t i = 0; i < len; ++i) out.value[i] += c.value[i];
    ++used;
  }
  if (!used) return {};
  for (double& v : out.value) v /= used;
  return out;
}

std::string series_key(const ResultRow& r) {
  return std::string(r.planner == planning::PlannerKind::Rain ? "RAIN" : "NonResilient") +
         " / " + attacks::attack_kind_name(r.attack);
}

}  // namespace

std::vector<std::string> emit_plots(const std::string& results_dir) {
  const fs::path dir(results_dir);
  const auto table = read_results_csv((dir / "results.csv").string());
  if (table.rows.empty()) throw_error(ErrorCode::EmptyTable, "no result rows");

  std::vector<std::string> written;

  // Time curves from traces, averaged over seeds, one series per
  // planner x attack kind.
  struct ColumnSpec {
    std::string column, file_stem, title, y_label;
  };
  const std::vector<ColumnSpec> specs = {
      {"rmse_", "rmse_vs_time", "Target position RMSE over time", "RMSE [m]"},
      {"entropy_", "entropy_vs_time", "Mean target entropy over time", "entropy [nats]"},
      {"grid_entropy", "grid_entropy_vs_time", "Occupancy grid entropy over time",
       "entropy [nats]"},
      {"since_visit_", "unobserved_vs_time", "Mean steps since last observation",
       "steps"},
  };
  for (const auto& spec : specs) {
    std::map<std::string, std::vector<TraceCurve>> by_series;
    for (const auto& row : table.rows) {
      if (row.status != "ok") continue;
      std::ostringstream name;
      name << "trace_" << row.scenario;
      if (!row.map.empty()) name << "_" << row.map;
      name << "_tr" << row.t_replan << "_" << planner_name(row.planner) << "_"
           << attacks::attack_kind_name(row.attack) << "_seed" << row.seed << ".csv";
      const fs::path trace = dir / name.str();
      if (!fs::exists(trace)) continue;
      auto curve = read_trace_column(trace.string(), spec.column);
      if (!curve.t.empty()) by_series[series_key(row)].push_back(std::move(curve));
    }
    if (by_series.empty()) continue;
    std::vector<svg::Series> series;
    for (const auto& [label, curves] : by_series) {
      auto mean = mean_curve(curves);
      if (mean.t.empty()) continue;
      series.push_back({label, std::move(mean.t), std::move(mean.value)});
    }
    if (series.empty()) continue;
    const std::string path = (dir / (spec.file_stem + ".svg")).string();
    svg::write_line_chart(path, spec.title, "timestep", spec.y_label, series);
    written.push_back(path);
  }

  // Aggregate bar charts grouped by replanning period.
  std::map<int, std::map<std::string, std::pair<double, int>>> grouped;  // tr -> series -> (sum, n)
  std::string metric_label;
  for (const auto& row : table.rows) {
    if (row.status != "ok") continue;
    double v = std::numeric_limits<double>::quiet_NaN();
    if (std::isfinite(row.metrics.mean_unobserved_duration)) {
      v = row.metrics.mean_unobserved_duration;
      metric_label = "mean unobserved duration [steps]";
    } else if (std::isfinite(row.metrics.mean_rmse)) {
      v = row.metrics.mean_rmse;
      metric_label = "mean RMSE [m]";
    } else if (std::isfinite(row.metrics.final_grid_entropy)) {
      v = row.metrics.final_grid_entropy;
      metric_label = "final grid entropy [nats]";
    }
    if (!std::isfinite(v)) continue;
    auto& slot = grouped[row.t_replan][series_key(row)];
    slot.first += v;
    slot.second += 1;
  }
  if (!grouped.empty()) {
    std::vector<std::string> labels;
    for (const auto& [tr, by_series] : grouped) {
      for (const auto& [label, _] : by_series) {
        if (std::find(labels.begin(), labels.end(), label) == labels.end()) {
          labels.push_back(label);
        }
      }
    }
    std::sort(labels.begin(), labels.end());
    std::vector<svg::BarGroup> groups;
    for (const auto& [tr, by_series] : grouped) {
      svg::BarGroup group;
      group.label = "T_REPLAN=" + std::to_string(tr);
      for (const auto& label : labels) {
        auto it = by_series.find(label);
        group.values.push_back(it == by_series.end() || it->second.second == 0
                                   ? 0.0
                                   : it->second.first / it->second.second);
      }
      groups.push_back(std::move(group));
    }
    const std::string path = (dir / "summary_by_replan.svg").string();
    svg::write_bar_chart(path, "Aggregate by replanning period", "replanning period",
                         metric_label, labels, groups);
    written.push_back(path);
  }
  return written;
}

}  // namespace rain::harness
