#include <cstdio>
#include <filesystem>
#include <fstream>

#include <CLI11.hpp>

#include "rain/grid.hpp"
#include "rain/harness.hpp"
#include "rain/parallel.hpp"
#include "rain/scenarios.hpp"

namespace fs = std::filesystem;

namespace {

int cmd_run(const std::string& manifest_path, int seeds_n, int jobs, bool traces,
            bool paper_scale) {
  auto manifest = rain::harness::RunManifest::from_file(manifest_path);
  if (seeds_n > 0) {
    manifest.seeds.clear();
    for (int i = 1; i <= seeds_n; ++i) manifest.seeds.push_back(i);
  }
  if (jobs > 0) manifest.jobs = jobs;
  if (traces) manifest.traces = true;
  if (paper_scale) manifest.paper_scale = true;

  const auto table = rain::harness::run(manifest);
  int failed = 0;
  for (const auto& row : table.rows) {
    if (row.status != "ok") {
      ++failed;
      std::printf("FAIL seed=%llu planner=%s: %s\n",
                  static_cast<unsigned long long>(row.seed),
                  rain::harness::planner_name(row.planner), row.status.c_str());
    }
  }
  std::printf("%zu cells, %d failed; results in %s/results.csv\n", table.rows.size(), failed,
              manifest.output_dir.c_str());
  return failed == 0 ? 0 : 1;
}

int cmd_plot(const std::string& dir) {
  const auto written = rain::harness::emit_plots(dir);
  for (const auto& f : written) std::printf("wrote %s\n", f.c_str());
  return written.empty() ? 1 : 0;
}

int cmd_certify(int instances, int max_team, uint64_t seed, int jobs) {
  rain::set_jobs(jobs);
  rain::harness::BoundSuiteOptions options;
  options.instances = instances;
  options.max_team = max_team;
  options.seed = seed;
  const auto report = rain::harness::run_bound_suite(options);
  std::printf("%-72s %10s %10s %12s\n", "check", "instances", "violations", "worst margin");
  for (const auto& c : report.checks) {
    std::printf("%-72s %10d %10d %12.3e  %s\n", c.name.c_str(), c.instances, c.violations,
                c.worst_margin, c.violations == 0 ? "PASS" : "FAIL");
  }
  return report.all_passed() ? 0 : 1;
}

int cmd_export_maps(const std::string& out_dir) {
  fs::create_directories(fs::path(out_dir) / "maps");
  rain::estimation::write_pgm(rain::scenarios::make_squares_map(),
                              (fs::path(out_dir) / "maps" / "squares.pgm").string());
  rain::estimation::write_pgm(rain::scenarios::make_corridor_map(),
                              (fs::path(out_dir) / "maps" / "corridor.pgm").string());
  std::ofstream csv(fs::path(out_dir) / "landmarks.csv");
  csv << "id,x,y,z\n";
  const auto landmarks = rain::scenarios::default_landmarks(16);
  for (size_t i = 0; i < landmarks.size(); ++i) {
    csv << i << "," << landmarks[i].x() << "," << landmarks[i].y() << ","
        << landmarks[i].z() << "\n";
  }
  std::printf("wrote maps and landmark layout under %s\n", out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Resilient multi-robot information acquisition simulator"};
  app.require_subcommand(1);

  std::string manifest_path;
  int seeds_n = 0, jobs = 0;
  bool traces = false, paper_scale = false;
  auto* run = app.add_subcommand("run", "Execute a Monte Carlo manifest");
  run->add_option("manifest", manifest_path, "manifest JSON file")->required();
  run->add_option("--seeds", seeds_n, "use seeds 1..N instead of the manifest list");
  run->add_option("--jobs", jobs, "worker threads");
  run->add_flag("--traces", traces, "write per-trial trace CSVs");
  run->add_flag("--paper-scale", paper_scale, "full published scenario sizes");

  std::string plot_dir;
  auto* plot = app.add_subcommand("plot", "Render SVG charts from a results directory");
  plot->add_option("dir", plot_dir, "directory containing results.csv")->required();

  int instances = 200, max_team = 6, cjobs = 1;
  uint64_t bound_seed = 20240601ull;
  auto* certify = app.add_subcommand("certify-bounds",
                                     "Check the planner's suboptimality bounds on random instances");
  certify->add_option("--instances", instances, "number of random instances");
  certify->add_option("--max-team", max_team, "largest team size");
  certify->add_option("--seed", bound_seed, "instance generator seed");
  certify->add_option("--jobs", cjobs, "worker threads");

  std::string export_dir = "data";
  auto* exp = app.add_subcommand("export-maps", "Write bundled maps and landmark layouts");
  exp->add_option("--out", export_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(manifest_path, seeds_n, jobs, traces, paper_scale);
    if (plot->parsed()) return cmd_plot(plot_dir);
    if (certify->parsed()) return cmd_certify(instances, max_team, bound_seed, cjobs);
    if (exp->parsed()) return cmd_export_maps(export_dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
