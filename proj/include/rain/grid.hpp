#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "rain/estimation.hpp"
#include "rain/objective.hpp"
#include "rain/world.hpp"

namespace rain::estimation {

// Occupancy probabilities in log-odds form, row-major, cell (r, c) covering
// the square [origin + (c, r) * res, origin + (c+1, r+1) * res).
struct OccupancyGrid {
  int rows = 0;
  int cols = 0;
  double resolution = 0.1;      // m / cell
  Eigen::Vector2d origin{0, 0}; // world position of the (0,0) cell corner
  std::vector<double> log_odds; // clamped to +-10

  static OccupancyGrid uniform(int rows, int cols, double resolution,
                               const Eigen::Vector2d& origin);

  double& at(int r, int c) { return log_odds[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return log_odds[static_cast<size_t>(r) * cols + c]; }
  double prob(int r, int c) const { return 1.0 / (1.0 + std::exp(-at(r, c))); }

  bool contains(double x, double y) const;
  double width() const { return cols * resolution; }
  double height() const { return rows * resolution; }
};

struct RayCell {
  int r = 0;
  int c = 0;
  double entry = 0.0;  // distance along the ray where the cell is entered
};

// Cells intersected by a ray, in order, via integer grid traversal.
// Terminates at max_range or the grid boundary. The origin cell is always
// included (entry 0).
std::vector<RayCell> ray_trace(const OccupancyGrid& g, const Eigen::Vector2d& from,
                               double heading, double max_range);

// Inverse sensor model: traversed cells get a free-space decrement, the cell
// containing the measured range gets an occupied increment when the
// measurement is below z_max. Log-odds are clamped to +-10. Beam i points at
// pose.theta + 2*pi*i/B.
OccupancyGrid grid_update(const OccupancyGrid& g, const world::RobotState& pose,
                          const std::vector<double>& beam_ranges,
                          const world::BeamSensorConfig& cfg);

// Sum of per-cell binary entropies, nats.
double grid_entropy(const OccupancyGrid& g);

// Simulated beam: distance to the first occupied cell of the true map, or
// z_max + 1 when nothing is hit within range.
double trace_true_range(const OccupancyGrid& truth, const world::RobotState& pose,
                        double heading, double z_max);

struct CsqmiConfig {
  double unknown_lo = 0.2;        // cells with p in [lo, hi] count as unknown
  double unknown_hi = 0.8;
  double overlap_threshold = 0.5; // beams sharing more than this fraction of
                                  // unknown cells with an accepted beam are pruned
};

// Quadratic-mutual-information value of a pose set against the current grid
// belief: per-beam information accumulated additively after pruning beams
// that mostly re-observe unknown cells already covered by an accepted beam.
// Non-negative; zero when no beam touches an unknown cell.
double csqmi(const OccupancyGrid& g, const std::vector<world::RobotState>& poses,
             const world::BeamSensorConfig& cfg, const CsqmiConfig& knobs = {});

// Grid snapshots are serializable for visual inspection: binary PGM plus a
// sidecar "<path>.meta" text file carrying resolution and origin.
void write_pgm(const OccupancyGrid& g, const std::string& path);
OccupancyGrid read_pgm(const std::string& path);

// Team objective for grid exploration: beams cast from every planned pose of
// the active robots, pruned and accumulated in canonical (robot, step, beam)
// order, normalized by the horizon length.
class CsqmiObjective final : public planning::JointObjective {
 public:
  CsqmiObjective(RolloutSetup setup, OccupancyGrid belief, world::BeamSensorConfig beam_cfg,
                 CsqmiConfig knobs = {});

  int num_robots() const override { return static_cast<int>(setup_.robot_states.size()); }
  int decisions_per_robot() const override { return setup_.t_plan / setup_.control_hold; }
  int options_per_decision() const override { return static_cast<int>(setup_.control_set.size()); }

  double value(const planning::IndexPlans& plans, uint64_t active) const override;
  planning::SingleRobotEvaluator bind_single(const planning::IndexPlans& fixed,
                                             uint64_t context_active, int robot) const override;
  // Depth-first exhaustive search sharing beam work across common plan
  // prefixes; orders of magnitude faster than per-leaf evaluation.
  bool best_single(const planning::IndexPlans& fixed, uint64_t context_active, int robot,
                   planning::IndexSeq& best_seq, double& best_value) const override;

  std::vector<world::RobotState> pose_trajectory(int robot,
                                                 const planning::IndexSeq& seq) const;

  const RolloutSetup& setup() const { return setup_; }
  const OccupancyGrid& belief() const { return grid_; }

 private:
  RolloutSetup setup_;
  OccupancyGrid grid_;
  world::BeamSensorConfig beam_cfg_;
  CsqmiConfig knobs_;
};

}  // namespace rain::estimation
