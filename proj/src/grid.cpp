#include "rain/grid.hpp"

#include "rain/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace rain::estimation {

namespace {

constexpr double kLogOddsClamp = 10.0;
constexpr double kLogOddsFree = -0.4;
constexpr double kLogOddsOccupied = 0.85;

double clamp_log_odds(double l) { return std::clamp(l, -kLogOddsClamp, kLogOddsClamp); }

// Per-beam quadratic mutual information between the cells and the
// discretized hit outcome, summed over the beam's cells. The outcome
// distribution is P(hit at j) = p_j * prod_{i<j}(1 - p_i) plus a miss term.
double beam_information(const std::vector<double>& probs) {
  const int k = static_cast<int>(probs.size());
  if (k == 0) return 0.0;

  std::vector<double> hit(k + 1);
  double reach = 1.0;  // probability the beam reaches cell j
  for (int j = 0; j < k; ++j) {
    hit[j] = probs[j] * reach;
    reach *= 1.0 - probs[j];
  }
  hit[k] = reach;  // miss

  std::vector<double> sq_prefix(k + 2, 0.0);
  for (int j = 0; j <= k; ++j) sq_prefix[j + 1] = sq_prefix[j] + hit[j] * hit[j];
  const double sq_total = sq_prefix[k + 1];

  double info = 0.0;
  for (int i = 0; i < k; ++i) {
    const double p = probs[i];
    const double bern_sq = p * p + (1.0 - p) * (1.0 - p);
    const double before = sq_prefix[i];           // sum_{j<i} hit_j^2
    const double at = hit[i] * hit[i];
    const double after = sq_total - before - at;  // j > i and miss

    const double joint_sq = before * bern_sq + at + after;
    const double prod_sq = sq_total * bern_sq;
    const double cross = before * bern_sq + at * p + after * (1.0 - p);
    if (joint_sq <= 0.0 || prod_sq <= 0.0 || cross <= 0.0) continue;
    const double d = std::log(joint_sq) + std::log(prod_sq) - 2.0 * std::log(cross);
    if (d > 0.0) info += d;
  }
  return info;
}

struct Beam {
  double info = 0.0;
  std::vector<int> unknown_cells;  // flattened indices, sorted
};

// Accumulates per-beam information with overlap pruning. Beams without
// unknown cells contribute nothing and never participate in pruning.
// Overlap lookups go through an inverted cell -> accepted-beam index; both
// structures are append-only so a depth-first search can checkpoint and
// rewind instead of copying.
class BeamFolder {
 public:
  BeamFolder(const OccupancyGrid& grid, const world::BeamSensorConfig& cfg,
             const CsqmiConfig& knobs)
      : grid_(grid), cfg_(cfg), knobs_(knobs),
        cell_index_(static_cast<size_t>(grid.rows) * grid.cols) {}

  Beam make_beam(const world::RobotState& pose, double heading) const {
    Beam beam;
    const auto cells = ray_trace(grid_, {pose.x, pose.y}, heading, cfg_.z_max);
    std::vector<double> probs;
    probs.reserve(cells.size());
    for (const auto& cell : cells) {
      const double p = grid_.prob(cell.r, cell.c);
      probs.push_back(p);
      if (p >= knobs_.unknown_lo && p <= knobs_.unknown_hi) {
        beam.unknown_cells.push_back(cell.r * grid_.cols + cell.c);
      }
    }
    if (beam.unknown_cells.empty()) return beam;
    std::sort(beam.unknown_cells.begin(), beam.unknown_cells.end());
    beam.unknown_cells.erase(
        std::unique(beam.unknown_cells.begin(), beam.unknown_cells.end()),
        beam.unknown_cells.end());
    beam.info = beam_information(probs);
    return beam;
  }

  double add_pose(const world::RobotState& pose) {
    double gained = 0.0;
    for (int b = 0; b < cfg_.num_beams; ++b) {
      const double heading = pose.theta + 2.0 * M_PI * b / cfg_.num_beams;
      Beam beam = make_beam(pose, heading);
      if (beam.unknown_cells.empty()) continue;
      if (!overlaps_accepted(beam)) {
        gained += beam.info;
        push_beam(std::move(beam));
      }
    }
    return gained;
  }

  const std::vector<Beam>& accepted() const { return accepted_; }
  void set_accepted(std::vector<Beam> beams) {
    while (!accepted_.empty()) pop_beam();
    for (auto& b : beams) push_beam(std::move(b));
  }

  size_t mark() const { return accepted_.size(); }
  void rewind(size_t mark) {
    while (accepted_.size() > mark) pop_beam();
  }

 private:
  bool overlaps_accepted(const Beam& beam) {
    scratch_.assign(accepted_.size(), 0);
    const double limit = knobs_.overlap_threshold * beam.unknown_cells.size();
    for (int cell : beam.unknown_cells) {
      for (int id : cell_index_[cell]) {
        if (++scratch_[id] > limit) return true;
      }
    }
    return false;
  }

  void push_beam(Beam beam) {
    const int id = static_cast<int>(accepted_.size());
    for (int cell : beam.unknown_cells) cell_index_[cell].push_back(id);
    accepted_.push_back(std::move(beam));
  }

  void pop_beam() {
    for (int cell : accepted_.back().unknown_cells) cell_index_[cell].pop_back();
    accepted_.pop_back();
  }

  const OccupancyGrid& grid_;
  const world::BeamSensorConfig& cfg_;
  const CsqmiConfig& knobs_;
  std::vector<Beam> accepted_;
  std::vector<std::vector<int>> cell_index_;  // cell -> accepted beam ids, ascending
  std::vector<int> scratch_;
};

}  // namespace

OccupancyGrid OccupancyGrid::uniform(int rows, int cols, double resolution,
                                     const Eigen::Vector2d& origin) {
  OccupancyGrid g;
  g.rows = rows;
  g.cols = cols;
  g.resolution = resolution;
  g.origin = origin;
  g.log_odds.assign(static_cast<size_t>(rows) * cols, 0.0);
  return g;
}

bool OccupancyGrid::contains(double x, double y) const {
  return x >= origin.x() && y >= origin.y() && x < origin.x() + width() &&
         y < origin.y() + height();
}

std::vector<RayCell> ray_trace(const OccupancyGrid& g, const Eigen::Vector2d& from,
                               double heading, double max_range) {
  if (!g.contains(from.x(), from.y())) {
    throw_error(ErrorCode::PoseOutsideGrid, "ray origin outside grid");
  }
  const double res = g.resolution;
  int c = static_cast<int>(std::floor((from.x() - g.origin.x()) / res));
  int r = static_cast<int>(std::floor((from.y() - g.origin.y()) / res));
  c = std::clamp(c, 0, g.cols - 1);
  r = std::clamp(r, 0, g.rows - 1);

  const double dx = std::cos(heading);
  const double dy = std::sin(heading);
  const int step_c = dx > 0 ? 1 : -1;
  const int step_r = dy > 0 ? 1 : -1;

  const double inf = std::numeric_limits<double>::infinity();
  double t_max_x = inf, t_delta_x = inf;
  if (std::abs(dx) > 1e-15) {
    const double next_x = g.origin.x() + (c + (dx > 0 ? 1 : 0)) * res;
    t_max_x = (next_x - from.x()) / dx;
    t_delta_x = res / std::abs(dx);
  }
  double t_max_y = inf, t_delta_y = inf;
  if (std::abs(dy) > 1e-15) {
    const double next_y = g.origin.y() + (r + (dy > 0 ? 1 : 0)) * res;
    t_max_y = (next_y - from.y()) / dy;
    t_delta_y = res / std::abs(dy);
  }

  std::vector<RayCell> cells;
  double entry = 0.0;
  while (true) {
    cells.push_back({r, c, entry});
    const double t = std::min(t_max_x, t_max_y);
    if (t > max_range) break;
    if (t_max_x <= t_max_y) {
      c += step_c;
      t_max_x += t_delta_x;
    } else {
      r += step_r;
      t_max_y += t_delta_y;
    }
    if (c < 0 || c >= g.cols || r < 0 || r >= g.rows) break;
    entry = t;
  }
  return cells;
}

OccupancyGrid grid_update(const OccupancyGrid& g, const world::RobotState& pose,
                          const std::vector<double>& beam_ranges,
                          const world::BeamSensorConfig& cfg) {
  if (!g.contains(pose.x, pose.y)) {
    throw_error(ErrorCode::PoseOutsideGrid, "pose outside grid");
  }
  OccupancyGrid out = g;
  const int B = static_cast<int>(beam_ranges.size());
  for (int b = 0; b < B; ++b) {
    const double heading = pose.theta + 2.0 * M_PI * b / std::max(B, 1);
    const double z = beam_ranges[b];
    const auto cells = ray_trace(out, {pose.x, pose.y}, heading, std::min(z, cfg.z_max));
    for (size_t i = 0; i < cells.size(); ++i) {
      const double exit =
          (i + 1 < cells.size()) ? cells[i + 1].entry : std::numeric_limits<double>::infinity();
      double& l = out.at(cells[i].r, cells[i].c);
      if (z < cfg.z_max && cells[i].entry <= z && z < exit) {
        l = clamp_log_odds(l + kLogOddsOccupied);
      } else if (cells[i].entry < z) {
        l = clamp_log_odds(l + kLogOddsFree);
      }
    }
  }
  return out;
}

double grid_entropy(const OccupancyGrid& g) {
  double h = 0.0;
  for (double l : g.log_odds) {
    const double p = 1.0 / (1.0 + std::exp(-l));
    if (p > 0.0 && p < 1.0) h += -p * std::log(p) - (1.0 - p) * std::log(1.0 - p);
  }
  return h;
}

double trace_true_range(const OccupancyGrid& truth, const world::RobotState& pose,
                        double heading, double z_max) {
  const auto cells = ray_trace(truth, {pose.x, pose.y}, heading, z_max);
  for (const auto& cell : cells) {
    if (truth.prob(cell.r, cell.c) > 0.5 && cell.entry > 0.0) return cell.entry;
  }
  return z_max + 1.0;
}

double csqmi(const OccupancyGrid& g, const std::vector<world::RobotState>& poses,
             const world::BeamSensorConfig& cfg, const CsqmiConfig& knobs) {
  for (const auto& pose : poses) {
    if (!g.contains(pose.x, pose.y)) {
      throw_error(ErrorCode::PoseOutsideGrid, "pose outside grid");
    }
  }
  BeamFolder folder(g, cfg, knobs);
  double total = 0.0;
  for (const auto& pose : poses) total += folder.add_pose(pose);
  return total;
}

CsqmiObjective::CsqmiObjective(RolloutSetup setup, OccupancyGrid belief,
                               world::BeamSensorConfig beam_cfg, CsqmiConfig knobs)
    : setup_(std::move(setup)), grid_(std::move(belief)), beam_cfg_(beam_cfg), knobs_(knobs) {
  if (setup_.t_plan < 1 || setup_.control_hold < 1 || setup_.t_plan % setup_.control_hold != 0) {
    throw_error(ErrorCode::ConfigInvalid, "t_plan must be a positive multiple of control_hold");
  }
}

std::vector<world::RobotState> CsqmiObjective::pose_trajectory(
    int robot, const planning::IndexSeq& seq) const {
  std::vector<world::RobotState> out;
  out.reserve(setup_.t_plan);
  world::RobotState state = setup_.robot_states[robot];
  for (int s = 0; s < setup_.t_plan; ++s) {
    state = advance_robot(setup_, state, setup_.control_set[seq[s / setup_.control_hold]]);
    out.push_back(state);
  }
  return out;
}

double CsqmiObjective::value(const planning::IndexPlans& plans, uint64_t active) const {
  BeamFolder folder(grid_, beam_cfg_, knobs_);
  double total = 0.0;
  for (int i = 0; i < num_robots(); ++i) {
    if (!((active >> i) & 1ull)) continue;
    const auto poses = pose_trajectory(i, plans[i]);
    for (int s = 0; s < setup_.t_plan; ++s) {
      if (s + 1 < setup_.first_meas_step) continue;
      total += folder.add_pose(poses[s]);
    }
  }
  return total / setup_.t_plan;
}

bool CsqmiObjective::best_single(const planning::IndexPlans& fixed, uint64_t context_active,
                                 int robot, planning::IndexSeq& best_seq,
                                 double& best_value) const {
  if ((context_active & ~((1ull << robot) - 1ull)) != 0ull) return false;

  BeamFolder context(grid_, beam_cfg_, knobs_);
  double context_value = 0.0;
  for (int i = 0; i < robot; ++i) {
    if (!((context_active >> i) & 1ull)) continue;
    const auto poses = pose_trajectory(i, fixed[i]);
    for (int s = 0; s < setup_.t_plan; ++s) {
      if (s + 1 < setup_.first_meas_step) continue;
      context_value += context.add_pose(poses[s]);
    }
  }

  const int decisions = decisions_per_robot();
  const int options = options_per_decision();
  const int hold = setup_.control_hold;
  long leaves = 1;
  for (int d = 0; d < decisions; ++d) leaves *= options;

  struct Best {
    double value = -std::numeric_limits<double>::infinity();
    long rank = -1;
  };

  auto search_subtree = [&](int first_choice, BeamFolder& folder, planning::IndexSeq& seq,
                            Best& best) {
    std::vector<world::RobotState> pose_stack(decisions + 1);
    pose_stack[0] = setup_.robot_states[robot];
    std::vector<size_t> marks(decisions);
    // Seeding with the context total reproduces value()'s per-step addition
    // chain exactly.
    std::vector<double> values(decisions + 1, 0.0);
    values[0] = context_value;

    // Beam folds are shared across common prefixes; backtracking rewinds the
    // accepted set to the checkpoint instead of copying it.
    auto descend = [&](auto&& self, int depth, long rank_base) -> void {
      const int lo = depth == 0 ? first_choice : 0;
      const int hi = depth == 0 ? first_choice + 1 : options;
      for (int c = lo; c < hi; ++c) {
        marks[depth] = folder.mark();
        seq[depth] = c;
        world::RobotState pose = pose_stack[depth];
        double running = values[depth];
        for (int h = 0; h < hold; ++h) {
          pose = advance_robot(setup_, pose, setup_.control_set[c]);
          const int step = depth * hold + h + 1;
          if (step >= setup_.first_meas_step) running += folder.add_pose(pose);
        }
        pose_stack[depth + 1] = pose;
        values[depth + 1] = running;
        if (depth + 1 == decisions) {
          const double total = values[depth + 1] / setup_.t_plan;
          if (total > best.value) {  // strict: ties keep the lexicographically first
            best.value = total;
            best.rank = rank_base + c;
          }
        } else {
          self(self, depth + 1, (rank_base + c) * options);
        }
        folder.rewind(marks[depth]);
      }
    };
    descend(descend, 0, 0);
  };

  Best best;
#ifdef _OPENMP
  if (parallel_enabled() && decisions > 1) {
    std::vector<Best> per_first(options);
#pragma omp parallel for schedule(dynamic) num_threads(jobs())
    for (int c0 = 0; c0 < options; ++c0) {
      BeamFolder folder(grid_, beam_cfg_, knobs_);
      folder.set_accepted(context.accepted());
      planning::IndexSeq seq(decisions, 0);
      search_subtree(c0, folder, seq, per_first[c0]);
    }
    for (const Best& b : per_first) {
      if (b.rank >= 0 && (b.value > best.value ||
                          (b.value == best.value && b.rank < best.rank))) {
        best = b;
      }
    }
  } else
#endif
  {
    planning::IndexSeq seq(decisions, 0);
    for (int c0 = 0; c0 < options; ++c0) {
      search_subtree(c0, context, seq, best);
    }
  }

  best_seq.assign(decisions, 0);
  long rank = best.rank;
  for (int d = decisions - 1; d >= 0; --d) {
    best_seq[d] = static_cast<int>(rank % options);
    rank /= options;
  }
  best_value = best.value;
  return true;
}

void write_pgm(const OccupancyGrid& g, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_error(ErrorCode::IoError, "cannot open " + path);
  out << "P5\n" << g.cols << " " << g.rows << "\n255\n";
  // Row 0 of the file is the top of the map (max y).
  for (int r = g.rows - 1; r >= 0; --r) {
    for (int c = 0; c < g.cols; ++c) {
      const double p = g.prob(r, c);
      const auto v = static_cast<unsigned char>(std::lround((1.0 - p) * 255.0));
      out.put(static_cast<char>(v));
    }
  }
  std::ofstream meta(path + ".meta");
  if (!meta) throw_error(ErrorCode::IoError, "cannot open " + path + ".meta");
  meta << "resolution " << g.resolution << "\n";
  meta << "origin " << g.origin.x() << " " << g.origin.y() << "\n";
  meta << "rows " << g.rows << "\ncols " << g.cols << "\n";
}

OccupancyGrid read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_error(ErrorCode::IoError, "cannot open " + path);
  std::string magic;
  int cols = 0, rows = 0, maxval = 0;
  in >> magic >> cols >> rows >> maxval;
  if (magic != "P5" || maxval != 255 || cols <= 0 || rows <= 0) {
    throw_error(ErrorCode::IoError, "unsupported PGM " + path);
  }
  in.get();  // single whitespace after the header

  OccupancyGrid g = OccupancyGrid::uniform(rows, cols, 0.1, {0, 0});
  std::ifstream meta(path + ".meta");
  if (meta) {
    std::string key;
    while (meta >> key) {
      if (key == "resolution") meta >> g.resolution;
      else if (key == "origin") meta >> g.origin.x() >> g.origin.y();
      else { int dummy; meta >> dummy; }
    }
  }
  for (int r = rows - 1; r >= 0; --r) {
    for (int c = 0; c < cols; ++c) {
      const int v = in.get();
      if (v < 0) throw_error(ErrorCode::IoError, "truncated PGM " + path);
      const double p = 1.0 - v / 255.0;
      if (p <= 0.002) {
        g.at(r, c) = -kLogOddsClamp;
      } else if (p >= 0.998) {
        g.at(r, c) = kLogOddsClamp;
      } else {
        g.at(r, c) = std::log(p / (1.0 - p));
      }
    }
  }
  return g;
}

planning::SingleRobotEvaluator CsqmiObjective::bind_single(const planning::IndexPlans& fixed,
                                                           uint64_t context_active,
                                                           int robot) const {
  // The canonical fold order is ascending robot id, so the cached context
  // prefix is only valid when every context robot precedes the candidate.
  if ((context_active & ~((1ull << robot) - 1ull)) != 0ull) {
    return planning::JointObjective::bind_single(fixed, context_active, robot);
  }

  auto context = std::make_shared<BeamFolder>(grid_, beam_cfg_, knobs_);
  double context_value = 0.0;
  for (int i = 0; i < robot; ++i) {
    if (!((context_active >> i) & 1ull)) continue;
    const auto poses = pose_trajectory(i, fixed[i]);
    for (int s = 0; s < setup_.t_plan; ++s) {
      if (s + 1 < setup_.first_meas_step) continue;
      context_value += context->add_pose(poses[s]);
    }
  }
  return [this, context, context_value, robot](const planning::IndexSeq& seq) {
    BeamFolder folder(grid_, beam_cfg_, knobs_);
    folder.set_accepted(context->accepted());
    double total = context_value;
    const auto poses = pose_trajectory(robot, seq);
    for (int s = 0; s < setup_.t_plan; ++s) {
      if (s + 1 < setup_.first_meas_step) continue;
      total += folder.add_pose(poses[s]);
    }
    return total / setup_.t_plan;
  };
}

}  // namespace rain::estimation
