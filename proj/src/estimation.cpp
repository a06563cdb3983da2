#include "rain/estimation.hpp"

#include <algorithm>
#include <cmath>

namespace rain::estimation {

namespace {

void symmetrize(Eigen::MatrixXd& m) { m = ((m + m.transpose()) * 0.5).eval(); }

Eigen::LDLT<Eigen::MatrixXd> innovation_factor(const Eigen::MatrixXd& S) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(S);
  const auto d = ldlt.vectorD();
  const double dmax = d.cwiseAbs().maxCoeff();
  const double dmin = d.cwiseAbs().minCoeff();
  if (!(dmax > 0.0) || dmin < 1e-14 * dmax || ldlt.info() != Eigen::Success) {
    throw_error(ErrorCode::SingularInnovation, "innovation covariance is singular");
  }
  return ldlt;
}

}  // namespace

GaussianBelief kf_predict(const GaussianBelief& b, const Eigen::MatrixXd& F,
                          const Eigen::MatrixXd& W) {
  if (F.cols() != b.mean.size() || F.rows() != W.rows() || W.rows() != W.cols() ||
      b.cov.rows() != b.mean.size()) {
    throw_error(ErrorCode::DimensionMismatch, "kf_predict dimensions disagree");
  }
  GaussianBelief out;
  out.mean = F * b.mean;
  out.cov = F * b.cov * F.transpose() + W;
  symmetrize(out.cov);
  return out;
}

GaussianBelief kf_update_covariance(const GaussianBelief& b, const Eigen::MatrixXd& H,
                                    const Eigen::MatrixXd& V) {
  if (H.cols() != b.mean.size() || H.rows() != V.rows() || V.rows() != V.cols()) {
    throw_error(ErrorCode::DimensionMismatch, "kf_update dimensions disagree");
  }
  const Eigen::MatrixXd S = H * b.cov * H.transpose() + V;
  const auto ldlt = innovation_factor(S);
  const Eigen::MatrixXd K = ldlt.solve(H * b.cov).transpose();
  const Eigen::MatrixXd A =
      Eigen::MatrixXd::Identity(b.cov.rows(), b.cov.cols()) - K * H;
  GaussianBelief out;
  out.mean = b.mean;
  out.cov = A * b.cov * A.transpose() + K * V * K.transpose();
  symmetrize(out.cov);
  return out;
}

GaussianBelief kf_update(const GaussianBelief& b, const Eigen::MatrixXd& H,
                         const Eigen::MatrixXd& V, const Eigen::VectorXd& residual) {
  const Eigen::MatrixXd S = H * b.cov * H.transpose() + V;
  const auto ldlt = innovation_factor(S);
  const Eigen::MatrixXd K = ldlt.solve(H * b.cov).transpose();
  const Eigen::MatrixXd A =
      Eigen::MatrixXd::Identity(b.cov.rows(), b.cov.cols()) - K * H;
  GaussianBelief out;
  out.mean = b.mean + K * residual;
  out.cov = A * b.cov * A.transpose() + K * V * K.transpose();
  symmetrize(out.cov);
  return out;
}

world::RobotState advance_robot(const RolloutSetup& setup, const world::RobotState& s,
                                const world::ControlInput& u) {
  world::RobotState out = setup.three_d ? world::unicycle3d_step(s, u, setup.tau)
                                        : world::unicycle_step(s, u, setup.tau);
  if (setup.clamp_box) {
    out.x = std::clamp(out.x, setup.clamp_box->min().x(), setup.clamp_box->max().x());
    out.y = std::clamp(out.y, setup.clamp_box->min().y(), setup.clamp_box->max().y());
  }
  return out;
}

double logdet_spd(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() == Eigen::Success) {
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  }
  // Near-singular fallback: clamp the spectrum.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  return es.eigenvalues().cwiseMax(1e-12).array().log().sum();
}

EkfRolloutObjective::EkfRolloutObjective(RolloutSetup setup, BeliefState beliefs,
                                         std::vector<const TargetModel*> models)
    : setup_(std::move(setup)), beliefs_(std::move(beliefs)), models_(std::move(models)) {
  if (setup_.t_plan < 1 || setup_.control_hold < 1 || setup_.t_plan % setup_.control_hold != 0) {
    throw_error(ErrorCode::ConfigInvalid, "t_plan must be a positive multiple of control_hold");
  }
  if (beliefs_.targets.size() != models_.size()) {
    throw_error(ErrorCode::DimensionMismatch, "one model per target required");
  }
  if (beliefs_.since_visit.empty()) beliefs_.since_visit.assign(models_.size(), 0);

  // Predicted target means, step 0 = now. Means evolve by prediction only
  // (the rollout is covariance-only), so they are shared by every subset.
  predicted_means_.resize(static_cast<size_t>(setup_.t_plan + 1) * models_.size());
  for (size_t m = 0; m < models_.size(); ++m) {
    predicted_means_[m] = beliefs_.targets[m].mean;
  }
  for (int s = 1; s <= setup_.t_plan; ++s) {
    for (size_t m = 0; m < models_.size(); ++m) {
      predicted_means_[s * models_.size() + m] =
          models_[m]->transition() * predicted_means_[(s - 1) * models_.size() + m];
    }
  }

  // Measurement-free covariance path per target; observed targets are
  // scored against it and untouched targets contribute exactly zero.
  baseline_logdet_.assign(setup_.t_plan + 1, std::vector<double>(models_.size(), 0.0));
  std::vector<Eigen::MatrixXd> covs;
  covs.reserve(models_.size());
  for (const auto& t : beliefs_.targets) covs.push_back(t.cov);
  std::vector<int> k = beliefs_.since_visit;
  for (int s = 1; s <= setup_.t_plan; ++s) {
    for (size_t m = 0; m < models_.size(); ++m) {
      const auto& F = models_[m]->transition();
      covs[m] = F * covs[m] * F.transpose() + models_[m]->process_noise(k[m]);
      symmetrize(covs[m]);
      ++k[m];
      baseline_logdet_[s][m] = logdet_spd(covs[m]);
    }
  }
}

int EkfRolloutObjective::decisions_per_robot() const {
  return setup_.t_plan / setup_.control_hold;
}

std::vector<world::RobotState> EkfRolloutObjective::pose_trajectory(
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

EkfRolloutObjective::ObsByTarget EkfRolloutObjective::collect_obs(
    int robot, const planning::IndexSeq& seq) const {
  ObsByTarget by_target(models_.size());
  const auto poses = pose_trajectory(robot, seq);
  for (int s = std::max(1, setup_.first_meas_step); s <= setup_.t_plan; ++s) {
    for (size_t m = 0; m < models_.size(); ++m) {
      auto obs = models_[m]->observe(poses[s - 1], predicted_means_[s * models_.size() + m]);
      if (obs) by_target[m].push_back({robot, s, std::move(obs->H), std::move(obs->V)});
    }
  }
  return by_target;
}

void EkfRolloutObjective::merge_obs(ObsByTarget& into, const ObsByTarget& from) {
  for (size_t m = 0; m < into.size(); ++m) {
    auto& dst = into[m];
    const auto& src = from[m];
    std::vector<StepObs> merged;
    merged.reserve(dst.size() + src.size());
    size_t a = 0, b = 0;
    while (a < dst.size() || b < src.size()) {
      const bool take_a =
          b == src.size() ||
          (a < dst.size() && (dst[a].step < src[b].step ||
                              (dst[a].step == src[b].step && dst[a].robot < src[b].robot)));
      merged.push_back(take_a ? std::move(dst[a++]) : src[b++]);
    }
    dst = std::move(merged);
  }
}

double EkfRolloutObjective::target_contribution(int m, const std::vector<StepObs>& obs) const {
  GaussianBelief belief = beliefs_.targets[m];
  int k = beliefs_.since_visit[m];
  const auto& F = models_[m]->transition();

  double total = 0.0;
  size_t next = 0;
  for (int s = 1; s <= setup_.t_plan; ++s) {
    belief.cov = F * belief.cov * F.transpose() + models_[m]->process_noise(k);
    symmetrize(belief.cov);
    belief.mean = predicted_means_[s * models_.size() + m];
    bool visited = false;
    while (next < obs.size() && obs[next].step == s) {
      belief = kf_update_covariance(belief, obs[next].H, obs[next].V);
      visited = true;
      ++next;
    }
    k = visited ? 0 : k + 1;
    total += baseline_logdet_[s][m] - logdet_spd(belief.cov);
  }
  return total;
}

double EkfRolloutObjective::value(const planning::IndexPlans& plans, uint64_t active) const {
  ObsByTarget merged(models_.size());
  for (int i = 0; i < num_robots(); ++i) {
    if (!((active >> i) & 1ull)) continue;
    merge_obs(merged, collect_obs(i, plans[i]));
  }
  double total = 0.0;
  for (size_t m = 0; m < models_.size(); ++m) {
    if (!merged[m].empty()) total += target_contribution(static_cast<int>(m), merged[m]);
  }
  return total / setup_.t_plan;
}

planning::SingleRobotEvaluator EkfRolloutObjective::bind_single(
    const planning::IndexPlans& fixed, uint64_t context_active, int robot) const {
  // Context observations depend only on fixed poses and the shared predicted
  // means, so they are collected once and their per-target contributions are
  // cached. A candidate plan re-rolls only the targets it observes.
  auto context = std::make_shared<ObsByTarget>(models_.size());
  for (int i = 0; i < num_robots(); ++i) {
    if (i == robot || !((context_active >> i) & 1ull)) continue;
    merge_obs(*context, collect_obs(i, fixed[i]));
  }
  auto context_contrib = std::make_shared<std::vector<double>>(models_.size(), 0.0);
  for (size_t m = 0; m < models_.size(); ++m) {
    if (!(*context)[m].empty()) {
      (*context_contrib)[m] = target_contribution(static_cast<int>(m), (*context)[m]);
    }
  }
  return [this, context, context_contrib, robot](const planning::IndexSeq& seq) {
    ObsByTarget own = collect_obs(robot, seq);
    double total = 0.0;
    for (size_t m = 0; m < models_.size(); ++m) {
      if (own[m].empty()) {
        total += (*context_contrib)[m];
      } else {
        ObsByTarget merged(1);
        merged[0] = (*context)[m];
        ObsByTarget addition(1);
        addition[0] = std::move(own[m]);
        merge_obs(merged, addition);
        total += target_contribution(static_cast<int>(m), merged[0]);
      }
    }
    return total / setup_.t_plan;
  };
}

double rollout_objective(const EkfRolloutObjective& objective,
                         const planning::IndexPlans& plans, uint64_t active) {
  return objective.value(plans, active);
}

}  // namespace rain::estimation
