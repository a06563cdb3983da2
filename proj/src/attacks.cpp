#include "rain/attacks.hpp"

#include <algorithm>

#include "rain/error.hpp"

namespace rain::attacks {

AttackKind attack_kind_from_string(const std::string& s) {
  if (s == "none") return AttackKind::None;
  if (s == "random") return AttackKind::Random;
  if (s == "worst_greedy") return AttackKind::WorstGreedy;
  if (s == "worst_exact") return AttackKind::WorstExact;
  throw_error(ErrorCode::ConfigInvalid, "unknown attack kind '" + s + "'");
}

const char* attack_kind_name(AttackKind kind) {
  switch (kind) {
    case AttackKind::None: return "none";
    case AttackKind::Random: return "random";
    case AttackKind::WorstGreedy: return "worst_greedy";
    case AttackKind::WorstExact: return "worst_exact";
  }
  return "none";
}

setfn::AttackSet draw_attack(AttackModel& model, const setfn::SetObjective& objective_at_t) {
  const int n = objective_at_t.ground_size();
  const int alpha = std::clamp(model.alpha, 0, n);
  switch (model.kind) {
    case AttackKind::None:
      return {{}, alpha};
    case AttackKind::Random: {
      setfn::AttackSet attack;
      attack.budget = alpha;
      attack.removed = model.stream.sample_without_replacement(n, alpha);
      return attack;
    }
    case AttackKind::WorstGreedy:
      return setfn::greedy_attack(objective_at_t, alpha);
    case AttackKind::WorstExact:
      return setfn::exact_attack(objective_at_t, alpha);
  }
  return {{}, alpha};
}

}  // namespace rain::attacks
