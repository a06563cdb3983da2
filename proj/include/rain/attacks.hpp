#pragma once

#include <string>

#include "rain/rng.hpp"
#include "rain/setfn.hpp"

namespace rain::attacks {

enum class AttackKind { None, Random, WorstGreedy, WorstExact };

// How often the attacked set is re-drawn.
enum class AttackCadence { EveryStep, PerWindow };

AttackKind attack_kind_from_string(const std::string& s);
const char* attack_kind_name(AttackKind kind);

struct AttackModel {
  AttackKind kind = AttackKind::None;
  int alpha = 0;
  Rng stream;  // dedicated stream, one per trial
};

// Draws the attacked set for the current step. Worst-case kinds minimize the
// supplied objective over removals; random picks alpha robots uniformly
// without replacement from the model's stream.
setfn::AttackSet draw_attack(AttackModel& model, const setfn::SetObjective& objective_at_t);

}  // namespace rain::attacks
