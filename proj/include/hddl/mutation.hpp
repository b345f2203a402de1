#pragma once

// Plan and problem perturbations that must turn a valid plan invalid.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hddl/parser.hpp"

namespace hddl {

enum class Mutation {
  shift_date,        // latest start moved one unit earlier
  swap_method,       // first decomposition names a different method
  drop_action,       // earliest action line removed
  inflate_duration,  // earliest action lasts one unit longer
  reorder_trace,     // last decomposition moved to the front
  rename_argument,   // first argument of the earliest action replaced
  delete_init_atom,  // an init atom required by an earliest action removed
  negate_goal,
};

const std::vector<Mutation>& all_mutations();
std::string_view mutation_name(Mutation m);

struct Mutant {
  Problem problem;
  PlanDocument plan;
  std::string description;
};

/// nullopt when the operator has nothing to act on (e.g. a trace of one step).
std::optional<Mutant> mutate(Mutation m, const Domain& d, const Problem& p, const PlanDocument& doc);

}  // namespace hddl
