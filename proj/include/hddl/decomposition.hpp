#pragma once

// Method application on ground temporal task networks and replay of
// decomposition traces down to a primitive network.

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hddl/grounding.hpp"
#include "hddl/parser.hpp"
#include "hddl/semantics.hpp"

namespace hddl {

struct DecompositionStep {
  std::string target;
  GroundMethod method;
  std::map<std::string, std::string> renaming;  // method-internal id -> fresh id
};

/// `<target>.<k>` for the k-th subtask (1-based) of the method network.
std::map<std::string, std::string> hierarchical_renaming(const GroundMethod& m, const std::string& target);

/// Decomposed ids in application order together with their children, so the
/// retired time points can be dated from their subtasks.
struct AuxiliaryPoints {
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::string>> children;
};

/// I2 = (I1 - {i}) + Im with Im's ids renamed; constraint stores are unioned
/// and C_o gains start(i) <= start(j), end(j) <= end(i) for every new j.
/// Throws ValidationFailure(TaskMismatch / IdentifierCollision).
TaskNetwork decompose(const TaskNetwork& w, const DecompositionStep& step);

struct ReplayResult {
  TaskNetwork network;
  AuxiliaryPoints aux;
};

/// Folds `decompose` over the trace. Errors carry the 1-based step index in
/// their message; NonPrimitiveResidue when a compound id survives and
/// `require_primitive` is set.
ReplayResult replay_trace(const TaskNetwork& w0, const std::vector<DecompositionStep>& trace,
                          const std::function<bool(const Task&)>& is_compound, bool require_primitive = true);

std::optional<ExecutionError> find_residue(const TaskNetwork& w, const std::function<bool(const Task&)>& is_compound);

/// A primitive network bound to concrete dates.
struct BoundPlan {
  TemporalPlan plan;
  PointDates dates;
  Durations durations;
  /// Decomposed ids whose method network was empty; their points carry no date.
  std::set<std::string> undatable;
};

/// Pairs every network id with its timed plan line; decomposed ids get
/// start = min of children starts and end = max of children ends, the root
/// network ("") spans the initial ids. Throws ValidationFailure
/// (MissingTimedEntry / TaskNameMismatch / DurationViolation).
BoundPlan bind_plan_to_network(const TaskNetwork& w, const std::vector<std::string>& root_ids, const PlanDocument& doc,
                               const AuxiliaryPoints& aux, const GroundModel& gm);

/// Date every point given primitive dates only (used by the planner too).
void date_auxiliary_points(const std::vector<std::string>& root_ids, const AuxiliaryPoints& aux, BoundPlan& bp);

/// True when any time point or duration referenced by the constraint names an undatable id.
bool mentions_any(const OrderingConstraint& c, const std::set<std::string>& ids);
bool mentions_any(const DurationConstraint& c, const std::set<std::string>& ids);
bool mentions_any(const Obligation& o, const std::set<std::string>& ids);

/// Nesting depth of the hierarchy: 0 for a purely primitive plan.
int decomposition_depth(const std::vector<std::string>& root_ids, const AuxiliaryPoints& aux);

}  // namespace hddl
