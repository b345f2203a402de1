#pragma once

// Reference solver: depth-first decomposition search with an integer-time
// scheduler at primitive leaves, plus point-algebra consistency.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hddl/decomposition.hpp"

namespace hddl {

/// Point-algebra network; each label is a subset of {<,=,>} encoded as bits.
class PaGraph {
 public:
  static constexpr std::uint8_t kLt = 1, kEq = 2, kGt = 4, kAll = 7;

  explicit PaGraph(std::size_t n = 0);
  std::size_t size() const { return n_; }
  /// Intersects the label of (i, j) with `rel` (and (j, i) with its converse).
  void constrain(std::size_t i, std::size_t j, Relation rel);
  void constrain_bits(std::size_t i, std::size_t j, std::uint8_t bits);
  std::uint8_t label(std::size_t i, std::size_t j) const { return labels_[i * n_ + j]; }

 private:
  friend bool pa_consistent(const PaGraph& g);
  std::size_t n_;
  std::vector<std::uint8_t> labels_;
};

std::uint8_t relation_bits(Relation r);

/// Path consistency over the point-algebra composition table, splitting
/// {<,>} labels into {<} and {>} by backtracking.
bool pa_consistent(const PaGraph& g);

/// Point-algebra graph of a network's ordering constraints, with
/// start <= end for every task and containment of the initial ids in the root.
PaGraph network_pa_graph(const TaskNetwork& w, const std::vector<std::string>& root_ids,
                         const std::map<std::string, std::int64_t>& durations);

struct ScheduleOptions {
  std::int64_t horizon = 0;
  bool optimize = false;
  std::size_t node_limit = 2'000'000;
};

struct ScheduleOutcome {
  std::optional<std::map<std::string, std::int64_t>> starts;  // primitive id -> start date
  std::int64_t makespan = 0;
  std::size_t nodes = 0;
  bool horizon_cut = false;
  bool node_limit_hit = false;
};

/// Integer dates in [0, horizon] for a primitive network, honouring C_o and
/// C_d only (no state).
ScheduleOutcome schedule(const TaskNetwork& w, const std::map<std::string, std::int64_t>& durations,
                         const ScheduleOptions& opts);

/// Dates that also execute: every happening passes the semantics checks,
/// C_t obligations and the goal hold. `best_bound` prunes schedules whose
/// makespan is not strictly below it.
ScheduleOutcome schedule_executable(const TaskNetwork& w, const std::vector<std::string>& root_ids,
                                    const AuxiliaryPoints& aux, const GroundModel& gm, const ScheduleOptions& opts,
                                    std::optional<std::int64_t> best_bound = std::nullopt);

struct PlannerConfig {
  int max_depth = 8;
  std::optional<std::int64_t> horizon;  // default: sum of primitive durations + number of primitives
  bool optimize = false;
  std::size_t node_limit = 2'000'000;  // per schedule search
};

struct PlanResult {
  std::optional<PlanDocument> plan;
  std::int64_t makespan = 0;
  std::string reason;  // on failure: depth, horizon, exhausted or node-limit
  std::size_t networks = 0;  // decomposition nodes visited
  std::size_t schedule_nodes = 0;
};

PlanResult plan(const GroundModel& gm, const PlannerConfig& config = {});

}  // namespace hddl
