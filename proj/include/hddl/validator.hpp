#pragma once

// End-to-end plan validation: model checks, grounding, trace replay,
// schedule binding, simulation, constraint checks and the goal.

#include <optional>
#include <string>
#include <vector>

#include "hddl/decomposition.hpp"

namespace hddl {

struct ValidateOptions {
  bool audit = false;  // keep going past independent failures
  bool prune_static = true;
};

struct VerdictStats {
  std::size_t happenings = 0;
  std::int64_t makespan = 0;
  int depth = 0;
};

struct Verdict {
  bool valid = false;
  std::vector<ExecutionError> errors;
  VerdictStats stats;
  std::optional<Timeline> timeline;
  std::string goal;  // printed goal, empty when the problem has none
};

Verdict validate(const Domain& d, const Problem& p, const PlanDocument& doc, const ValidateOptions& opts = {});
/// Reuses an existing ground model (it must come from the same d and p).
Verdict validate(const Domain& d, const Problem& p, const GroundModel& gm, const PlanDocument& doc,
                 const ValidateOptions& opts = {});
/// Parses all three texts first; syntax errors become ParseError verdicts.
Verdict validate_text(const std::string& domain, const std::string& problem, const std::string& plan,
                      const ValidateOptions& opts = {}, const std::vector<std::string>& file_names = {});

/// One line per happening, then a final verdict line.
std::string explain(const Verdict& v);
/// `{valid, errors:[{kind,date,items,message}], stats:{happenings,makespan,depth}}`
std::string verdict_json(const Verdict& v);

/// The trace of `doc` resolved against ground methods, replayed from the
/// matching initial network. Throws ValidationFailure.
struct ResolvedHierarchy {
  std::vector<std::string> roots;
  ReplayResult replay;
};
ResolvedHierarchy resolve_hierarchy(const PlanDocument& doc, const GroundModel& gm);

}  // namespace hddl
