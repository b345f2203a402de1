#include "hddl/mutation.hpp"

#include <algorithm>

#include "hddl/grounding.hpp"

namespace hddl {

const std::vector<Mutation>& all_mutations() {
  static const std::vector<Mutation> all = {Mutation::shift_date,     Mutation::swap_method,   Mutation::drop_action,
                                            Mutation::inflate_duration, Mutation::reorder_trace, Mutation::rename_argument,
                                            Mutation::delete_init_atom, Mutation::negate_goal};
  return all;
}

std::string_view mutation_name(Mutation m) {
  switch (m) {
    case Mutation::shift_date: return "shift-date";
    case Mutation::swap_method: return "swap-method";
    case Mutation::drop_action: return "drop-action";
    case Mutation::inflate_duration: return "inflate-duration";
    case Mutation::reorder_trace: return "reorder-trace";
    case Mutation::rename_argument: return "rename-argument";
    case Mutation::delete_init_atom: return "delete-init-atom";
    case Mutation::negate_goal: return "negate-goal";
  }
  return "?";
}

namespace {

std::optional<Atom> required_init_atom(const Domain& d, const Problem& p, const PlanAction& a) {
  const Action* schema = d.action(a.task.name);
  if (!schema || schema->params.size() != a.task.args.size()) return std::nullopt;
  Binding b;
  for (std::size_t k = 0; k < schema->params.size(); ++k) b[schema->params[k].name] = a.task.args[k].name;
  try {
    Formula pre = ground_formula(schema->start.precond, b, merged_pool(d, p));
    for (const auto& atom : atoms_of(pre))
      if (p.init.count(atom)) return atom;
  } catch (const std::exception&) {
  }
  return std::nullopt;
}

}  // namespace

std::optional<Mutant> mutate(Mutation m, const Domain& d, const Problem& p, const PlanDocument& doc) {
  Mutant out{p, doc, std::string(mutation_name(m))};
  auto& plan = out.plan;
  switch (m) {
    case Mutation::shift_date: {
      if (plan.actions.empty()) return std::nullopt;
      auto latest = plan.actions.begin();
      for (auto it = plan.actions.begin(); it != plan.actions.end(); ++it)
        if (it->date >= latest->date) latest = it;
      --latest->date;
      out.description += ": " + latest->id + " now starts at " + std::to_string(latest->date);
      break;
    }
    case Mutation::swap_method: {
      if (plan.decompositions.empty()) return std::nullopt;
      auto& dec = plan.decompositions.front();
      std::string other = "no-such-method";
      for (const auto& mt : d.methods)
        if (mt.name != dec.method) {
          other = mt.name;
          break;
        }
      out.description += ": " + dec.id + " uses " + other + " instead of " + dec.method;
      dec.method = other;
      break;
    }
    case Mutation::drop_action: {
      if (plan.actions.empty()) return std::nullopt;
      out.description += ": removed " + plan.actions.front().id;
      plan.actions.erase(plan.actions.begin());
      break;
    }
    case Mutation::inflate_duration: {
      if (plan.actions.empty()) return std::nullopt;
      ++plan.actions.front().duration;
      out.description += ": " + plan.actions.front().id + " lasts " + std::to_string(plan.actions.front().duration);
      break;
    }
    case Mutation::reorder_trace: {
      if (plan.decompositions.size() < 2) return std::nullopt;
      std::rotate(plan.decompositions.rbegin(), plan.decompositions.rbegin() + 1, plan.decompositions.rend());
      out.description += ": " + plan.decompositions.front().id + " decomposed first";
      break;
    }
    case Mutation::rename_argument: {
      auto it = std::find_if(plan.actions.begin(), plan.actions.end(), [](const PlanAction& a) { return !a.task.args.empty(); });
      if (it == plan.actions.end()) return std::nullopt;
      auto& arg = it->task.args.front();
      auto pool = merged_pool(d, p);
      std::optional<std::string> other;
      for (const auto& o : pool.objects())
        if (o.name != arg.name) {
          other = o.name;
          break;
        }
      if (!other) return std::nullopt;
      out.description += ": " + it->id + " takes " + *other + " instead of " + arg.name;
      arg.name = *other;
      break;
    }
    case Mutation::delete_init_atom: {
      std::optional<Atom> victim;
      for (const auto& a : plan.actions)
        if ((victim = required_init_atom(d, p, a))) break;
      if (!victim) return std::nullopt;
      out.problem.init.erase(*victim);
      out.description += ": removed " + victim->str();
      break;
    }
    case Mutation::negate_goal:
      out.problem.goal = Formula::negate(p.goal ? *p.goal : Formula::truth());
      out.description += ": goal is " + out.problem.goal->str();
      break;
  }
  return out;
}

}  // namespace hddl
