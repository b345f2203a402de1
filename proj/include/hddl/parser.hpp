#pragma once

// Concrete syntax: S-expression domains and problems, line-oriented timed
// hierarchical plans, and canonical printers for all three.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hddl/model.hpp"

namespace hddl {

struct Token {
  enum class Kind { lparen, rparen, symbol, keyword, variable, integer };

  Kind kind = Kind::symbol;
  std::string text;
  SourceSpan span;

  bool operator==(const Token& o) const { return kind == o.kind && text == o.text; }
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::string rule, SourceSpan span, std::vector<std::string> expected, const std::string& msg)
      : std::runtime_error(msg), rule(std::move(rule)), span(std::move(span)), expected(std::move(expected)) {}

  Diagnostic diagnostic() const;

  std::string rule;  // syntax, illegal-character, duplicate-declaration, non-integer, ...
  SourceSpan span;
  std::vector<std::string> expected;
};

/// Splits text into parentheses, `:keywords`, `?variables`, integers and
/// symbols. `;` starts a comment running to the end of the line.
std::vector<Token> tokenize(std::string_view text, const std::string& file = "<input>");

Domain parse_domain(std::string_view text, const std::string& file = "<input>");
Problem parse_problem(std::string_view text, const std::string& file = "<input>");

/// One primitive task occurrence `<id> <date>: (<name> <args>) [<duration>]`.
struct PlanAction {
  std::string id;
  std::int64_t date = 0;
  Task task;
  std::int64_t duration = 0;
  SourceSpan span;
  bool operator==(const PlanAction&) const = default;
};

/// `<id> <task> <args> -> <method> <children>` from the hierarchy section.
struct PlanDecomposition {
  std::string id;
  Task task;
  bool task_args_given = true;  // false for the short `<id> <task> <method> <children>` form
  std::string method;
  Binding bindings;  // method parameter bindings, filled by trace resolution
  std::vector<std::string> children;
  SourceSpan span;
  bool operator==(const PlanDecomposition& o) const {
    return id == o.id && task == o.task && task_args_given == o.task_args_given && method == o.method &&
           children == o.children;
  }
};

struct PlanDocument {
  std::vector<PlanAction> actions;  // sorted by date, stable
  std::vector<std::string> roots;
  std::vector<PlanDecomposition> decompositions;
  SourceSpan roots_span;

  const PlanAction* action(const std::string& id) const;
  const PlanDecomposition* decomposition(const std::string& id) const;
  std::int64_t makespan() const;

  bool operator==(const PlanDocument&) const = default;
};

/// Parses a plan. Throws ParseError with rules syntax, non-integer,
/// negative-date, duplicate-identifier, missing-timed-entry,
/// unreferenced-identifier.
PlanDocument parse_plan(std::string_view text, const std::string& file = "<input>");

/// Structural checks shared by the parser and the validator; throws ParseError.
void check_plan_structure(const PlanDocument& doc);

std::string print_domain(const Domain& d);
std::string print_problem(const Problem& p);
std::string print_plan(const PlanDocument& doc);
std::string print_network_body(const TaskNetwork& w, const std::string& indent);

}  // namespace hddl
