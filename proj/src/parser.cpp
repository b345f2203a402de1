#include "hddl/parser.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

namespace hddl {

Diagnostic ParseError::diagnostic() const { return {span, Diagnostic::Severity::error, rule, what()}; }

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool symbol_char(unsigned char c) {
  if (std::isalnum(c) || c >= 0x80) return true;
  switch (c) {
    case '-': case '_': case '.': case '=': case '<': case '>': case '!': case '+': case '*': case '/':
      return true;
    default:
      return false;
  }
}

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

SourceSpan make_span(const std::shared_ptr<const std::string>& file, std::size_t line, std::size_t col,
                     std::size_t len) {
  SourceSpan s;
  s.file = file;
  s.line = line;
  s.column = col;
  s.length = len;
  return s;
}

}  // namespace

std::vector<Token> tokenize(std::string_view text, const std::string& file) {
  auto fname = std::make_shared<const std::string>(file);
  std::vector<Token> out;
  std::size_t line = 1, col = 1, i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < text.size()) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    if (std::isspace(c)) {
      advance(1);
      continue;
    }
    if (c == ';') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    if (c == '(' || c == ')') {
      out.push_back({c == '(' ? Token::Kind::lparen : Token::Kind::rparen, std::string(1, char(c)),
                     make_span(fname, line, col, 1)});
      advance(1);
      continue;
    }
    std::size_t start = i;
    std::size_t j = i;
    if (c == ':' || c == '?') ++j;
    while (j < text.size() && symbol_char(static_cast<unsigned char>(text[j]))) ++j;
    if (j == start || ((c == ':' || c == '?') && j == start + 1)) {
      throw ParseError("illegal-character", make_span(fname, line, col, 1), {"(", ")", "symbol"},
                       "illegal character '" + std::string(1, char(c)) + "'");
    }
    std::string word(text.substr(start, j - start));
    Token t;
    t.text = word;
    t.span = make_span(fname, line, col, word.size());
    if (c == ':') t.kind = Token::Kind::keyword;
    else if (c == '?') t.kind = Token::Kind::variable;
    else if (all_digits(word)) t.kind = Token::Kind::integer;
    else t.kind = Token::Kind::symbol;
    out.push_back(std::move(t));
    advance(j - start);
  }
  return out;
}

// ---------------------------------------------------------------------------
// S-expressions

namespace {

struct SExpr {
  bool is_list = false;
  Token tok;
  std::vector<SExpr> items;
  SourceSpan span;

  std::size_t size() const { return items.size(); }
  const SExpr& operator[](std::size_t i) const { return items[i]; }
  bool is_atom() const { return !is_list; }
  bool is_symbol() const { return !is_list && tok.kind == Token::Kind::symbol; }
  bool is_word(std::string_view w) const {
    return !is_list && (tok.kind == Token::Kind::symbol || tok.kind == Token::Kind::keyword) && lower(tok.text) == w;
  }
  std::string text() const { return tok.text; }
  std::string key() const { return lower(tok.text); }
};

[[noreturn]] void fail(const SourceSpan& s, std::vector<std::string> expected, const std::string& msg,
                       std::string rule = "syntax") {
  throw ParseError(std::move(rule), s, std::move(expected), msg);
}

class SExprReader {
 public:
  SExprReader(std::vector<Token> toks, SourceSpan eof) : toks_(std::move(toks)), eof_(std::move(eof)) {}

  SExpr read_document() {
    if (toks_.empty()) fail(eof_, {"("}, "empty document");
    SExpr e = read();
    if (pos_ < toks_.size()) fail(toks_[pos_].span, {"end of input"}, "trailing input after document");
    return e;
  }

 private:
  SExpr read() {
    if (pos_ >= toks_.size()) fail(eof_, {"(", ")"}, "unexpected end of input");
    const Token& t = toks_[pos_++];
    if (t.kind == Token::Kind::rparen) fail(t.span, {"(", "symbol"}, "unexpected ')'");
    SExpr e;
    e.span = t.span;
    if (t.kind != Token::Kind::lparen) {
      e.tok = t;
      return e;
    }
    e.is_list = true;
    e.tok = t;
    while (true) {
      if (pos_ >= toks_.size()) fail(eof_, {")"}, "unterminated list opened at line " + std::to_string(t.span.line));
      if (toks_[pos_].kind == Token::Kind::rparen) {
        ++pos_;
        break;
      }
      e.items.push_back(read());
    }
    return e;
  }

  std::vector<Token> toks_;
  SourceSpan eof_;
  std::size_t pos_ = 0;
};

SExpr read_document(std::string_view text, const std::string& file) {
  auto toks = tokenize(text, file);
  // report a premature end just past the last visible character
  std::string_view body = text.substr(0, text.find_last_not_of(" \t\r\n") + 1);
  std::size_t line = 1 + static_cast<std::size_t>(std::count(body.begin(), body.end(), '\n'));
  std::size_t last_nl = body.rfind('\n');
  std::size_t col = (last_nl == std::string_view::npos ? body.size() : body.size() - last_nl - 1) + 1;
  SourceSpan eof = make_span(std::make_shared<const std::string>(file), line, col, 0);
  return SExprReader(std::move(toks), eof).read_document();
}

const SExpr& expect_list(const SExpr& e, const std::string& what) {
  if (!e.is_list) fail(e.span, {"("}, "expected " + what + ", found '" + e.text() + "'");
  return e;
}

std::string expect_name(const SExpr& e, const std::string& what) {
  if (e.is_list || (e.tok.kind != Token::Kind::symbol && e.tok.kind != Token::Kind::integer))
    fail(e.span, {"symbol"}, "expected " + what);
  return e.text();
}

std::string expect_variable(const SExpr& e) {
  if (e.is_list || e.tok.kind != Token::Kind::variable) fail(e.span, {"?variable"}, "expected a variable");
  return e.text().substr(1);
}

Term parse_term(const SExpr& e) {
  if (e.is_list) fail(e.span, {"?variable", "constant"}, "expected a term");
  if (e.tok.kind == Token::Kind::variable) return Term::variable(e.text().substr(1));
  if (e.tok.kind == Token::Kind::symbol || e.tok.kind == Token::Kind::integer) return Term::constant(e.text());
  fail(e.span, {"?variable", "constant"}, "expected a term, found '" + e.text() + "'");
}

// name* ("-" type name*)*  ->  (name, type)
std::vector<std::pair<std::string, std::string>> parse_typed_list(const SExpr& list, std::size_t from, bool variables) {
  std::vector<std::pair<std::string, std::string>> out;
  std::vector<std::string> pending;
  for (std::size_t i = from; i < list.size(); ++i) {
    const SExpr& e = list[i];
    if (e.is_word("-")) {
      if (i + 1 >= list.size()) fail(e.span, {"type"}, "missing type after '-'");
      const SExpr& t = list[++i];
      if (t.is_list) fail(t.span, {"type"}, "'either' types are not supported", "unsupported-feature");
      std::string type = expect_name(t, "a type name");
      if (pending.empty()) fail(e.span, {variables ? "?variable" : "name"}, "type annotation without names");
      for (auto& p : pending) out.emplace_back(std::move(p), type);
      pending.clear();
      continue;
    }
    pending.push_back(variables ? expect_variable(e) : expect_name(e, "a name"));
  }
  for (auto& p : pending) out.emplace_back(std::move(p), kRootType);
  return out;
}

std::vector<TypedVariable> parse_params(const SExpr& e) {
  expect_list(e, "a parameter list");
  std::vector<TypedVariable> out;
  for (auto& [n, t] : parse_typed_list(e, 0, true)) out.push_back({n, t});
  return out;
}

Atom parse_atom(const SExpr& e) {
  expect_list(e, "an atom");
  if (e.size() == 0) fail(e.span, {"predicate"}, "empty atom");
  Atom a;
  a.predicate = expect_name(e[0], "a predicate name");
  for (std::size_t i = 1; i < e.size(); ++i) a.args.push_back(parse_term(e[i]));
  a.span = e.span;
  return a;
}

Formula parse_formula(const SExpr& e) {
  expect_list(e, "a formula");
  Formula f;
  if (e.size() == 0) {
    f = Formula::truth();
  } else if (e[0].is_list) {
    fail(e[0].span, {"and", "or", "not", "imply", "forall", "exists", "=", "predicate"}, "unexpected list");
  } else {
    const std::string head = e[0].key();
    auto subs = [&](std::size_t from) {
      std::vector<Formula> out;
      for (std::size_t i = from; i < e.size(); ++i) out.push_back(parse_formula(e[i]));
      return out;
    };
    if (head == "and") {
      f = Formula::all(subs(1));
    } else if (head == "or") {
      f = Formula::any(subs(1));
    } else if (head == "not") {
      if (e.size() != 2) fail(e.span, {"formula"}, "'not' takes one argument");
      f = Formula::negate(parse_formula(e[1]));
    } else if (head == "imply") {
      if (e.size() != 3) fail(e.span, {"formula"}, "'imply' takes two arguments");
      f = Formula::implies(parse_formula(e[1]), parse_formula(e[2]));
    } else if (head == "forall" || head == "exists") {
      if (e.size() != 3) fail(e.span, {"(variables) formula"}, "'" + head + "' takes a variable list and a body");
      auto vars = parse_params(e[1]);
      if (vars.empty()) fail(e[1].span, {"?variable"}, "quantifier without variables");
      f = parse_formula(e[2]);
      for (auto it = vars.rbegin(); it != vars.rend(); ++it)
        f = head == "forall" ? Formula::forall(*it, std::move(f)) : Formula::exists(*it, std::move(f));
    } else if (head == "=") {
      if (e.size() != 3) fail(e.span, {"term"}, "'=' takes two terms");
      f = Formula::equals(parse_term(e[1]), parse_term(e[2]));
    } else if (head == "when" || head == "preference" || head == "sometime" || head == "always") {
      fail(e.span, {"formula"}, "'" + head + "' is not supported", "unsupported-feature");
    } else {
      f = Formula::of(parse_atom(e));
    }
  }
  f.span = e.span;
  return f;
}

// (at start X) / (at end X) / (over all X)
enum class Timing { none, start, end, overall };

Timing timing_of(const SExpr& e) {
  if (!e.is_list || e.size() != 3 || !e[2].is_list) return Timing::none;
  if (e[0].is_word("at") && e[1].is_word("start")) return Timing::start;
  if (e[0].is_word("at") && e[1].is_word("end")) return Timing::end;
  if (e[0].is_word("over") && e[1].is_word("all")) return Timing::overall;
  return Timing::none;
}

std::vector<const SExpr*> conjuncts(const SExpr& e) {
  std::vector<const SExpr*> out;
  if (e.is_list && e.size() > 0 && e[0].is_word("and")) {
    for (std::size_t i = 1; i < e.size(); ++i) out.push_back(&e[i]);
  } else if (e.is_list && e.size() > 0) {
    out.push_back(&e);
  }
  return out;
}

Formula combine(std::vector<Formula> parts) {
  if (parts.size() == 1) return std::move(parts.front());
  return Formula::all(std::move(parts));
}

void parse_literals(const SExpr& e, SnapAction& snap) {
  expect_list(e, "an effect");
  if (e.size() == 0) return;
  if (e[0].is_word("and")) {
    for (std::size_t i = 1; i < e.size(); ++i) parse_literals(e[i], snap);
    return;
  }
  if (e[0].is_word("not")) {
    if (e.size() != 2) fail(e.span, {"atom"}, "'not' takes one atom");
    snap.del.push_back(parse_atom(e[1]));
    return;
  }
  if (e[0].is_word("forall") || e[0].is_word("when") || e[0].is_word("increase") || e[0].is_word("decrease") ||
      e[0].is_word("assign"))
    fail(e.span, {"literal"}, "'" + e[0].text() + "' effects are not supported", "unsupported-feature");
  snap.add.push_back(parse_atom(e));
}

DurationExpr parse_duration_expr(const SExpr& e) {
  if (!e.is_list) {
    if (e.tok.kind == Token::Kind::integer) return DurationExpr::literal(std::stoll(e.text()));
    fail(e.span, {"integer", "(duration id)", "(+ ...)", "(- ...)", "(* ...)"},
         "expected integer duration expression, found '" + e.text() + "'", "non-integer");
  }
  if (e.size() == 0) fail(e.span, {"integer"}, "empty duration expression");
  const std::string head = e[0].key();
  if (head == "duration") {
    if (e.size() == 1) return DurationExpr::duration_of("");
    if (e.size() == 2) return DurationExpr::duration_of(expect_name(e[1], "a task id"));
    fail(e.span, {")"}, "'duration' takes at most one task id");
  }
  DurationExpr::Kind k;
  if (head == "+") k = DurationExpr::Kind::sum;
  else if (head == "-") k = DurationExpr::Kind::difference;
  else if (head == "*") k = DurationExpr::Kind::product;
  else if (head == "/") fail(e.span, {"+", "-", "*"}, "division is not supported in duration expressions", "unsupported-feature");
  else fail(e[0].span, {"+", "-", "*", "duration"}, "unknown duration operator '" + e[0].text() + "'");
  if (e.size() < 3) fail(e.span, {"operand"}, "arithmetic operator needs at least two operands");
  std::vector<DurationExpr> ops;
  for (std::size_t i = 1; i < e.size(); ++i) ops.push_back(parse_duration_expr(e[i]));
  return DurationExpr::apply(k, std::move(ops));
}

std::vector<std::string> parse_id_set(const SExpr& e) {
  if (!e.is_list) return {expect_name(e, "a task id")};
  std::vector<std::string> out;
  for (const auto& i : e.items) out.push_back(expect_name(i, "a task id"));
  return out;
}

TimePoint parse_time_point(const SExpr& e) {
  if (!e.is_list || e.size() < 1 || e.size() > 2 || !(e[0].is_word("start") || e[0].is_word("end")))
    fail(e.span, {"(start id)", "(end id)"}, "expected a time point");
  TimePoint p;
  p.side = e[0].is_word("start") ? TimePoint::Side::start : TimePoint::Side::end;
  if (e.size() == 2) p.id = expect_name(e[1], "a task id");
  return p;
}

Task parse_task(const SExpr& e) {
  Atom a = parse_atom(e);
  return {a.predicate, a.args, e.span};
}

class NetworkBuilder {
 public:
  explicit NetworkBuilder(TaskNetwork& w) : w_(w) {}

  void subtasks(const SExpr& e, bool ordered) {
    expect_list(e, "a subtask list");
    std::vector<const SExpr*> items;
    if (e.size() > 0 && e[0].is_word("and")) {
      for (std::size_t i = 1; i < e.size(); ++i) items.push_back(&e[i]);
    } else if (e.size() > 0) {
      items.push_back(&e);
    }
    std::vector<std::string> added;
    for (const SExpr* it : items) {
      expect_list(*it, "a subtask");
      std::string id;
      Task t;
      if (it->size() == 2 && !(*it)[0].is_list && (*it)[1].is_list) {
        id = expect_name((*it)[0], "a task id");
        t = parse_task((*it)[1]);
      } else {
        t = parse_task(*it);
        do {
          id = "_t" + std::to_string(auto_++);
        } while (w_.alpha.count(id));
      }
      if (w_.alpha.count(id)) fail(it->span, {"fresh task id"}, "duplicate task id '" + id + "'", "duplicate-declaration");
      w_.add_task(id, std::move(t));
      added.push_back(id);
    }
    if (ordered)
      for (std::size_t i = 1; i < added.size(); ++i)
        w_.co.push_back({TimePoint::end_of(added[i - 1]), Relation::le, TimePoint::start_of(added[i]), e.span});
  }

  void ordering(const SExpr& e) {
    for (const SExpr* c : conjuncts(expect_list(e, "an ordering"))) {
      if (!c->is_list || c->size() != 3 || (*c)[0].is_list)
        fail(c->span, {"(< a b)", "(<= (end a) (start b))"}, "malformed ordering constraint");
      auto rel = parse_relation((*c)[0].text());
      if (!rel) fail((*c)[0].span, {"<", "<=", ">", ">=", "=", "!="}, "unknown relation '" + (*c)[0].text() + "'");
      const SExpr& l = (*c)[1];
      const SExpr& r = (*c)[2];
      if (!l.is_list && !r.is_list) {
        // Task-level precedence sugar: (< a b) means a ends before b starts.
        std::string a = expect_name(l, "a task id"), b = expect_name(r, "a task id");
        if (*rel == Relation::gt || *rel == Relation::ge) std::swap(a, b);
        else if (*rel != Relation::lt && *rel != Relation::le)
          fail(c->span, {"<", ">"}, "task-level ordering supports only < and >");
        w_.co.push_back({TimePoint::end_of(a), Relation::le, TimePoint::start_of(b), c->span});
        continue;
      }
      w_.co.push_back({parse_time_point(l), *rel, parse_time_point(r), c->span});
    }
  }

  void constraints(const SExpr& e) {
    for (const SExpr* c : conjuncts(expect_list(e, "a constraint list"))) {
      const SExpr& x = *c;
      if (x.size() == 0 || x[0].is_list) fail(x.span, {"=", "not", "at", "before", "after", "between"}, "malformed constraint");
      const std::string head = x[0].key();
      if (head == "=" || (head == "not" && x.size() == 2 && x[1].is_list && x[1].size() == 3 && x[1][0].is_word("="))) {
        const SExpr& eq = head == "=" ? x : x[1];
        if (eq.size() != 3) fail(eq.span, {"term"}, "'=' takes two terms");
        w_.cv.push_back({parse_term(eq[1]), head == "=", parse_term(eq[2]), x.span});
        continue;
      }
      DecompositionConstraint dc;
      if (Timing t = timing_of(x); t != Timing::none) {
        auto phase = t == Timing::start ? DecompositionConstraint::Phase::at_start
                     : t == Timing::end ? DecompositionConstraint::Phase::at_end
                                        : DecompositionConstraint::Phase::overall;
        dc = DecompositionConstraint::method_condition(phase, parse_formula(x[2]));
      } else if (head == "at" && x.size() == 3) {
        dc = DecompositionConstraint::at(parse_time_point(x[1]), parse_formula(x[2]));
      } else if ((head == "before" || head == "after") && x.size() == 3) {
        auto ids = parse_id_set(x[1]);
        dc = head == "before" ? DecompositionConstraint::before(ids, parse_formula(x[2]))
                              : DecompositionConstraint::after(ids, parse_formula(x[2]));
      } else if (head == "between" && x.size() == 4) {
        dc = DecompositionConstraint::between(parse_id_set(x[1]), parse_id_set(x[2]), parse_formula(x[3]));
      } else {
        fail(x.span, {"(= t t)", "(at (end id) φ)", "(before ids φ)", "(after ids φ)", "(between ids ids φ)"},
             "unknown constraint form '" + x[0].text() + "'");
      }
      dc.span = x.span;
      w_.ct.push_back(std::move(dc));
    }
  }

  void durations(const SExpr& e) {
    for (const SExpr* c : conjuncts(expect_list(e, "a duration constraint list"))) {
      if (c->size() != 3 || (*c)[0].is_list) fail(c->span, {"(rel expr expr)"}, "malformed duration constraint");
      auto rel = parse_relation((*c)[0].text());
      if (!rel) fail((*c)[0].span, {"<", "<=", ">", ">=", "=", "!="}, "unknown relation '" + (*c)[0].text() + "'");
      w_.cd.push_back({parse_duration_expr((*c)[1]), *rel, parse_duration_expr((*c)[2]), c->span});
    }
  }

  void method_precondition(const SExpr& e) {
    std::vector<Formula> untimed;
    for (const SExpr* c : conjuncts(expect_list(e, "a precondition"))) {
      Timing t = timing_of(*c);
      if (t == Timing::none) {
        untimed.push_back(parse_formula(*c));
        continue;
      }
      auto phase = t == Timing::start ? DecompositionConstraint::Phase::at_start
                   : t == Timing::end ? DecompositionConstraint::Phase::at_end
                                      : DecompositionConstraint::Phase::overall;
      auto dc = DecompositionConstraint::method_condition(phase, parse_formula((*c)[2]));
      dc.span = c->span;
      w_.ct.push_back(std::move(dc));
    }
    if (!untimed.empty()) {
      auto dc = DecompositionConstraint::method_condition(DecompositionConstraint::Phase::at_start,
                                                          combine(std::move(untimed)));
      dc.span = e.span;
      w_.ct.push_back(std::move(dc));
    }
  }

  // Handles one `:keyword value` pair; false when the keyword is not a network section.
  bool section(const std::string& key, const SExpr& value) {
    if (key == ":subtasks" || key == ":tasks") subtasks(value, false);
    else if (key == ":ordered-subtasks" || key == ":ordered-tasks") subtasks(value, true);
    else if (key == ":ordering") ordering(value);
    else if (key == ":constraints") constraints(value);
    else if (key == ":duration-constraints") durations(value);
    else return false;
    return true;
  }

 private:
  TaskNetwork& w_;
  int auto_ = 0;
};

const std::set<std::string>& known_requirements() {
  static const std::set<std::string> known = {
      ":strips", ":typing", ":negative-preconditions", ":disjunctive-preconditions", ":equality",
      ":existential-preconditions", ":universal-preconditions", ":quantified-preconditions", ":adl",
      ":hierarchy", ":method-preconditions", ":durative-actions", ":method-constraints",
      ":duration-inequalities", ":universal-effects", ":conditional-effects"};
  return known;
}

std::vector<std::string> parse_requirements(const SExpr& sec, std::vector<Diagnostic>& notes) {
  std::vector<std::string> out;
  for (std::size_t i = 1; i < sec.size(); ++i) {
    if (sec[i].is_list || sec[i].tok.kind != Token::Kind::keyword) fail(sec[i].span, {":requirement"}, "expected a requirement flag");
    std::string r = sec[i].key();
    if (!known_requirements().count(r))
      notes.push_back({sec[i].span, Diagnostic::Severity::warning, "unknown-requirement", "unknown requirement " + r});
    out.push_back(r);
  }
  return out;
}

// Iterates `:key value` pairs from index `from` of a list.
template <typename F>
void keyword_pairs(const SExpr& e, std::size_t from, F&& on_pair) {
  for (std::size_t i = from; i < e.size(); i += 2) {
    if (e[i].is_list || e[i].tok.kind != Token::Kind::keyword) fail(e[i].span, {":keyword"}, "expected a keyword");
    if (i + 1 >= e.size()) fail(e[i].span, {"value"}, "keyword " + e[i].text() + " has no value");
    on_pair(e[i].key(), e[i + 1], e[i]);
  }
}

void check_define(const SExpr& doc, const char* kind) {
  expect_list(doc, "(define ...)");
  if (doc.size() < 2 || !doc[0].is_word("define")) fail(doc.span, {"define"}, "document must start with (define");
  const SExpr& head = expect_list(doc[1], std::string("(") + kind + " name)");
  if (head.size() != 2 || !head[0].is_word(kind)) fail(head.span, {kind}, std::string("expected (") + kind + " name)");
}

Action parse_action(const SExpr& e, bool durative) {
  Action a;
  a.durative = durative;
  a.name = expect_name(e[1], "an action name");
  a.span = e.span;
  a.start.name = a.name;
  a.end.name = a.name;
  bool have_duration = false;
  keyword_pairs(e, 2, [&](const std::string& key, const SExpr& v, const SExpr& k) {
    if (key == ":parameters") {
      a.params = parse_params(v);
    } else if (!durative && key == ":precondition") {
      a.start.precond = parse_formula(v);
    } else if (!durative && key == ":effect") {
      parse_literals(v, a.start);
    } else if (durative && key == ":duration") {
      have_duration = true;
      if (v.is_list && v.size() == 3 && v[0].is_word("=") && v[1].is_atom() && lower(v[1].text()) == "?duration")
        a.duration = parse_duration_expr(v[2]);
      else if (v.is_list && v.size() == 3 && v[1].is_atom() && lower(v[1].text()) == "?duration")
        fail(v.span, {"(= ?duration n)"}, "duration inequalities on actions are not supported", "unsupported-feature");
      else
        a.duration = parse_duration_expr(v);
    } else if (durative && key == ":condition") {
      std::vector<Formula> st, inv, en;
      for (const SExpr* c : conjuncts(expect_list(v, "a condition"))) {
        Timing t = timing_of(*c);
        if (t == Timing::none) fail(c->span, {"(at start φ)", "(at end φ)", "(over all φ)"}, "durative condition must be timed");
        (t == Timing::start ? st : t == Timing::end ? en : inv).push_back(parse_formula((*c)[2]));
      }
      a.start.precond = st.empty() ? Formula::truth() : combine(std::move(st));
      a.end.precond = en.empty() ? Formula::truth() : combine(std::move(en));
      a.invariant = inv.empty() ? Formula::truth() : combine(std::move(inv));
    } else if (durative && key == ":effect") {
      for (const SExpr* c : conjuncts(expect_list(v, "an effect"))) {
        Timing t = timing_of(*c);
        if (t != Timing::start && t != Timing::end)
          fail(c->span, {"(at start eff)", "(at end eff)"}, "durative effect must be (at start ...) or (at end ...)");
        parse_literals((*c)[2], t == Timing::start ? a.start : a.end);
      }
    } else {
      fail(k.span, durative ? std::vector<std::string>{":parameters", ":duration", ":condition", ":effect"}
                            : std::vector<std::string>{":parameters", ":precondition", ":effect"},
           "unexpected keyword " + key + " in action '" + a.name + "'");
    }
  });
  if (durative && !have_duration) fail(e.span, {":duration"}, "durative action '" + a.name + "' lacks :duration");
  return a;
}

Method parse_method(const SExpr& e) {
  Method m;
  m.name = expect_name(e[1], "a method name");
  m.span = e.span;
  bool have_task = false;
  NetworkBuilder nb(m.network);
  keyword_pairs(e, 2, [&](const std::string& key, const SExpr& v, const SExpr& k) {
    if (key == ":parameters") m.params = parse_params(v);
    else if (key == ":task") {
      m.task = parse_task(v);
      have_task = true;
    } else if (key == ":precondition") nb.method_precondition(v);
    else if (!nb.section(key, v))
      fail(k.span, {":parameters", ":task", ":precondition", ":subtasks", ":ordered-subtasks", ":ordering", ":constraints",
                    ":duration-constraints"},
           "unexpected keyword " + key + " in method '" + m.name + "'");
  });
  if (!have_task) fail(e.span, {":task"}, "method '" + m.name + "' lacks :task");
  return m;
}

}  // namespace

Domain parse_domain(std::string_view text, const std::string& file) {
  SExpr doc = read_document(text, file);
  check_define(doc, "domain");
  Domain d;
  d.name = expect_name(doc[1][1], "a domain name");
  std::set<std::string> names;
  auto declare = [&](const std::string& n, const SourceSpan& s, const char* what) {
    if (!names.insert(n).second)
      fail(s, {"fresh name"}, std::string("duplicate ") + what + " '" + n + "'", "duplicate-declaration");
  };
  std::set<std::string> predicate_names;
  for (std::size_t i = 2; i < doc.size(); ++i) {
    const SExpr& sec = expect_list(doc[i], "a domain section");
    if (sec.size() == 0 || sec[0].is_list || sec[0].tok.kind != Token::Kind::keyword)
      fail(sec.span, {":requirements", ":types", ":constants", ":predicates", ":task", ":method", ":action", ":durative-action"},
           "expected a section keyword");
    const std::string key = sec[0].key();
    if (key == ":requirements") {
      d.requirements = parse_requirements(sec, d.notes);
    } else if (key == ":types") {
      for (auto& [t, parent] : parse_typed_list(sec, 1, false)) d.constants.types().declare(t, parent);
    } else if (key == ":constants") {
      for (auto& [c, t] : parse_typed_list(sec, 1, false)) {
        if (d.constants.contains(c)) fail(sec.span, {"fresh name"}, "duplicate constant '" + c + "'", "duplicate-declaration");
        if (!d.constants.types().contains(t))
          d.notes.push_back({sec.span, Diagnostic::Severity::error, "unknown-type",
                             "constant '" + c + "' has undeclared type '" + t + "'"});
        d.constants.add(c, t);
      }
    } else if (key == ":predicates") {
      for (std::size_t j = 1; j < sec.size(); ++j) {
        const SExpr& p = expect_list(sec[j], "a predicate declaration");
        if (p.size() == 0) fail(p.span, {"predicate"}, "empty predicate declaration");
        PredicateSchema ps{expect_name(p[0], "a predicate name"), {}, p.span};
        for (auto& [n, t] : parse_typed_list(p, 1, true)) ps.params.push_back({n, t});
        if (!predicate_names.insert(ps.name).second)
          fail(p.span, {"fresh name"}, "duplicate predicate '" + ps.name + "'", "duplicate-declaration");
        d.predicates.push_back(std::move(ps));
      }
    } else if (key == ":functions") {
      d.notes.push_back({sec.span, Diagnostic::Severity::error, "unsupported-feature",
                         "numeric fluents (:functions) are not supported"});
    } else if (key == ":task") {
      if (sec.size() < 2) fail(sec.span, {"name"}, "task declaration without name");
      TaskSchema ts{expect_name(sec[1], "a task name"), {}, sec.span};
      declare(ts.name, sec.span, "task");
      keyword_pairs(sec, 2, [&](const std::string& k, const SExpr& v, const SExpr& ks) {
        if (k != ":parameters") fail(ks.span, {":parameters"}, "unexpected keyword " + k + " in task declaration");
        ts.params = parse_params(v);
      });
      d.tasks.push_back(std::move(ts));
    } else if (key == ":action" || key == ":durative-action") {
      if (sec.size() < 2) fail(sec.span, {"name"}, "action without name");
      Action a = parse_action(sec, key == ":durative-action");
      declare(a.name, sec.span, "action");
      d.actions.push_back(std::move(a));
    } else if (key == ":method") {
      if (sec.size() < 2) fail(sec.span, {"name"}, "method without name");
      Method m = parse_method(sec);
      if (d.method(m.name)) fail(sec.span, {"fresh name"}, "duplicate method '" + m.name + "'", "duplicate-declaration");
      d.methods.push_back(std::move(m));
    } else {
      fail(sec[0].span, {":requirements", ":types", ":constants", ":predicates", ":task", ":method", ":action", ":durative-action"},
           "unknown domain section " + key);
    }
  }
  return d;
}

Problem parse_problem(std::string_view text, const std::string& file) {
  SExpr doc = read_document(text, file);
  check_define(doc, "problem");
  Problem p;
  p.name = expect_name(doc[1][1], "a problem name");
  for (std::size_t i = 2; i < doc.size(); ++i) {
    const SExpr& sec = expect_list(doc[i], "a problem section");
    if (sec.size() == 0 || sec[0].is_list || sec[0].tok.kind != Token::Kind::keyword)
      fail(sec.span, {":domain", ":objects", ":htn", ":init", ":goal"}, "expected a section keyword");
    const std::string key = sec[0].key();
    if (key == ":domain") {
      if (sec.size() != 2) fail(sec.span, {"name"}, "expected (:domain name)");
      p.domain_name = expect_name(sec[1], "a domain name");
    } else if (key == ":requirements") {
      p.requirements = parse_requirements(sec, p.notes);
    } else if (key == ":objects") {
      for (auto& [o, t] : parse_typed_list(sec, 1, false)) {
        if (p.objects.contains(o)) fail(sec.span, {"fresh name"}, "duplicate object '" + o + "'", "duplicate-declaration");
        p.objects.add(o, t);
      }
    } else if (key == ":htn") {
      NetworkBuilder nb(p.network);
      keyword_pairs(sec, 1, [&](const std::string& k, const SExpr& v, const SExpr& ks) {
        if (k == ":parameters") p.htn_params = parse_params(v);
        else if (!nb.section(k, v))
          fail(ks.span, {":parameters", ":subtasks", ":ordered-subtasks", ":ordering", ":constraints", ":duration-constraints"},
               "unexpected keyword " + k + " in :htn");
      });
    } else if (key == ":init") {
      for (std::size_t j = 1; j < sec.size(); ++j) {
        const SExpr& a = expect_list(sec[j], "an initial atom");
        if (a.size() > 0 && a[0].is_word("not")) fail(a.span, {"atom"}, "negative literals are implicit in the initial state");
        if (a.size() > 0 && (a[0].is_word("=") || (a[0].is_word("at") && a.size() == 3 && a[1].tok.kind == Token::Kind::integer)))
          fail(a.span, {"atom"}, "numeric or timed initial facts are not supported", "unsupported-feature");
        p.init.insert(parse_atom(a));
      }
    } else if (key == ":goal") {
      if (sec.size() != 2) fail(sec.span, {"formula"}, "expected (:goal formula)");
      p.goal = parse_formula(sec[1]);
    } else if (key == ":constraints" || key == ":metric") {
      p.notes.push_back({sec.span, Diagnostic::Severity::error, "unsupported-feature", key + " is not supported"});
    } else {
      fail(sec[0].span, {":domain", ":objects", ":htn", ":init", ":goal"}, "unknown problem section " + key);
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// Plans

const PlanAction* PlanDocument::action(const std::string& id) const {
  for (const auto& a : actions)
    if (a.id == id) return &a;
  return nullptr;
}

const PlanDecomposition* PlanDocument::decomposition(const std::string& id) const {
  for (const auto& d : decompositions)
    if (d.id == id) return &d;
  return nullptr;
}

std::int64_t PlanDocument::makespan() const {
  std::int64_t m = 0;
  for (const auto& a : actions) m = std::max(m, a.date + a.duration);
  return m;
}

namespace {

std::vector<std::pair<std::string, std::size_t>> split_words(const std::string& s) {
  std::vector<std::pair<std::string, std::size_t>> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t b = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > b) out.emplace_back(s.substr(b, i - b), b);
  }
  return out;
}

std::int64_t parse_integer(const std::string& w, const SourceSpan& s, const char* what) {
  std::string body = w;
  bool negative = !body.empty() && body[0] == '-';
  if (negative) body = body.substr(1);
  if (!all_digits(body))
    fail(s, {"non-negative integer"}, std::string(what) + " '" + w + "' is not an integer", "non-integer");
  if (negative) fail(s, {"non-negative integer"}, std::string(what) + " '" + w + "' is negative", "negative-date");
  return std::stoll(body);
}

}  // namespace

void check_plan_structure(const PlanDocument& doc) {
  std::map<std::string, SourceSpan> defined;
  auto define = [&](const std::string& id, const SourceSpan& s) {
    if (!defined.emplace(id, s).second)
      fail(s, {"fresh identifier"}, "identifier '" + id + "' is defined twice", "duplicate-identifier");
  };
  for (const auto& a : doc.actions) {
    define(a.id, a.span);
    if (a.date < 0) fail(a.span, {"non-negative integer"}, "negative date for '" + a.id + "'", "negative-date");
    if (a.duration < 0) fail(a.span, {"non-negative integer"}, "negative duration for '" + a.id + "'", "negative-date");
  }
  for (const auto& d : doc.decompositions) define(d.id, d.span);
  std::set<std::string> referenced;
  auto reference = [&](const std::string& id, const SourceSpan& s) {
    if (!referenced.insert(id).second)
      fail(s, {"fresh identifier"}, "identifier '" + id + "' has more than one parent", "duplicate-identifier");
    if (!defined.count(id))
      fail(s, {"timed action line"}, "task '" + id + "' has neither a timed action line nor a decomposition",
           "missing-timed-entry");
  };
  for (const auto& r : doc.roots) reference(r, doc.roots_span);
  for (const auto& d : doc.decompositions)
    for (const auto& c : d.children) reference(c, d.span);
  for (const auto& [id, span] : defined)
    if (!referenced.count(id))
      fail(span, {"root or child reference"}, "identifier '" + id + "' is not part of the hierarchy", "unreferenced-identifier");
}

PlanDocument parse_plan(std::string_view text, const std::string& file) {
  auto fname = std::make_shared<const std::string>(file);
  PlanDocument doc;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  bool hierarchy = false, have_root = false, closed = false;
  std::size_t implicit = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto words = split_words(line);
    if (words.empty() || words[0].first[0] == ';') continue;
    SourceSpan span = make_span(fname, lineno, words[0].second + 1, line.size() - words[0].second);
    if (closed) fail(span, {"end of input"}, "content after '<=='");
    if (words[0].first == "==>") {
      if (hierarchy) fail(span, {"root", "<id> <task> -> <method> <children>"}, "duplicate '==>'");
      hierarchy = true;
      continue;
    }
    if (!hierarchy) {
      std::size_t colon = line.find(':');
      if (colon == std::string::npos)
        fail(span, {"<date>: (<task>) [<duration>]", "==>"}, "expected a timed action line");
      auto prefix = split_words(line.substr(0, colon));
      if (prefix.empty() || prefix.size() > 2) fail(span, {"[<id>] <date>:"}, "malformed action line prefix");
      PlanAction a;
      a.span = span;
      a.id = prefix.size() == 2 ? prefix[0].first : std::to_string(implicit);
      ++implicit;
      SourceSpan date_span = make_span(fname, lineno, prefix.back().second + 1, prefix.back().first.size());
      a.date = parse_integer(prefix.back().first, date_span, "date");
      std::string rest = line.substr(colon + 1);
      std::size_t open = rest.find('('), close = rest.find(')');
      if (open == std::string::npos || close == std::string::npos || close < open)
        fail(span, {"(<task> <args>)"}, "expected a parenthesized task");
      auto task_words = split_words(rest.substr(open + 1, close - open - 1));
      if (task_words.empty()) fail(span, {"task name"}, "empty task");
      a.task.name = task_words[0].first;
      a.task.span = span;
      for (std::size_t k = 1; k < task_words.size(); ++k) a.task.args.push_back(Term::constant(task_words[k].first));
      std::string tail = rest.substr(close + 1);
      std::size_t lb = tail.find('['), rb = tail.find(']');
      if (lb == std::string::npos || rb == std::string::npos || rb < lb)
        fail(span, {"[<duration>]"}, "expected a bracketed duration");
      auto dur = split_words(tail.substr(lb + 1, rb - lb - 1));
      if (dur.size() != 1) fail(span, {"[<duration>]"}, "expected a single duration value");
      a.duration = parse_integer(dur[0].first, span, "duration");
      if (!split_words(tail.substr(rb + 1)).empty()) fail(span, {"end of line"}, "trailing text after duration");
      doc.actions.push_back(std::move(a));
      continue;
    }
    if (words[0].first == "<==") {
      closed = true;
      continue;
    }
    if (words[0].first == "root") {
      if (have_root) fail(span, {"<id> <task> -> <method> <children>"}, "duplicate root line", "duplicate-identifier");
      have_root = true;
      doc.roots_span = span;
      for (std::size_t k = 1; k < words.size(); ++k) doc.roots.push_back(words[k].first);
      continue;
    }
    PlanDecomposition d;
    d.span = span;
    auto arrow = std::find_if(words.begin(), words.end(), [](const auto& w) { return w.first == "->"; });
    if (arrow != words.end()) {
      std::size_t ai = static_cast<std::size_t>(arrow - words.begin());
      if (ai < 2 || ai + 1 >= words.size()) fail(span, {"<id> <task> <args> -> <method> <children>"}, "malformed decomposition line");
      d.id = words[0].first;
      d.task.name = words[1].first;
      for (std::size_t k = 2; k < ai; ++k) d.task.args.push_back(Term::constant(words[k].first));
      d.method = words[ai + 1].first;
      for (std::size_t k = ai + 2; k < words.size(); ++k) d.children.push_back(words[k].first);
    } else {
      if (words.size() < 3) fail(span, {"<id> <task> <args> -> <method> <children>"}, "malformed decomposition line");
      d.id = words[0].first;
      d.task.name = words[1].first;
      d.task_args_given = false;
      d.method = words[2].first;
      for (std::size_t k = 3; k < words.size(); ++k) d.children.push_back(words[k].first);
    }
    d.task.span = span;
    doc.decompositions.push_back(std::move(d));
  }
  if (!have_root) {
    if (!doc.decompositions.empty()) fail(doc.decompositions.front().span, {"root"}, "hierarchy section lacks a root line");
    for (const auto& a : doc.actions) doc.roots.push_back(a.id);
  }
  std::stable_sort(doc.actions.begin(), doc.actions.end(),
                   [](const PlanAction& l, const PlanAction& r) { return l.date < r.date; });
  check_plan_structure(doc);
  return doc;
}

// ---------------------------------------------------------------------------
// Printers

namespace {

std::string typed(const std::vector<TypedVariable>& vs) {
  std::string out;
  for (std::size_t i = 0; i < vs.size(); ++i) out += (i ? " ?" : "?") + vs[i].name + " - " + vs[i].type;
  return out;
}

std::string conj(const std::vector<std::string>& parts) {
  if (parts.empty()) return "()";
  std::string out = "(and";
  for (const auto& p : parts) out += " " + p;
  return out + ")";
}

std::string literals(const SnapAction& s) {
  std::vector<std::string> parts;
  for (const auto& a : s.add) parts.push_back(a.str());
  for (const auto& a : s.del) parts.push_back("(not " + a.str() + ")");
  return conj(parts);
}

}  // namespace

std::string print_network_body(const TaskNetwork& w, const std::string& ind) {
  std::ostringstream os;
  std::vector<std::string> subs;
  for (const auto& id : w.ids) subs.push_back("(" + id + " " + w.alpha.at(id).str() + ")");
  os << ind << ":subtasks " << conj(subs);
  if (!w.co.empty()) {
    std::vector<std::string> parts;
    for (const auto& c : w.co) parts.push_back(c.str());
    os << "\n" << ind << ":ordering " << conj(parts);
  }
  if (!w.cv.empty() || !w.ct.empty()) {
    std::vector<std::string> parts;
    for (const auto& c : w.cv) parts.push_back(c.str());
    for (const auto& c : w.ct) parts.push_back(c.str());
    os << "\n" << ind << ":constraints " << conj(parts);
  }
  if (!w.cd.empty()) {
    std::vector<std::string> parts;
    for (const auto& c : w.cd) parts.push_back(c.str());
    os << "\n" << ind << ":duration-constraints " << conj(parts);
  }
  return os.str();
}

std::string print_domain(const Domain& d) {
  std::ostringstream os;
  os << "(define (domain " << d.name << ")\n";
  if (!d.requirements.empty()) {
    os << "  (:requirements";
    for (const auto& r : d.requirements) os << " " << r;
    os << ")\n";
  }
  const auto& types = d.constants.types();
  if (types.types().size() > 1) {
    os << "  (:types";
    for (const auto& t : types.types())
      if (t != kRootType) os << " " << t << " - " << *types.parent_of(t);
    os << ")\n";
  }
  if (!d.constants.objects().empty()) {
    os << "  (:constants";
    for (const auto& o : d.constants.objects()) os << " " << o.name << " - " << o.type;
    os << ")\n";
  }
  os << "  (:predicates";
  for (const auto& p : d.predicates) os << "\n    (" << p.name << (p.params.empty() ? "" : " ") << typed(p.params) << ")";
  os << ")\n";
  for (const auto& t : d.tasks) os << "  (:task " << t.name << " :parameters (" << typed(t.params) << "))\n";
  for (const auto& a : d.actions) {
    if (a.durative) {
      os << "  (:durative-action " << a.name << "\n    :parameters (" << typed(a.params) << ")\n"
         << "    :duration (= ?duration " << a.duration.str() << ")\n"
         << "    :condition (and (at start " << a.start.precond.str() << ") (over all " << a.invariant.str()
         << ") (at end " << a.end.precond.str() << "))\n"
         << "    :effect (and (at start " << literals(a.start) << ") (at end " << literals(a.end) << ")))\n";
    } else {
      os << "  (:action " << a.name << "\n    :parameters (" << typed(a.params) << ")\n"
         << "    :precondition " << a.start.precond.str() << "\n    :effect " << literals(a.start) << ")\n";
    }
  }
  for (const auto& m : d.methods) {
    os << "  (:method " << m.name << "\n    :parameters (" << typed(m.params) << ")\n    :task " << m.task.str()
       << "\n" << print_network_body(m.network, "    ") << ")\n";
  }
  os << ")\n";
  return os.str();
}

std::string print_problem(const Problem& p) {
  std::ostringstream os;
  os << "(define (problem " << p.name << ")\n  (:domain " << p.domain_name << ")\n";
  if (!p.requirements.empty()) {
    os << "  (:requirements";
    for (const auto& r : p.requirements) os << " " << r;
    os << ")\n";
  }
  os << "  (:objects";
  for (const auto& o : p.objects.objects()) os << " " << o.name << " - " << o.type;
  os << ")\n  (:htn\n";
  if (!p.htn_params.empty()) os << "    :parameters (" << typed(p.htn_params) << ")\n";
  os << print_network_body(p.network, "    ") << ")\n  (:init";
  for (const auto& a : p.init) os << "\n    " << a.str();
  os << ")\n";
  if (p.goal) os << "  (:goal " << p.goal->str() << ")\n";
  os << ")\n";
  return os.str();
}

std::string print_plan(const PlanDocument& doc) {
  std::ostringstream os;
  auto actions = doc.actions;
  std::stable_sort(actions.begin(), actions.end(), [](const PlanAction& l, const PlanAction& r) { return l.date < r.date; });
  for (const auto& a : actions) os << a.id << " " << a.date << ": " << a.task.str() << " [" << a.duration << "]\n";
  os << "==>\nroot";
  for (const auto& r : doc.roots) os << " " << r;
  os << "\n";
  for (const auto& d : doc.decompositions) {
    os << d.id << " " << d.task.name;
    if (d.task_args_given) {
      for (const auto& a : d.task.args) os << " " << a.str();
      os << " ->";
    }
    os << " " << d.method;
    for (const auto& c : d.children) os << " " << c;
    os << "\n";
  }
  os << "<==\n";
  return os.str();
}

}  // namespace hddl
