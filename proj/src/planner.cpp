#include "hddl/planner.hpp"

#include <algorithm>
#include <functional>
#include <limits>

namespace hddl {

// ---------------------------------------------------------------------------
// Point algebra

namespace {

using Bits = std::uint8_t;

Bits converse_bits(Bits b) {
  return static_cast<Bits>((b & PaGraph::kEq) | ((b & PaGraph::kLt) ? PaGraph::kGt : 0) |
                           ((b & PaGraph::kGt) ? PaGraph::kLt : 0));
}

Bits compose_basic(Bits x, Bits y) {
  if (x == PaGraph::kEq) return y;
  if (y == PaGraph::kEq) return x;
  if (x == y) return x;
  return PaGraph::kAll;
}

Bits compose(Bits a, Bits b) {
  Bits out = 0;
  for (Bits x : {PaGraph::kLt, PaGraph::kEq, PaGraph::kGt})
    if (a & x)
      for (Bits y : {PaGraph::kLt, PaGraph::kEq, PaGraph::kGt})
        if (b & y) out |= compose_basic(x, y);
  return out;
}

bool path_consistency(std::vector<Bits>& l, std::size_t n) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i) {
        if (i == k || l[i * n + k] == PaGraph::kAll) continue;
        for (std::size_t j = 0; j < n; ++j) {
          if (j == k || j == i) continue;
          Bits refined = l[i * n + j] & compose(l[i * n + k], l[k * n + j]);
          if (refined == l[i * n + j]) continue;
          if (refined == 0) return false;
          l[i * n + j] = refined;
          l[j * n + i] = converse_bits(refined);
          changed = true;
        }
      }
  }
  return true;
}

bool solve_pa(std::vector<Bits> l, std::size_t n) {
  if (!path_consistency(l, n)) return false;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (l[i * n + j] == (PaGraph::kLt | PaGraph::kGt)) {
        for (Bits choice : {PaGraph::kLt, PaGraph::kGt}) {
          auto copy = l;
          copy[i * n + j] = choice;
          copy[j * n + i] = converse_bits(choice);
          if (solve_pa(std::move(copy), n)) return true;
        }
        return false;
      }
  return true;
}

}  // namespace

std::uint8_t relation_bits(Relation r) {
  switch (r) {
    case Relation::lt: return PaGraph::kLt;
    case Relation::le: return PaGraph::kLt | PaGraph::kEq;
    case Relation::gt: return PaGraph::kGt;
    case Relation::ge: return PaGraph::kGt | PaGraph::kEq;
    case Relation::eq: return PaGraph::kEq;
    case Relation::ne: return PaGraph::kLt | PaGraph::kGt;
  }
  return PaGraph::kAll;
}

PaGraph::PaGraph(std::size_t n) : n_(n), labels_(n * n, kAll) {
  for (std::size_t i = 0; i < n; ++i) labels_[i * n + i] = kEq;
}

void PaGraph::constrain_bits(std::size_t i, std::size_t j, std::uint8_t bits) {
  labels_[i * n_ + j] &= bits;
  labels_[j * n_ + i] &= converse_bits(bits);
}

void PaGraph::constrain(std::size_t i, std::size_t j, Relation rel) { constrain_bits(i, j, relation_bits(rel)); }

bool pa_consistent(const PaGraph& g) {
  for (std::size_t i = 0; i < g.n_; ++i)
    for (std::size_t j = 0; j < g.n_; ++j)
      if (g.labels_[i * g.n_ + j] == 0) return false;
  return solve_pa(g.labels_, g.n_);
}

PaGraph network_pa_graph(const TaskNetwork& w, const std::vector<std::string>& root_ids,
                         const std::map<std::string, std::int64_t>& durations) {
  std::map<TimePoint, std::size_t> index;
  auto idx = [&](const TimePoint& p) { return index.emplace(p, index.size()).first->second; };
  for (const auto& [id, t] : w.alpha) {
    idx(TimePoint::start_of(id));
    idx(TimePoint::end_of(id));
  }
  idx(TimePoint::start_of(""));
  idx(TimePoint::end_of(""));
  for (const auto& c : w.co) {
    idx(c.left);
    idx(c.right);
  }
  PaGraph g(index.size());
  for (const auto& [id, t] : w.alpha) {
    auto d = durations.find(id);
    Relation r = d == durations.end() ? Relation::le : d->second > 0 ? Relation::lt : Relation::eq;
    g.constrain(index.at(TimePoint::start_of(id)), index.at(TimePoint::end_of(id)), r);
  }
  for (const auto& id : root_ids) {
    g.constrain(index.at(TimePoint::start_of("")), index.at(TimePoint::start_of(id)), Relation::le);
    g.constrain(index.at(TimePoint::end_of(id)), index.at(TimePoint::end_of("")), Relation::le);
  }
  for (const auto& c : w.co) g.constrain(index.at(c.left), index.at(c.right), c.rel);
  return g;
}

// ---------------------------------------------------------------------------
// Scheduling

namespace {


struct Interval {
  std::int64_t lo = 0, hi = 0;
  bool fixed() const { return lo == hi; }
};

bool feasible(Relation r, const Interval& x, const Interval& y) {
  switch (r) {
    case Relation::lt: return x.lo < y.hi;
    case Relation::le: return x.lo <= y.hi;
    case Relation::gt: return x.hi > y.lo;
    case Relation::ge: return x.hi >= y.lo;
    case Relation::eq: return std::max(x.lo, y.lo) <= std::min(x.hi, y.hi);
    case Relation::ne: return !(x.fixed() && y.fixed() && x.lo == y.lo);
  }
  return true;
}

class Scheduler {
 public:
  Scheduler(const TaskNetwork& w, std::vector<std::string> roots, AuxiliaryPoints aux,
            const std::map<std::string, std::int64_t>& durations, const GroundModel* gm, ScheduleOptions opts,
            std::optional<std::int64_t> bound)
      : w_(w), gm_(gm), opts_(opts), best_(bound) {
    for (const auto& id : w.ids) {
      index_[id] = prim_.size();
      prim_.push_back(id);
      auto d = durations.find(id);
      dur_.push_back(d == durations.end() ? 0 : d->second);
      act_.push_back(gm ? gm->find_action(w.alpha.at(id)) : nullptr);
      if (gm && !act_.back()) broken_ = true;
    }
    children_ = std::move(aux.children);
    children_[""] = std::move(roots);
    for (const auto& [id, kids] : children_) mark_undatable(id);
    for (const auto& c : w.co) {
      if (!known(c.left.id) || !known(c.right.id)) broken_ = true;
      if (!undatable_.count(c.left.id) && !undatable_.count(c.right.id)) co_.push_back(&c);
    }
    for (const auto& c : w.cd) {
      std::vector<std::string> refs;
      c.lhs.referenced_ids(refs);
      c.rhs.referenced_ids(refs);
      bool skip = false;
      for (const auto& r : refs) {
        if (!known(r)) broken_ = true;
        if (undatable_.count(r)) skip = true;
      }
      if (!skip) cd_.push_back(&c);
    }
    if (gm) {
      for (const auto& c : w.ct) {
        try {
          for (auto& o : normalize_constraint(c, w))
            if (!mentions_any(o, undatable_)) obligations_.push_back(std::move(o));
        } catch (const ModelError&) {
          broken_ = true;
        }
      }
      state_ = gm->init;
      tl_.initial = gm->init;
    }
    start_.assign(prim_.size(), -1);
    ob_done_.assign(obligations_.size(), 0);
  }

  ScheduleOutcome run() {
    if (!broken_) {
      if (prim_.empty()) leaf(0);
      else explore(0);
    }
    out_.nodes = nodes_;
    out_.node_limit_hit = stop_limit_;
    if (best_starts_) {
      out_.starts = best_starts_;
      out_.makespan = *best_;
    }
    return out_;
  }

 private:
  bool known(const std::string& id) const { return id.empty() || index_.count(id) || children_.count(id); }

  bool mark_undatable(const std::string& id) {
    if (index_.count(id)) return false;
    auto it = children_.find(id);
    if (it == children_.end()) return false;
    bool any = false;
    for (const auto& k : it->second)
      if (!mark_undatable(k)) any = true;
    if (!any) undatable_.insert(id);
    return !any;
  }

  std::optional<Interval> interval(const TimePoint& p, std::int64_t t_next) const {
    const bool end = p.side == TimePoint::Side::end;
    if (auto it = index_.find(p.id); it != index_.end()) {
      std::size_t i = it->second;
      std::int64_t shift = end ? dur_[i] : 0;
      if (start_[i] >= 0) return Interval{start_[i] + shift, start_[i] + shift};
      return Interval{t_next + shift, opts_.horizon - dur_[i] + shift};
    }
    if (undatable_.count(p.id)) return std::nullopt;
    auto it = children_.find(p.id);
    if (it == children_.end()) return std::nullopt;
    std::optional<Interval> acc;
    for (const auto& k : it->second) {
      auto c = interval({p.side, k}, t_next);
      if (!c) continue;
      if (!acc) acc = c;
      else if (end) acc = Interval{std::max(acc->lo, c->lo), std::max(acc->hi, c->hi)};
      else acc = Interval{std::min(acc->lo, c->lo), std::min(acc->hi, c->hi)};
    }
    return acc;
  }

  std::optional<std::int64_t> fixed_value(const TimePoint& p, std::int64_t t_next) const {
    auto iv = interval(p, t_next);
    if (iv && iv->fixed()) return iv->lo;
    return std::nullopt;
  }

  bool ordering_ok(std::int64_t t_next) {
    for (const auto* c : co_) {
      auto l = interval(c->left, t_next), r = interval(c->right, t_next);
      if (!l || !r) continue;
      // an empty window means the point no longer fits before the horizon
      if (l->lo > l->hi || r->lo > r->hi) {
        out_.horizon_cut = true;
        return false;
      }
      if (!feasible(c->rel, *l, *r)) return false;
    }
    return true;
  }

  bool durations_ok(std::int64_t t_next) const {
    auto lookup = [&](const std::string& id) -> std::optional<std::int64_t> {
      if (auto it = index_.find(id); it != index_.end()) return dur_[it->second];
      auto s = fixed_value(TimePoint::start_of(id), t_next), e = fixed_value(TimePoint::end_of(id), t_next);
      if (!s || !e) return std::nullopt;
      return *e - *s;
    };
    for (const auto* c : cd_) {
      auto l = c->lhs.evaluate(lookup), r = c->rhs.evaluate(lookup);
      if (l && r && !compare(c->rel, *l, *r)) return false;
    }
    return true;
  }

  // Checks every obligation whose window lies entirely at or before t.
  bool obligations_ok(std::int64_t t, std::int64_t t_next, std::vector<std::size_t>& newly_done) {
    for (std::size_t k = 0; k < obligations_.size(); ++k) {
      if (ob_done_[k]) continue;
      const auto& o = obligations_[k];
      PointDates dates;
      bool ready = true;
      for (const auto* ref : {&o.from, &o.to})
        for (const auto& p : ref->points) {
          auto v = fixed_value(p, t_next);
          if (!v) ready = false;
          else dates[p] = *v;
        }
      if (!ready) continue;
      std::int64_t last = std::numeric_limits<std::int64_t>::min();
      for (const auto& [p, v] : dates) last = std::max(last, v);
      // The window closes at its latest referenced point at the latest.
      if (last > t) continue;
      if (check_temporal_constraints(tl_, {o}, dates, gm_->pool)) return false;
      ob_done_[k] = 1;
      newly_done.push_back(k);
    }
    return true;
  }

  std::int64_t makespan_bound(std::int64_t t_next) const {
    std::int64_t m = 0;
    for (std::size_t i = 0; i < prim_.size(); ++i)
      m = std::max(m, start_[i] >= 0 ? start_[i] + dur_[i] : t_next + dur_[i]);
    return m;
  }

  const SnapAction& snap(std::size_t i, bool end) const { return end ? act_[i]->end : act_[i]->start; }
  bool has_end_snap(std::size_t i) const { return act_[i]->durative; }

  void explore(std::int64_t t) {
    if (done_ || stop_limit_) return;
    if (++nodes_ > opts_.node_limit) {
      stop_limit_ = true;
      return;
    }
    std::vector<std::pair<std::size_t, bool>> snaps;
    std::vector<std::size_t> unstarted;
    for (std::size_t i = 0; i < prim_.size(); ++i) {
      if (start_[i] < 0) {
        if (t + dur_[i] <= opts_.horizon) unstarted.push_back(i);
        else out_.horizon_cut = true;
        continue;
      }
      if (dur_[i] > 0 && start_[i] + dur_[i] == t && (!gm_ || has_end_snap(i))) snaps.emplace_back(i, true);
    }
    if (unstarted.size() != static_cast<std::size_t>(std::count(start_.begin(), start_.end(), -1))) return;

    if (gm_) {
      for (std::size_t a = 0; a < snaps.size(); ++a)
        for (std::size_t b = a + 1; b < snaps.size(); ++b)
          if (interferes(snap(snaps[a].first, true), snap(snaps[b].first, true))) return;
      for (const auto& [i, e] : snaps)
        if (!evaluate(state_, snap(i, e).precond)) return;
      for (std::size_t i = 0; i < prim_.size(); ++i)
        if (start_[i] >= 0 && act_[i]->durative && start_[i] < t && t < start_[i] + dur_[i] &&
            !evaluate(state_, act_[i]->invariant))
          return;
    }
    std::vector<std::size_t> chosen;
    choose(t, unstarted, 0, snaps, chosen);
  }

  bool compatible(std::size_t i, bool end, const std::vector<std::pair<std::size_t, bool>>& snaps) const {
    const SnapAction& s = snap(i, end);
    if (!evaluate(state_, s.precond)) return false;
    for (const auto& [j, e] : snaps)
      if (interferes(s, snap(j, e))) return false;
    return true;
  }

  void choose(std::int64_t t, const std::vector<std::size_t>& cands, std::size_t k,
              std::vector<std::pair<std::size_t, bool>>& snaps, std::vector<std::size_t>& chosen) {
    if (done_ || stop_limit_) return;
    if (k == cands.size()) {
      advance(t, snaps, chosen);
      return;
    }
    std::size_t i = cands[k];
    bool ok = true;
    std::size_t added = 0;
    if (gm_) {
      ok = compatible(i, false, snaps);
      if (ok) {
        snaps.emplace_back(i, false);
        ++added;
        if (dur_[i] == 0 && has_end_snap(i)) {
          ok = compatible(i, true, snaps);
          if (ok) {
            snaps.emplace_back(i, true);
            ++added;
          }
        }
      }
    }
    if (ok) {
      start_[i] = t;
      chosen.push_back(i);
      choose(t, cands, k + 1, snaps, chosen);
      chosen.pop_back();
      start_[i] = -1;
    }
    snaps.resize(snaps.size() - added);
    choose(t, cands, k + 1, snaps, chosen);
  }

  void advance(std::int64_t t, const std::vector<std::pair<std::size_t, bool>>& snaps,
               const std::vector<std::size_t>& chosen) {
    const std::int64_t t_next = t + 1;
    if (!ordering_ok(t_next) || !durations_ok(t_next)) return;
    if (best_ && makespan_bound(t_next) >= *best_) return;
    bool any_unstarted = std::count(start_.begin(), start_.end(), -1) > 0;
    bool happening = !snaps.empty() || (!gm_ && !chosen.empty());

    State saved;
    std::vector<std::size_t> newly_done;
    if (gm_ && happening) {
      saved = state_;
      TimelineStep step;
      step.date = t;
      step.pre = state_;
      for (const auto& [i, e] : snaps)
        for (const auto& a : snap(i, e).del) state_.erase(a);
      for (const auto& [i, e] : snaps)
        for (const auto& a : snap(i, e).add) state_.insert(a);
      step.post = state_;
      tl_.steps.push_back(std::move(step));
    }
    auto undo = [&]() {
      for (auto k : newly_done) ob_done_[k] = 0;
      if (gm_ && happening) {
        tl_.steps.pop_back();
        state_ = std::move(saved);
      }
    };
    if (gm_ && !obligations_ok(t, t_next, newly_done)) {
      undo();
      return;
    }

    std::optional<std::int64_t> next;
    if (any_unstarted) {
      next = t_next;
    } else {
      for (std::size_t i = 0; i < prim_.size(); ++i)
        if (dur_[i] > 0 && start_[i] + dur_[i] > t) next = next ? std::min(*next, start_[i] + dur_[i]) : start_[i] + dur_[i];
    }
    if (next) explore(*next);
    else leaf(t);
    undo();
  }

  void leaf(std::int64_t t) {
    const std::int64_t after = t + 1;
    if (!ordering_ok(after) || !durations_ok(after)) return;
    if (gm_) {
      std::vector<std::size_t> newly_done;
      bool ok = obligations_ok(std::numeric_limits<std::int64_t>::max() / 8, after, newly_done) &&
                std::all_of(ob_done_.begin(), ob_done_.end(), [](char c) { return c != 0; }) &&
                !goal_check(tl_, gm_->goal, gm_->pool);
      for (auto k : newly_done) ob_done_[k] = 0;
      if (!ok) return;
    }
    std::int64_t makespan = makespan_bound(after);
    if (best_ && makespan >= *best_) return;
    best_ = makespan;
    best_starts_.emplace();
    for (std::size_t i = 0; i < prim_.size(); ++i) (*best_starts_)[prim_[i]] = start_[i];
    if (!opts_.optimize) done_ = true;
  }

  const TaskNetwork& w_;
  const GroundModel* gm_;
  ScheduleOptions opts_;
  std::optional<std::int64_t> best_;
  std::optional<std::map<std::string, std::int64_t>> best_starts_;

  std::vector<std::string> prim_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::int64_t> dur_;
  std::vector<const GroundAction*> act_;
  std::map<std::string, std::vector<std::string>> children_;
  std::set<std::string> undatable_;
  std::vector<const OrderingConstraint*> co_;
  std::vector<const DurationConstraint*> cd_;
  std::vector<Obligation> obligations_;
  bool broken_ = false;

  std::vector<std::int64_t> start_;
  State state_;
  Timeline tl_;
  std::vector<char> ob_done_;
  std::size_t nodes_ = 0;
  bool done_ = false;
  bool stop_limit_ = false;
  ScheduleOutcome out_;
};

}  // namespace

ScheduleOutcome schedule(const TaskNetwork& w, const std::map<std::string, std::int64_t>& durations,
                         const ScheduleOptions& opts) {
  return Scheduler(w, w.ids, {}, durations, nullptr, opts, std::nullopt).run();
}

ScheduleOutcome schedule_executable(const TaskNetwork& w, const std::vector<std::string>& root_ids,
                                    const AuxiliaryPoints& aux, const GroundModel& gm, const ScheduleOptions& opts,
                                    std::optional<std::int64_t> best_bound) {
  std::map<std::string, std::int64_t> durations;
  for (const auto& id : w.ids)
    if (const auto* a = gm.find_action(w.alpha.at(id))) durations[id] = a->duration;
  return Scheduler(w, root_ids, aux, durations, &gm, opts, best_bound).run();
}

// ---------------------------------------------------------------------------
// Decomposition search

namespace {

class Planner {
 public:
  Planner(const GroundModel& gm, const PlannerConfig& cfg) : gm_(gm), cfg_(cfg) {}

  PlanResult run() {
    for (const auto& w0 : gm_.initial_networks) {
      roots_ = w0.ids;
      std::map<std::string, int> depth;
      for (const auto& id : w0.ids) depth[id] = 0;
      dfs(w0, {}, depth);
      if (found_ && !cfg_.optimize) break;
    }
    if (!found_) {
      if (depth_cut_) result_.reason = "depth";
      else if (node_limit_) result_.reason = "node-limit";
      else if (horizon_cut_ && cfg_.horizon) result_.reason = "horizon";
      else result_.reason = "exhausted";
    }
    return result_;
  }

 private:
  bool is_compound(const Task& t) const { return gm_.is_compound(t); }

  void dfs(const TaskNetwork& w, const AuxiliaryPoints& aux, const std::map<std::string, int>& depth) {
    if (found_ && !cfg_.optimize) return;
    ++result_.networks;
    std::map<std::string, std::int64_t> durations;
    for (const auto& id : w.ids)
      if (const auto* a = gm_.find_action(w.alpha.at(id))) durations[id] = a->duration;
    if (!pa_consistent(network_pa_graph(w, roots_, durations))) return;

    auto it = std::find_if(w.ids.begin(), w.ids.end(), [&](const std::string& id) { return is_compound(w.alpha.at(id)); });
    if (it == w.ids.end()) {
      leaf(w, aux);
      return;
    }
    const std::string target = *it;
    const int d = depth.at(target);
    auto methods = gm_.methods_for(w.alpha.at(target));
    if (!methods.empty() && d + 1 > cfg_.max_depth) {
      depth_cut_ = true;
      return;
    }
    for (const auto* m : methods) {
      DecompositionStep step{target, *m, hierarchical_renaming(*m, target)};
      TaskNetwork next;
      try {
        next = decompose(w, step);
      } catch (const ValidationFailure&) {
        continue;
      }
      AuxiliaryPoints aux2 = aux;
      aux2.order.push_back(target);
      auto& kids = aux2.children[target];
      auto depth2 = depth;
      for (const auto& id : m->network.ids) {
        kids.push_back(step.renaming.at(id));
        depth2[step.renaming.at(id)] = d + 1;
      }
      trace_.push_back(std::move(step));
      dfs(next, aux2, depth2);
      trace_.pop_back();
      if (found_ && !cfg_.optimize) return;
    }
  }

  void leaf(const TaskNetwork& w, const AuxiliaryPoints& aux) {
    for (const auto& id : w.ids)
      if (!gm_.find_action(w.alpha.at(id))) return;
    std::int64_t horizon = 0;
    if (cfg_.horizon) {
      horizon = *cfg_.horizon;
    } else {
      for (const auto& id : w.ids) horizon += gm_.find_action(w.alpha.at(id))->duration + 1;
    }
    ScheduleOptions opts{horizon, cfg_.optimize, cfg_.node_limit};
    auto out = schedule_executable(w, roots_, aux, gm_, opts, best_);
    result_.schedule_nodes += out.nodes;
    horizon_cut_ = horizon_cut_ || out.horizon_cut;
    node_limit_ = node_limit_ || out.node_limit_hit;
    if (!out.starts) return;
    best_ = out.makespan;
    found_ = true;
    result_.makespan = out.makespan;
    result_.plan = document(w, *out.starts);
  }

  PlanDocument document(const TaskNetwork& w, const std::map<std::string, std::int64_t>& starts) const {
    PlanDocument doc;
    for (const auto& id : w.ids) {
      const Task& t = w.alpha.at(id);
      PlanAction a;
      a.id = id;
      a.task = t;
      a.task.span = {};
      a.date = starts.at(id);
      a.duration = gm_.find_action(t)->duration;
      doc.actions.push_back(std::move(a));
    }
    std::stable_sort(doc.actions.begin(), doc.actions.end(),
                     [](const PlanAction& l, const PlanAction& r) { return l.date < r.date; });
    doc.roots = roots_;
    for (const auto& s : trace_) {
      PlanDecomposition d;
      d.id = s.target;
      d.task = s.method.task;
      d.method = s.method.name;
      d.bindings = s.method.binding;
      for (const auto& id : s.method.network.ids) d.children.push_back(s.renaming.at(id));
      doc.decompositions.push_back(std::move(d));
    }
    return doc;
  }

  const GroundModel& gm_;
  PlannerConfig cfg_;
  PlanResult result_;
  std::vector<std::string> roots_;
  std::vector<DecompositionStep> trace_;
  std::optional<std::int64_t> best_;
  bool found_ = false;
  bool depth_cut_ = false;
  bool horizon_cut_ = false;
  bool node_limit_ = false;
};

}  // namespace

PlanResult plan(const GroundModel& gm, const PlannerConfig& config) { return Planner(gm, config).run(); }

}  // namespace hddl
