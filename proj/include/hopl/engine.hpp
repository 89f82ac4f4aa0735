#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hopl/basic.hpp"
#include "hopl/expr.hpp"
#include "hopl/print.hpp"
#include "hopl/program.hpp"
#include "hopl/subst.hpp"
#include "hopl/unify.hpp"

namespace hopl {

// ---------------------------------------------------------------------------
// One-step derivations.

/// Which conjuncts may be stepped: every one, or only the leftmost (with
/// removal of a finished conjunct taking priority).
enum class Selection { All, Leftmost };

struct StepOptions {
  int budget = 1;
  bool lazy = false;
  Selection selection = Selection::All;
  bool skip_bottom_templates = false;
  bool force_left = false;  // the selected union must take its left member
};

/// Rule that produced a successor: `core` is the rule applied to the
/// selected subgoal, `top` the outermost rule (7 or 8 for steps inside a
/// conjunction).
struct RuleId {
  int top = 0;
  int core = 0;

  std::string str() const {
    if (top == 0) return "-";
    if (top == core) return std::to_string(core);
    return std::to_string(core) + "-in-" + std::to_string(top);
  }
  friend bool operator==(const RuleId& a, const RuleId& b) { return a.top == b.top && a.core == b.core; }
};

struct Successor {
  Expr goal;
  Substitution theta;
  RuleId rule;
  bool lazy_intro = false;      // rule 2 introduced a union with a tail
  std::vector<Var> introduced;  // template and tail variables of a rule-2 step
  std::optional<Var> tail;
};

/// Names that constrain the choice of fresh variables along a derivation.
struct NameState {
  std::set<std::string> seen;       // every variable name that has appeared
  std::set<std::string> ever_free;  // names that have occurred free
  std::set<std::string> tails;      // lazily introduced tail variables
};

namespace detail {

struct StepContext {
  const Program& prog;
  const StepOptions& opt;
  const NameState& names;
  bool* rule2_fired = nullptr;  // set when rule 2 fires at a non-o type
};

inline Expr conj_from(const Expr& l, const Expr& r) { return Expr::conj(l, r); }

inline void atom_steps(const Expr& a, StepContext& cx, std::vector<Successor>& out) {
  Spine sp = spine(a);
  const Expr& h = sp.head;
  auto push = [&](Expr g, Substitution th, int rule) {
    Successor s;
    s.goal = std::move(g);
    s.theta = std::move(th);
    s.rule = RuleId{rule, rule};
    out.push_back(std::move(s));
  };
  switch (h.kind()) {
    case ExprKind::PredConst: {
      for (const Clause* c : cx.prog.clauses_for(h.name())) push(Expr::apps(c->body, sp.args), {}, 1);
      return;
    }
    case ExprKind::Var: {
      if (!h.type().is_predicate()) return;
      const Var& q = h.var();
      std::set<std::string> used = cx.names.seen;
      for (const auto& v : a.free_vars()) used.insert(v.name);
      if (!q.type.is_boolean() && cx.rule2_fired) *cx.rule2_fired = true;
      if (cx.opt.lazy && !q.type.is_boolean()) {
        for (const auto& shape : template_shapes(q.type, cx.opt.budget)) {
          if (shape.members.size() != 1 || shape.members[0].zero) continue;
          std::set<std::string> u = used;
          BasicTemplate t = instantiate(shape, u);
          NameSupply ns{&u};
          Var tail = ns.take("L", q.type);
          Expr b = Expr::disj(t.expr, Expr::var(tail));
          Substitution th = Substitution::single(q, b);
          Successor s;
          s.goal = apply(a, th);
          s.theta = th;
          s.rule = RuleId{2, 2};
          s.lazy_intro = true;
          s.introduced = t.vars;
          s.introduced.push_back(tail);
          s.tail = tail;
          out.push_back(std::move(s));
        }
        return;
      }
      for (const auto& shape : template_shapes(q.type, cx.opt.budget)) {
        std::set<std::string> u = used;
        BasicTemplate t = instantiate(shape, u);
        if (cx.opt.skip_bottom_templates && t.has_zero_member) continue;
        Substitution th = Substitution::single(q, t.expr);
        Successor s;
        s.goal = apply(a, th);
        s.theta = th;
        s.rule = RuleId{2, 2};
        s.introduced = t.vars;
        out.push_back(std::move(s));
      }
      return;
    }
    case ExprKind::Lambda: {
      if (sp.args.empty()) return;
      Expr body = apply(h.body(), Substitution::single(h.var(), sp.args[0]));
      push(Expr::apps(body, sp.args, 1), {}, 3);
      return;
    }
    case ExprKind::Or: {
      push(Expr::apps(h.left(), sp.args), {}, 4);
      if (!(cx.opt.force_left && cx.opt.selection == Selection::Leftmost))
        push(Expr::apps(h.right(), sp.args), {}, 5);
      return;
    }
    case ExprKind::And: {
      if (sp.args.empty()) return;  // a conjunction at type o is not an application
      push(Expr::conj(Expr::apps(h.left(), sp.args), Expr::apps(h.right(), sp.args)), {}, 6);
      return;
    }
    default:
      return;
  }
}

inline void steps(const Expr& a, StepContext& cx, std::vector<Successor>& out) {
  switch (a.kind()) {
    case ExprKind::And: {
      const Expr& l = a.left();
      const Expr& r = a.right();
      if (cx.opt.selection == Selection::Leftmost) {
        if (l.is_true()) {
          out.push_back(Successor{r, {}, RuleId{9, 9}});
          return;
        }
        if (r.is_true()) {
          out.push_back(Successor{l, {}, RuleId{10, 10}});
          return;
        }
        std::vector<Successor> inner;
        steps(l, cx, inner);
        for (auto& s : inner) {
          s.goal = Expr::conj(s.goal, apply(r, s.theta));
          s.rule.top = 7;
          out.push_back(std::move(s));
        }
        return;
      }
      std::vector<Successor> inner;
      steps(l, cx, inner);
      for (auto& s : inner) {
        s.goal = Expr::conj(s.goal, apply(r, s.theta));
        s.rule.top = 7;
        out.push_back(std::move(s));
      }
      inner.clear();
      steps(r, cx, inner);
      for (auto& s : inner) {
        s.goal = Expr::conj(apply(l, s.theta), s.goal);
        s.rule.top = 8;
        out.push_back(std::move(s));
      }
      if (l.is_true()) out.push_back(Successor{r, {}, RuleId{9, 9}});
      if (r.is_true()) out.push_back(Successor{l, {}, RuleId{10, 10}});
      return;
    }
    case ExprKind::Eq: {
      UnifyResult u = mgu(a.left(), a.right());
      if (u.ok) out.push_back(Successor{Expr::top(), u.theta, RuleId{11, 11}});
      return;
    }
    case ExprKind::Exists: {
      const Var& v = a.var();
      std::set<std::string> avoid = cx.names.ever_free;
      for (const auto& f : a.free_vars()) avoid.insert(f.name);
      std::string n = fresh_name(v.name, [&](const std::string& s) { return avoid.count(s) > 0; });
      Expr body = n == v.name ? a.body() : apply(a.body(), Substitution::single(v, Expr::var(Var{n, v.type})));
      out.push_back(Successor{body, {}, RuleId{12, 12}});
      return;
    }
    case ExprKind::Prop:
      return;
    default:
      atom_steps(a, cx, out);
  }
}

}  // namespace detail

/// Every successor of `a` licensed by the twelve rules; rule-2 successors
/// use the templates of complexity <= opt.budget, with variables fresh for
/// `names` (or for the variables of `a` when no name state is given).
inline std::vector<Successor> derive_steps(const Program& prog, const Expr& a, const StepOptions& opt = {},
                                           const NameState* names = nullptr, bool* rule2_fired = nullptr) {
  NameState local;
  if (!names) {
    collect_names(a, local.seen);
    for (const auto& v : a.free_vars()) local.ever_free.insert(v.name);
    names = &local;
  }
  detail::StepContext cx{prog, opt, *names, rule2_fired};
  std::vector<Successor> out;
  detail::steps(a, cx, out);
  return out;
}

// ---------------------------------------------------------------------------
// Answers.

struct TraceStep {
  int depth = 0;
  RuleId rule;
  Substitution theta;
  Expr goal;
};

/// `depth | rule | theta | goal`
inline std::string to_string(const TraceStep& s) {
  return std::to_string(s.depth) + " | " + s.rule.str() + " | " + to_string(s.theta) + " | " + to_string(s.goal);
}

struct Answer {
  Substitution bindings;        // restricted to the query variables, tails renamed
  Substitution raw;             // the full composition of the step substitutions
  std::vector<Var> lazy_tails;  // unexpanded tails occurring in `bindings`
  std::vector<TraceStep> trace;
  int length = 0;
};

enum class SearchStatus { Running, QuotaReached, Exhausted };

struct SolveLimits {
  int max_depth = 200;
  int template_budget = 6;
  int max_answers = 10;
  bool lazy = true;
  bool subsumption = false;
  bool keep_trace = false;
};

namespace detail {

inline void rename_free_in_order(const Expr& e, const std::set<Var>& keep, std::map<Var, std::string>& ren,
                                 const std::string& prefix) {
  // Free variables in order of first occurrence, left to right.
  std::vector<const Var*> bound;
  std::function<void(const Expr&)> go = [&](const Expr& x) {
    if (x.is_var()) {
      const Var& v = x.var();
      for (const Var* b : bound)
        if (*b == v) return;
      if (!keep.count(v) && !ren.count(v)) ren.emplace(v, prefix + std::to_string(ren.size()));
      return;
    }
    if (x.is(ExprKind::Lambda) || x.is(ExprKind::Exists)) {
      bound.push_back(&x.var());
      go(x.body());
      bound.pop_back();
      return;
    }
    for (const auto& k : x.kids()) go(k);
  };
  go(e);
}

/// Union members sorted by a key that ignores the names of free variables
/// outside `keep`.
inline Expr sort_unions(const Expr& e, const std::set<Var>& keep) {
  auto rebuild = [&](const Expr& x) -> Expr {
    switch (x.kind()) {
      case ExprKind::App:
        return Expr::app(sort_unions(x.fun(), keep), sort_unions(x.arg(), keep));
      case ExprKind::Lambda:
        return Expr::lambda(x.var(), sort_unions(x.body(), keep));
      case ExprKind::Exists:
        return Expr::exists(x.var(), sort_unions(x.body(), keep));
      case ExprKind::And:
        return Expr::conj(sort_unions(x.left(), keep), sort_unions(x.right(), keep));
      default:
        return x;
    }
  };
  if (!e.is(ExprKind::Or)) return rebuild(e);
  std::vector<Expr> ds;
  flatten(e, ExprKind::Or, ds);
  std::vector<std::pair<std::string, Expr>> keyed;
  for (const auto& d : ds) {
    Expr n = sort_unions(d, keep);
    Substitution anon;
    for (const auto& v : n.free_vars())
      if (!keep.count(v)) anon.bind(v, Expr::var(Var{"_", v.type}));
    keyed.emplace_back(canonical_key(apply(n, anon)), n);
  }
  std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Expr> ms;
  for (auto& kv : keyed) ms.push_back(kv.second);
  return union_of(ms);
}

}  // namespace detail

/// Key identifying answers equal up to reordering of union members and
/// renaming of variables other than the query variables.
inline std::string answer_key(const Substitution& th, const std::vector<Var>& query_vars) {
  std::set<Var> keep(query_vars.begin(), query_vars.end());
  std::vector<Expr> parts;
  for (const auto& v : query_vars) {
    const Expr* e = th.find(v);
    parts.push_back(e ? detail::sort_unions(*e, keep) : Expr::var(v));
  }
  std::map<Var, std::string> ren;
  for (const auto& p : parts) detail::rename_free_in_order(p, keep, ren, "_");
  Substitution rs;
  for (const auto& [v, n] : ren) rs.bind(v, Expr::var(Var{n, v.type}));
  std::string key;
  for (std::size_t i = 0; i < parts.size(); ++i) key += query_vars[i].name + "=" + canonical_key(apply(parts[i], rs)) + ";";
  return key;
}

namespace detail {

/// Drops union members whose variables are all unconstrained, for the
/// optional subsumption filter.
/// Removes repeated (alpha-equal) disjuncts of a top-level union.
inline Expr dedupe_union(const Expr& e) {
  if (!e.is(ExprKind::Or)) return e;
  std::vector<Expr> ds, kept;
  flatten(e, ExprKind::Or, ds);
  for (const auto& d : ds) {
    bool dup = false;
    for (const auto& k : kept)
      if (alpha_equal(k, d)) dup = true;
    if (!dup) kept.push_back(d);
  }
  return kept.size() == ds.size() ? e : union_of(kept);
}

inline Expr drop_free_members(const Expr& e, const std::set<Var>& keep) {
  if (!e.is(ExprKind::Or)) return e;
  std::vector<Expr> ds, kept;
  flatten(e, ExprKind::Or, ds);
  for (const auto& d : ds) {
    bool free_only = !d.free_vars().empty();
    for (const auto& v : d.free_vars())
      if (keep.count(v)) free_only = false;
    if (d.is_pred_var()) free_only = false;
    if (!free_only) kept.push_back(d);
  }
  if (kept.empty()) return e;
  return union_of(kept);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Search.

/// Pull-based stream of computed answers. Iterative deepening on the
/// derivation length inside an outer loop over the template budget;
/// conjuncts are selected leftmost first and clauses in file order.
class AnswerStream {
 public:
  AnswerStream(const Program& prog, Goal goal, SolveLimits lim)
      : prog_(prog), goal_(std::move(goal)), lim_(lim) {
    auto ns = std::make_shared<NameState>();
    collect_names(goal_.body, ns->seen);
    for (const auto& v : goal_.free) {
      ns->seen.insert(v.name);
      ns->ever_free.insert(v.name);
    }
    for (const auto& v : goal_.body.free_vars()) ns->ever_free.insert(v.name);
    root_names_ = ns;
    query_vars_ = goal_.free;
    for (const auto& v : goal_.body.free_vars())
      if (std::find(query_vars_.begin(), query_vars_.end(), v) == query_vars_.end()) query_vars_.push_back(v);
    budget_ = 1;
    depth_ = std::min(8, lim_.max_depth);
    start_pass();
  }

  /// Next new answer, or nothing when the quota is reached or the search
  /// space within the limits is exhausted.
  std::optional<Answer> next() {
    if (status_ != SearchStatus::Running) return std::nullopt;
    if (emitted_ >= lim_.max_answers) {
      status_ = SearchStatus::QuotaReached;
      return std::nullopt;
    }
    while (true) {
      if (stack_.empty()) {
        if (!advance_pass()) {
          status_ = SearchStatus::Exhausted;
          return std::nullopt;
        }
        continue;
      }
      Frame& f = stack_.back();
      if (!f.expanded) {
        f.expanded = true;
        const auto& n = *f.node;
        if (n.goal.is_true()) {
          auto a = make_answer(f.node);
          stack_.pop_back();
          if (a) {
            ++emitted_;
            return a;
          }
          continue;
        }
        if (n.depth >= depth_) {
          cut_ = true;
          stack_.pop_back();
          continue;
        }
        expand(f);
        continue;
      }
      if (f.next >= f.succ.size()) {
        stack_.pop_back();
        continue;
      }
      auto child = make_child(f.node, std::move(f.succ[f.next++]));
      stack_.push_back(Frame{child});
    }
  }

  SearchStatus status() const { return status_; }
  int emitted() const { return emitted_; }
  const std::vector<Var>& query_vars() const { return query_vars_; }

  std::vector<Answer> take(int n) {
    std::vector<Answer> out;
    while (static_cast<int>(out.size()) < n) {
      auto a = next();
      if (!a) break;
      out.push_back(std::move(*a));
    }
    return out;
  }

 private:
  struct Node {
    Expr goal;
    Substitution theta;
    RuleId rule;
    std::shared_ptr<const Node> parent;
    int depth = 0;
    std::shared_ptr<const NameState> names;
    bool force_left = false;
  };
  using NodeP = std::shared_ptr<const Node>;

  struct Frame {
    NodeP node;
    bool expanded = false;
    std::vector<Successor> succ;
    std::size_t next = 0;
  };

  void start_pass() {
    auto root = std::make_shared<Node>();
    root->goal = goal_.body;
    root->names = root_names_;
    stack_.clear();
    stack_.push_back(Frame{root});
    cut_ = false;
    rule2_ = false;
  }

  /// Moves to the next (budget, depth) pass; false when none is left.
  bool advance_pass() {
    rule2_any_ = rule2_any_ || rule2_;
    if (cut_ && depth_ < lim_.max_depth) {
      depth_ = std::min(depth_ * 2, lim_.max_depth);
      start_pass();
      return true;
    }
    if (rule2_any_ && budget_ < lim_.template_budget) {
      ++budget_;
      rule2_any_ = false;
      depth_ = std::min(8, lim_.max_depth);
      start_pass();
      return true;
    }
    return false;
  }

  void expand(Frame& f) {
    const Node& n = *f.node;
    StepOptions opt;
    opt.budget = budget_;
    opt.lazy = lim_.lazy;
    opt.selection = Selection::Leftmost;
    opt.skip_bottom_templates = true;
    opt.force_left = n.force_left;
    bool fired = false;
    f.succ = derive_steps(prog_, n.goal, opt, n.names.get(), &fired);
    if (fired) rule2_ = true;
  }

  NodeP make_child(const NodeP& parent, Successor s) {
    auto c = std::make_shared<Node>();
    c->goal = std::move(s.goal);
    c->theta = std::move(s.theta);
    c->rule = s.rule;
    c->parent = parent;
    c->depth = parent->depth + 1;
    c->force_left = s.lazy_intro;
    c->names = parent->names;
    const int core = s.rule.core;
    if (core == 1 || core == 2 || core == 3 || core == 12) {
      std::set<std::string> names;
      collect_names(c->goal, names);
      for (const auto& v : s.introduced) names.insert(v.name);
      const NameState& ps = *parent->names;
      bool grow = false;
      for (const auto& nm : names)
        if (!ps.seen.count(nm)) grow = true;
      bool free_grow = false;
      if (core == 12)
        for (const auto& v : c->goal.free_vars())
          if (!ps.ever_free.count(v.name)) free_grow = true;
      if (grow || free_grow || s.tail) {
        auto ns = std::make_shared<NameState>(ps);
        ns->seen.insert(names.begin(), names.end());
        if (core == 12)
          for (const auto& v : c->goal.free_vars()) ns->ever_free.insert(v.name);
        for (const auto& v : s.introduced) ns->ever_free.insert(v.name);
        if (s.tail) ns->tails.insert(s.tail->name);
        c->names = ns;
      }
    }
    return c;
  }

  std::optional<Answer> make_answer(const NodeP& leaf) {
    std::vector<const Node*> path;
    for (const Node* n = leaf.get(); n; n = n->parent.get()) path.push_back(n);
    std::reverse(path.begin(), path.end());
    Substitution acc;
    for (std::size_t i = 1; i < path.size(); ++i) acc = compose(acc, path[i]->theta);
    VarSet qv(query_vars_.begin(), query_vars_.end());
    Substitution restricted = restrict(acc, qv);

    // Rename tails to L, L1, L2, ... in order of occurrence.
    const auto& tails = leaf->names->tails;
    std::set<std::string> taken;
    for (const auto& v : query_vars_) taken.insert(v.name);
    std::vector<Var> order;
    for (const auto& qvar : query_vars_) {
      const Expr* e = restricted.find(qvar);
      if (!e) continue;
      std::set<Var> keep;
      std::map<Var, std::string> seen_free;
      detail::rename_free_in_order(*e, keep, seen_free, "");
      std::vector<std::pair<std::size_t, Var>> byorder;
      for (const auto& [v, idx] : seen_free) byorder.emplace_back(std::stoul(idx), v);
      std::sort(byorder.begin(), byorder.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
      for (const auto& [i, v] : byorder)
        if (tails.count(v.name) && std::find(order.begin(), order.end(), v) == order.end()) order.push_back(v);
    }
    for (const auto& [v, e] : restricted)
      for (const auto& f : e.free_vars())
        if (std::find(order.begin(), order.end(), f) == order.end()) taken.insert(f.name);
    Substitution tail_ren;
    std::vector<Var> new_tails;
    int k = 0;
    for (const auto& t : order) {
      std::string base;
      do {
        base = k == 0 ? "L" : "L" + std::to_string(k);
        ++k;
      } while (taken.count(base));
      taken.insert(base);
      Var nv{base, t.type};
      tail_ren.bind(t, Expr::var(nv));
      new_tails.push_back(nv);
    }
    Substitution shown;
    for (const auto& [v, e] : restricted) shown.bind(v, detail::dedupe_union(apply(e, tail_ren)));

    std::string key = answer_key(shown, query_vars_);
    if (!keys_.insert(key).second) return std::nullopt;
    if (lim_.subsumption) {
      std::set<Var> keep(query_vars_.begin(), query_vars_.end());
      Substitution reduced;
      for (const auto& [v, e] : shown) reduced.bind(v, detail::drop_free_members(e, keep));
      std::string rkey = answer_key(reduced, query_vars_);
      if (rkey != key && keys_.count(rkey)) return std::nullopt;
      keys_.insert(rkey);
    }

    Answer a;
    a.bindings = shown;
    a.raw = acc;
    a.lazy_tails = new_tails;
    a.length = leaf->depth;
    if (lim_.keep_trace)
      for (const Node* n : path) a.trace.push_back(TraceStep{n->depth, n->rule, n->theta, n->goal});
    return a;
  }

  const Program& prog_;
  Goal goal_;
  SolveLimits lim_;
  std::vector<Var> query_vars_;
  std::shared_ptr<const NameState> root_names_;
  std::vector<Frame> stack_;
  std::set<std::string> keys_;
  int budget_ = 1;
  int depth_ = 8;
  bool cut_ = false;
  bool rule2_ = false;
  bool rule2_any_ = false;
  int emitted_ = 0;
  SearchStatus status_ = SearchStatus::Running;
};

inline AnswerStream solve(const Program& prog, const Goal& goal, const SolveLimits& lim = {}) {
  return AnswerStream(prog, goal, lim);
}

// ---------------------------------------------------------------------------
// Checking refutations.

/// One line of a refutation: the goal and the substitution used to derive
/// the next line (ignored on the last line).
struct RefutationLine {
  Expr goal;
  Substitution theta;
};

struct RefutationCheck {
  bool ok = false;
  int failed_step = -1;  // index of the line whose successor is not licensed
  std::string reason;
};

namespace detail {

/// theta is a most general unifier of s and t.
inline bool is_mgu(const Expr& s, const Expr& t, const Substitution& th) {
  if (!th.zero_order()) return false;
  if (!alpha_equal(apply(s, th), apply(t, th))) return false;
  UnifyResult u = mgu(s, t);
  if (!u.ok) return false;
  return compose(th, u.theta) == u.theta;
}

struct Checker {
  const Program& prog;
  const std::set<std::string>& earlier;  // names appearing in the goals so far
  std::string why;

  bool rule2(const Expr& a, const Substitution& th, const Expr& next) {
    Spine sp = spine(a);
    if (!sp.head.is_var() || !sp.head.type().is_predicate()) return false;
    if (th.size() != 1 || !th.contains(sp.head.var())) return false;
    const Expr& b = *th.find(sp.head.var());
    auto tv = template_vars(b);
    if (!tv) {
      why = "rule 2 needs a basic template";
      return false;
    }
    for (const auto& v : b.free_vars())
      if (earlier.count(v.name)) {
        why = "template variable " + v.name + " already appeared in the derivation";
        return false;
      }
    return alpha_equal(apply(a, th), next);
  }

  bool step(const Expr& a, const Substitution& th, const Expr& next) {
    switch (a.kind()) {
      case ExprKind::And: {
        if (next.is(ExprKind::And)) {
          if (alpha_equal(apply(a.right(), th), next.right()) && step(a.left(), th, next.left())) return true;
          if (alpha_equal(apply(a.left(), th), next.left()) && step(a.right(), th, next.right())) return true;
        }
        if (th.empty() && a.left().is_true() && alpha_equal(a.right(), next)) return true;
        if (th.empty() && a.right().is_true() && alpha_equal(a.left(), next)) return true;
        return false;
      }
      case ExprKind::Eq:
        return next.is_true() && is_mgu(a.left(), a.right(), th);
      case ExprKind::Exists: {
        if (!th.empty()) return false;
        if (alpha_equal(a.body(), next)) return true;
        for (const auto& v : next.free_vars()) {
          if (v.type != a.var().type || a.has_free(v)) continue;
          if (alpha_equal(Expr::exists(v, next), a)) return true;
        }
        return false;
      }
      default:
        break;
    }
    if (rule2(a, th, next)) return true;
    if (!th.empty()) return false;
    NameState ns;
    collect_names(a, ns.seen);
    StepOptions opt;
    opt.budget = 0;
    std::vector<Successor> succ;
    StepContext cx{prog, opt, ns, nullptr};
    Spine sp = spine(a);
    if (sp.head.is_var()) return false;
    atom_steps(a, cx, succ);
    for (const auto& s : succ)
      if (alpha_equal(s.goal, next)) return true;
    return false;
  }

  /// A chain of two or more beta steps (rule 3, possibly inside conjunctions).
  bool beta_chain(const Expr& a, const Expr& next, int limit = 16) {
    std::vector<Expr> frontier{a};
    for (int d = 1; d <= limit && !frontier.empty(); ++d) {
      std::vector<Expr> nf;
      for (const auto& g : frontier) {
        for (const auto& s : derive_steps(prog, g, StepOptions{0, false, Selection::All, false, false})) {
          if (s.rule.core != 3) continue;
          if (d >= 2 && alpha_equal(s.goal, next)) return true;
          nf.push_back(s.goal);
        }
      }
      frontier = std::move(nf);
    }
    return false;
  }
};

}  // namespace detail

/// Checks that consecutive lines are related by a single derivation step
/// (or, with the empty substitution, by a chain of beta steps), that
/// rule-2 templates use variables not seen earlier, and that the last goal
/// is true.
inline RefutationCheck check_refutation(const Program& prog, const Expr& query, const std::vector<RefutationLine>& trace) {
  RefutationCheck r;
  if (trace.empty()) {
    r.ok = query.is_true();
    if (!r.ok) r.reason = "empty trace for a goal other than true";
    return r;
  }
  if (!alpha_equal(trace.front().goal, query)) {
    r.failed_step = 0;
    r.reason = "the first line is not the query";
    return r;
  }
  std::set<std::string> earlier;
  for (std::size_t i = 0; i + 1 < trace.size(); ++i) {
    collect_names(trace[i].goal, earlier);
    detail::Checker ck{prog, earlier, {}};
    const Expr& a = trace[i].goal;
    const Expr& b = trace[i + 1].goal;
    const Substitution& th = trace[i].theta;
    bool ok = ck.step(a, th, b) || (th.empty() && ck.beta_chain(a, b));
    if (!ok) {
      r.failed_step = static_cast<int>(i);
      r.reason = ck.why.empty() ? "line " + std::to_string(i + 1) + " is not derived from line " + std::to_string(i)
                                : ck.why;
      return r;
    }
  }
  if (!trace.back().goal.is_true()) {
    r.failed_step = static_cast<int>(trace.size()) - 1;
    r.reason = "the last goal is not true";
    return r;
  }
  r.ok = true;
  return r;
}

}  // namespace hopl
