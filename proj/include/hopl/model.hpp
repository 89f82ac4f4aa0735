#pragma once

#include <climits>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hopl/basic.hpp"
#include "hopl/engine.hpp"
#include "hopl/lattice.hpp"
#include "hopl/program.hpp"
#include "hopl/subst.hpp"

namespace hopl {

/// Assignment of basic elements to variables: term indices for i,
/// element ids for predicate types.
using State = std::map<Var, int>;

/// Meanings of predicate constants, as consulted by the evaluator.
class PredSource {
 public:
  virtual ~PredSource() = default;
  virtual bool holds(const std::string& p, const Type& t, const Tuple& args) = 0;
  virtual ElemId denotation(const std::string& p, const Type& t) = 0;
};

/// An element of the lattice of each predicate constant's type.
struct HerbrandInterp {
  std::map<std::string, ElemId> den;

  bool operator==(const HerbrandInterp& o) const { return den == o.den; }
  bool operator!=(const HerbrandInterp& o) const { return !(*this == o); }
};

class InterpSource : public PredSource {
 public:
  InterpSource(Lattice& lat, const HerbrandInterp& i) : lat_(lat), i_(i) {}
  bool holds(const std::string& p, const Type& t, const Tuple& args) override {
    return lat_.holds(t, denotation(p, t), args);
  }
  ElemId denotation(const std::string& p, const Type& t) override {
    auto it = i_.den.find(p);
    return it == i_.den.end() ? lat_.bottom(t) : it->second;
  }

 private:
  Lattice& lat_;
  const HerbrandInterp& i_;
};

// ---------------------------------------------------------------------------
// Evaluation.

class Evaluator {
 public:
  /// `basis_limit`: application is computed as the lub over basic elements
  /// below the argument whenever the argument lattice has at most this many
  /// elements; larger lattices use direct application.
  Evaluator(Lattice& lat, PredSource& src, std::size_t basis_limit = 256)
      : lat_(lat), src_(src), basis_limit_(basis_limit) {}

  /// The meaning of `e` in state `s`: a term index for terms, an element
  /// id of the expression's type otherwise (including o).
  int eval(const Expr& e, const State& s = {}) {
    Scope sc(*this, s);
    return value(e);
  }

  bool truth(const Expr& e, const State& s = {}) {
    if (!e.type().is_boolean()) throw TypeError("truth of a non-boolean expression");
    Scope sc(*this, s);
    return holds_at(e, nullptr, 0);
  }

  /// Whether e, of a predicate type, holds at a full argument tuple.
  bool holds(const Expr& e, const Tuple& args, const State& s = {}) {
    Scope sc(*this, s);
    return holds_at(e, args.data(), args.size());
  }

  Lattice& lattice() { return lat_; }

 private:
  static constexpr int kUnbound = INT_MIN;

  struct Scope {
    Scope(Evaluator& ev, const State& s) : ev_(ev), base_(ev.env_.size()) {
      for (const auto& kv : s) ev.env_.push_back(kv);
    }
    ~Scope() { ev_.env_.resize(base_); }
    Evaluator& ev_;
    std::size_t base_;
  };

  int& slot(const Var& v) {
    for (auto it = env_.rbegin(); it != env_.rend(); ++it)
      if (it->first == v) return it->second;
    throw TypeError("no value for variable " + v.name);
  }

  int lookup(const Var& v) {
    int x = slot(v);
    if (x == kUnbound) throw TypeError("variable " + v.name + " consulted before it is bound");
    return x;
  }

  int term(const Expr& e) {
    switch (e.kind()) {
      case ExprKind::IndConst:
        return lat_.domain().constant(e.name());
      case ExprKind::Var:
        return lookup(e.var());
      case ExprKind::FunApp: {
        std::vector<int> args;
        args.reserve(e.kids().size());
        for (const auto& k : e.kids()) args.push_back(term(k));
        return lat_.domain().lookup(e.name(), args);
      }
      default:
        throw TypeError("not a term: " + to_string(e));
    }
  }

  int value(const Expr& e) {
    const Type& t = e.type();
    if (t.is_iota()) return term(e);
    if (t.is_boolean()) return lat_.truth(holds_at(e, nullptr, 0));
    switch (e.kind()) {
      case ExprKind::Var:
        return lookup(e.var());
      case ExprKind::PredConst:
        return src_.denotation(e.name(), t);
      case ExprKind::App: {
        const Type& ft = e.fun().type();
        int f = value(e.fun());
        int x = value(e.arg());
        const Type& at = ft.args().front();
        if (!at.is_iota() && basis_small(at)) return lat_.apply_by_basis(ft, f, x);
        return lat_.apply(ft, f, x);
      }
      case ExprKind::Or:
        return lat_.lub(t, value(e.left()), value(e.right()));
      case ExprKind::And:
        return lat_.glb(t, value(e.left()), value(e.right()));
      default:
        return materialize(e);
    }
  }

  bool basis_small(const Type& t) {
    try {
      return lat_.carrier(t).size() <= basis_limit_;
    } catch (const SizeGuardError&) {
      return false;
    }
  }

  /// The element denoted by a predicate-typed expression.
  int materialize(const Expr& e) {
    const Type& t = e.type();
    if (auto b = basic_value(e)) return *b;
    std::vector<Tuple> gens;
    for (const auto& tu : lat_.product(t))
      if (holds_at(e, tu.data(), tu.size())) gens.push_back(tu);
    return lat_.make(t, std::move(gens));
  }

  /// Direct reading of basic expressions as lubs of step functions.
  std::optional<int> basic_value(const Expr& e) {
    if (!e.is(ExprKind::Lambda) && !e.is(ExprKind::Or)) return std::nullopt;
    auto it = views_.find(e.id());
    if (it == views_.end()) it = views_.emplace(e.id(), std::make_pair(e, view_basic(e, true))).first;
    const auto& view = it->second.second;
    if (!view) return std::nullopt;
    const Type& t = e.type();
    const auto& args = t.args();
    int acc = lat_.bottom(t);
    for (const auto& v : view->tails) acc = lat_.lub(t, acc, lookup(v));
    std::vector<Tuple> gens;
    for (const auto& m : view->members) {
      if (m.zero) continue;
      Tuple tu(args.size());
      bool empty = false;
      for (std::size_t i = 0; i < args.size() && !empty; ++i) {
        const Slot& s = m.slots[i];
        switch (s.kind) {
          case Slot::Term:
            tu[i] = term(s.term);
            if (tu[i] == kJunk) empty = true;
            break;
          case Slot::One:
            tu[i] = lat_.bottom(args[i]);
            break;
          case Slot::Self:
            tu[i] = lat_.truth(true);
            break;
          case Slot::Apps: {
            std::vector<Tuple> need;
            for (const auto& app : s.apps) {
              Tuple a;
              for (const auto& x : app) a.push_back(value(x));
              need.push_back(std::move(a));
            }
            for (const auto& a : need)
              for (std::size_t k = 0; k < a.size(); ++k)
                if (args[i].args()[k].is_iota() && a[k] == kJunk) empty = true;
            if (!empty) tu[i] = lat_.make(args[i], std::move(need));
            break;
          }
        }
      }
      if (!empty) gens.push_back(std::move(tu));
    }
    return lat_.lub(t, acc, lat_.make(t, std::move(gens)));
  }

  /// Whether `e` applied to args[0..n) is true.
  bool holds_at(const Expr& e, const int* args, std::size_t n) {
    switch (e.kind()) {
      case ExprKind::Prop:
        return e.value();
      case ExprKind::Lambda: {
        env_.emplace_back(e.var(), args[0]);
        bool r = holds_at(e.body(), args + 1, n - 1);
        env_.pop_back();
        return r;
      }
      case ExprKind::Or:
        return holds_at(e.left(), args, n) || holds_at(e.right(), args, n);
      case ExprKind::And:
        return holds_at(e.left(), args, n) && holds_at(e.right(), args, n);
      case ExprKind::Eq: {
        int l = term(e.left());
        return l != kJunk && l == term(e.right());
      }
      case ExprKind::Exists:
        return exists(e);
      case ExprKind::Var:
        return lat_.holds(e.type(), lookup(e.var()), Tuple(args, args + n));
      case ExprKind::PredConst:
        return src_.holds(e.name(), e.type(), Tuple(args, args + n));
      case ExprKind::App: {
        Spine sp = spine(e);
        Tuple all;
        all.reserve(sp.args.size() + n);
        for (const auto& a : sp.args) all.push_back(value(a));
        all.insert(all.end(), args, args + n);
        return holds_at(sp.head, all.data(), all.size());
      }
      default:
        throw TypeError("cannot apply " + to_string(e));
    }
  }

  // Existential blocks: equations whose one side is already determined
  // bind the variables of the other side by matching; the remaining
  // variables range over the basic elements of their type.
  bool exists(const Expr& e) {
    std::vector<Var> block;
    Expr body = e;
    while (body.is(ExprKind::Exists)) {
      block.push_back(body.var());
      body = body.body();
    }
    std::vector<Expr> conj;
    detail::flatten(body, ExprKind::And, conj);
    const std::size_t base = env_.size();
    for (const auto& v : block) env_.emplace_back(v, kUnbound);
    bool r = search(base, block.size(), conj, body);
    env_.resize(base);
    return r;
  }

  bool determined(const Expr& side) {
    for (const auto& v : side.free_vars())
      if (slot(v) == kUnbound) return false;
    return true;
  }

  bool match(const Expr& pat, int t, std::vector<std::size_t>& trail, std::size_t base) {
    switch (pat.kind()) {
      case ExprKind::Var: {
        for (std::size_t i = env_.size(); i-- > 0;) {
          if (env_[i].first != pat.var()) continue;
          if (env_[i].second == kUnbound) {
            env_[i].second = t;
            if (i >= base) trail.push_back(i);
            return true;
          }
          return env_[i].second == t;
        }
        return false;
      }
      case ExprKind::IndConst:
        return t == lat_.domain().constant(pat.name());
      case ExprKind::FunApp: {
        const Domain& d = lat_.domain();
        if (d.symbol(t) != pat.name() || d.kids(t).size() != pat.kids().size()) return false;
        const std::vector<int> kids = d.kids(t);
        for (std::size_t i = 0; i < kids.size(); ++i)
          if (!match(pat.kids()[i], kids[i], trail, base)) return false;
        return true;
      }
      default:
        return false;
    }
  }

  bool search(std::size_t base, std::size_t count, const std::vector<Expr>& conj, const Expr& body) {
    std::vector<std::size_t> trail;
    auto undo = [&] {
      for (auto i : trail) env_[i].second = kUnbound;
    };
    bool progress = true;
    while (progress) {
      progress = false;
      for (const auto& c : conj) {
        if (!c.is(ExprKind::Eq)) continue;
        const bool dl = determined(c.left());
        const bool dr = determined(c.right());
        if (dl && dr) {
          int l = term(c.left());
          if (l == kJunk || l != term(c.right())) {
            undo();
            return false;
          }
          continue;
        }
        if (!dl && !dr) continue;
        const Expr& known = dl ? c.left() : c.right();
        const Expr& pat = dl ? c.right() : c.left();
        int t = term(known);
        if (t == kJunk || !match(pat, t, trail, base)) {
          undo();
          return false;
        }
        progress = true;
      }
    }
    std::size_t free_slot = env_.size();
    for (std::size_t i = base; i < base + count; ++i)
      if (env_[i].second == kUnbound) {
        free_slot = i;
        break;
      }
    bool r = false;
    if (free_slot == env_.size()) {
      r = holds_at(body, nullptr, 0);
    } else {
      const Type ty = env_[free_slot].first.type;
      for (int v : lat_.basic_elements(ty)) {
        env_[free_slot].second = v;
        if (search(base, count, conj, body)) {
          r = true;
          break;
        }
      }
      env_[free_slot].second = kUnbound;
    }
    undo();
    return r;
  }

  Lattice& lat_;
  PredSource& src_;
  std::size_t basis_limit_;
  std::vector<std::pair<Var, int>> env_;
  std::unordered_map<const void*, std::pair<Expr, std::optional<UnionView>>> views_;
};

/// Meaning of `e` under interpretation `i` in state `s`.
inline int eval(const Expr& e, Lattice& lat, const HerbrandInterp& i, const State& s = {}) {
  InterpSource src(lat, i);
  Evaluator ev(lat, src);
  return ev.eval(e, s);
}

// ---------------------------------------------------------------------------
// Interpretations and the immediate consequence operator.

inline HerbrandInterp bottom_interp(const Program& prog, Lattice& lat) {
  HerbrandInterp i;
  for (const auto& [p, t] : prog.signature.predicates) i.den[p] = lat.bottom(t);
  return i;
}

inline HerbrandInterp top_interp(const Program& prog, Lattice& lat) {
  HerbrandInterp i;
  for (const auto& [p, t] : prog.signature.predicates) i.den[p] = lat.top(t);
  return i;
}

inline bool interp_leq(const Program& prog, Lattice& lat, const HerbrandInterp& a, const HerbrandInterp& b) {
  for (const auto& [p, t] : prog.signature.predicates)
    if (!lat.leq(t, a.den.at(p), b.den.at(p))) return false;
  return true;
}

inline HerbrandInterp interp_glb(const Program& prog, Lattice& lat, const HerbrandInterp& a, const HerbrandInterp& b) {
  HerbrandInterp i;
  for (const auto& [p, t] : prog.signature.predicates) i.den[p] = lat.glb(t, a.den.at(p), b.den.at(p));
  return i;
}

inline HerbrandInterp interp_lub(const Program& prog, Lattice& lat, const HerbrandInterp& a, const HerbrandInterp& b) {
  HerbrandInterp i;
  for (const auto& [p, t] : prog.signature.predicates) i.den[p] = lat.lub(t, a.den.at(p), b.den.at(p));
  return i;
}

/// T_P(I)(p) is the lub of the meanings of the bodies of the clauses for p.
inline HerbrandInterp tp_step(const Program& prog, Lattice& lat, const HerbrandInterp& in) {
  InterpSource src(lat, in);
  Evaluator ev(lat, src);
  HerbrandInterp out;
  for (const auto& [p, t] : prog.signature.predicates) {
    ElemId acc = lat.bottom(t);
    for (const Clause* c : prog.clauses_for(p)) acc = lat.lub(t, acc, ev.eval(c->body));
    out.den[p] = acc;
  }
  return out;
}

inline HerbrandInterp min_model(const Program& prog, Lattice& lat) {
  HerbrandInterp i = bottom_interp(prog, lat);
  while (true) {
    HerbrandInterp j = tp_step(prog, lat, i);
    if (j == i) return i;
    i = std::move(j);
  }
}

inline bool is_model(const Program& prog, Lattice& lat, const HerbrandInterp& i) {
  return interp_leq(prog, lat, tp_step(prog, lat, i), i);
}

// ---------------------------------------------------------------------------
// Demand-driven evaluation in the minimum model.

/// Truth values of individual predicate applications in M_P, computed only
/// for the applications a query depends on. Unknowns start at 0 and are
/// re-evaluated until nothing changes and no new unknown is demanded; the
/// table is then the least fixpoint restricted to the demanded unknowns.
class LocalSolver : public PredSource {
 public:
  LocalSolver(const Program& prog, Lattice& lat) : prog_(prog), lat_(lat), ev_(lat, *this) {}

  bool holds(const std::string& p, const Type& t, const Tuple& args) override {
    (void)t;
    auto key = std::make_pair(p, args);
    auto it = index_.find(key);
    if (it != index_.end()) return entries_[it->second].value;
    index_.emplace(key, entries_.size());
    entries_.push_back(Entry{p, args, false});
    grown_ = true;
    return false;
  }

  ElemId denotation(const std::string& p, const Type& t) override {
    std::vector<Tuple> gens;
    for (const auto& tu : lat_.product(t))
      if (holds(p, t, tu)) gens.push_back(tu);
    return lat_.make(t, std::move(gens));
  }

  /// Truth of a boolean expression in M_P.
  bool truth(const Expr& e, const State& s = {}) {
    while (true) {
      grown_ = false;
      bool changed = false;
      bool r = ev_.truth(e, s);
      changed |= settle();
      if (!changed && !grown_) return r;
    }
  }

  /// Truth of p(args) in M_P.
  bool query(const std::string& p, const Tuple& args) {
    const Type& t = prog_.signature.predicates.at(p);
    while (true) {
      grown_ = false;
      bool r = holds(p, t, args);
      bool changed = settle();
      if (!changed && !grown_) return r;
    }
  }

  std::size_t demanded() const { return entries_.size(); }

 private:
  struct Entry {
    std::string pred;
    Tuple args;
    bool value;
  };

  /// One round over all unknowns; true when some value changed.
  bool settle() {
    bool changed = false;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (entries_[i].value) continue;
      const std::string p = entries_[i].pred;
      const Tuple args = entries_[i].args;
      bool v = false;
      for (const Clause* c : prog_.clauses_for(p))
        if (ev_.holds(c->body, args)) {
          v = true;
          break;
        }
      if (v) {
        entries_[i].value = true;
        changed = true;
      }
    }
    return changed;
  }

  const Program& prog_;
  Lattice& lat_;
  Evaluator ev_;
  std::map<std::pair<std::string, Tuple>, std::size_t> index_;
  std::vector<Entry> entries_;
  bool grown_ = false;
};

// ---------------------------------------------------------------------------
// Correct answers.

/// Replaces each lazy tail by the bottom expression of its type.
inline Substitution close_tails(const Substitution& th, const std::vector<Var>& tails) {
  Substitution bot;
  for (const auto& v : tails) bot.bind(v, bottom_of(v.type));
  Substitution out;
  for (const auto& [v, e] : th) out.bind(v, apply(e, bot));
  return out;
}

/// Every state over `vars`, ranging over basic elements; throws when
/// there would be more than `limit` of them.
inline std::vector<State> all_states(Lattice& lat, const std::vector<Var>& vars, std::size_t limit) {
  std::vector<std::vector<int>> ranges;
  double count = 1;
  for (const auto& v : vars) {
    ranges.push_back(lat.basic_elements(v.type));
    count *= static_cast<double>(ranges.back().size());
    if (count > static_cast<double>(limit)) throw SizeGuardError("more than " + std::to_string(limit) + " states");
  }
  std::vector<State> out;
  State cur;
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == vars.size()) {
      out.push_back(cur);
      return;
    }
    for (int x : ranges[i]) {
      cur[vars[i]] = x;
      rec(i + 1);
    }
  };
  rec(0);
  return out;
}

/// Raised when the truncated universe cannot decide an answer: every
/// state sends some term of the instantiated query outside the universe.
class IneligibleAnswer : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

/// Maximal term subexpressions of `e` that mention no bound variable.
inline void open_terms(const Expr& e, std::vector<Var>& bound, std::vector<Expr>& out) {
  if (e.is_term()) {
    bool mentions_bound = false;
    for (const auto& b : bound)
      if (e.has_free(b)) mentions_bound = true;
    if (!mentions_bound) {
      out.push_back(e);
      return;
    }
  }
  if (e.is(ExprKind::Lambda) || e.is(ExprKind::Exists)) {
    bound.push_back(e.var());
    open_terms(e.body(), bound, out);
    bound.pop_back();
    return;
  }
  for (const auto& k : e.kids()) open_terms(k, bound, out);
}

inline int term_at(const Domain& d, const Expr& t, const State& s) {
  switch (t.kind()) {
    case ExprKind::IndConst:
      return d.constant(t.name());
    case ExprKind::Var:
      return s.at(t.var());
    default: {
      std::vector<int> args;
      for (const auto& k : t.kids()) {
        args.push_back(term_at(d, k, s));
        if (args.back() == kJunk) return kJunk;
      }
      return d.lookup(t.name(), args);
    }
  }
}

/// Whether `a` is true in every state that keeps its terms inside the
/// universe.
inline bool holds_everywhere(LocalSolver& solver, Lattice& lat, const Expr& a) {
  std::vector<Var> bound;
  std::vector<Expr> terms;
  open_terms(a, bound, terms);
  // Meaning is monotone in states, so predicate variables need only be
  // checked at bottom.
  std::vector<Var> individuals;
  State preds;
  for (const auto& v : a.free_vars()) {
    if (v.type.is_iota()) individuals.push_back(v);
    else preds[v] = lat.bottom(v.type);
  }
  std::size_t decided = 0;
  for (auto s : all_states(lat, individuals, lat.guard())) {
    s.insert(preds.begin(), preds.end());
    bool inside = true;
    for (const auto& t : terms)
      if (term_at(lat.domain(), t, s) == kJunk) inside = false;
    if (!inside) continue;
    ++decided;
    if (!solver.truth(a, s)) return false;
  }
  if (decided == 0) throw IneligibleAnswer("the answer mentions terms outside the universe");
  return true;
}

/// theta with every union member that mentions a free individual variable
/// removed. Its meaning is below theta's in every state.
inline Substitution drop_open_members(const Substitution& th, bool& changed) {
  Substitution out;
  for (const auto& [v, e] : th) {
    if (!e.type().is_predicate() || e.type().is_boolean()) {
      out.bind(v, e);
      continue;
    }
    std::vector<Expr> ms, kept;
    flatten(e, ExprKind::Or, ms);
    for (const auto& m : ms) {
      bool open = false;
      for (const auto& x : m.free_vars())
        if (x.type.is_iota()) open = true;
      if (open) changed = true;
      else kept.push_back(m);
    }
    out.bind(v, kept.empty() ? bottom_of(e.type()) : union_of(kept));
  }
  return out;
}

}  // namespace detail

/// Whether A theta holds in M_P under every state over its free variables
/// whose terms stay inside the universe. Throws IneligibleAnswer when no
/// such state exists and SizeGuardError when there are too many states.
inline bool check_correct_answer(const Program& prog, const Expr& query, const Substitution& theta, Lattice& lat,
                                 const std::vector<Var>& tails = {}) {
  const Substitution closed = close_tails(theta, tails);
  LocalSolver solver(prog, lat);
  // Meaning is monotone in states, so if the query holds without the
  // members that mention free individual variables, it holds with them.
  bool changed = false;
  const Substitution lower = detail::drop_open_members(closed, changed);
  if (changed) {
    try {
      if (detail::holds_everywhere(solver, lat, apply(query, lower))) return true;
    } catch (const SizeGuardError&) {
    } catch (const IneligibleAnswer&) {
    }
  }
  // Free tails not mentioned by theta also denote bottom.
  return detail::holds_everywhere(solver, lat, apply(query, closed));
}

inline bool check_correct_answer(const Program& prog, const Goal& goal, const Answer& ans, Lattice& lat) {
  return check_correct_answer(prog, goal.body, ans.bindings, lat, ans.lazy_tails);
}

// ---------------------------------------------------------------------------
// Model listing.

/// One line per predicate, `p : {tuple, ...}`. First-order predicates are
/// read off the minimum model on demand; higher-order ones are listed only
/// with `higher_order`, as the minimal argument tuples of their meaning.
inline std::string dump_model(const Program& prog, Lattice& lat, bool higher_order = false) {
  std::string out;
  LocalSolver solver(prog, lat);
  std::optional<HerbrandInterp> full;
  std::string full_error;
  for (const auto& [p, t] : prog.signature.predicates) {
    bool first_order = true;
    for (const auto& a : t.args())
      if (!a.is_iota()) first_order = false;
    if (first_order) {
      std::vector<Tuple> gens;
      try {
        for (const auto& tu : lat.product(t))
          if (solver.query(p, tu)) gens.push_back(tu);
        out += p + " : " + lat.show(t, lat.make(t, std::move(gens))) + "\n";
      } catch (const SizeGuardError& e) {
        out += p + " : <" + std::string(e.what()) + ">\n";
      }
      continue;
    }
    if (!higher_order) continue;
    if (!full && full_error.empty()) {
      try {
        full = min_model(prog, lat);
      } catch (const SizeGuardError& e) {
        full_error = e.what();
      }
    }
    if (full) out += p + " : " + lat.show(t, full->den.at(p)) + "\n";
    else out += p + " : <" + full_error + ">\n";
  }
  return out;
}

}  // namespace hopl
