#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hopl/expr.hpp"
#include "hopl/print.hpp"
#include "hopl/subst.hpp"

namespace hopl {

// ---------------------------------------------------------------------------
// Structural views of basic expressions.

/// One conjunct group of an abstraction member, attached to binder V_i.
struct Slot {
  enum Kind {
    Term,  // (V_i = B), V_i : i
    One,   // the constant 1
    Self,  // V_i itself, V_i : o
    Apps   // V_i(B_11)..(B_1r) /\ ... /\ V_i(B_m1)..(B_mr)
  };
  Kind kind = One;
  Expr term;
  std::vector<std::vector<Expr>> apps;
};

/// lambda V_1 ... lambda V_n. 0  or  lambda V_1 ... lambda V_n.(A_1 /\ ... /\ A_n).
struct Member {
  std::vector<Var> binders;
  bool zero = false;
  std::vector<Slot> slots;
  Expr expr;
};

struct UnionView {
  std::vector<Member> members;
  std::vector<Var> tails;  // predicate variables appearing as disjuncts
};

namespace detail {

inline void flatten(const Expr& e, ExprKind k, std::vector<Expr>& out) {
  if (e.is(k)) {
    flatten(e.left(), k, out);
    flatten(e.right(), k, out);
  } else {
    out.push_back(e);
  }
}

inline bool mentions_any(const Expr& e, const std::vector<Var>& vs) {
  for (const auto& v : vs)
    if (e.has_free(v)) return true;
  return false;
}

bool is_basic_strict(const Expr& e);

inline std::optional<Member> view_member(const Expr& e) {
  Member m;
  m.expr = e;
  const std::size_t n = static_cast<std::size_t>(e.type().arity());
  Expr body = e;
  for (std::size_t i = 0; i < n; ++i) {
    if (!body.is(ExprKind::Lambda)) return std::nullopt;
    m.binders.push_back(body.var());
    body = body.body();
  }
  // Distinct binders keep the slot reading unambiguous.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (m.binders[i] == m.binders[j]) return std::nullopt;
  if (n == 0) {
    if (!body.is(ExprKind::Prop)) return std::nullopt;
    m.zero = !body.value();
    return m;
  }
  if (body.is_false()) {
    m.zero = true;
    return m;
  }
  std::vector<Expr> cs;
  flatten(body, ExprKind::And, cs);
  std::size_t idx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Var& v = m.binders[i];
    Slot s;
    if (idx >= cs.size()) return std::nullopt;
    const Expr& c = cs[idx];
    if (v.type.is_iota()) {
      if (!c.is(ExprKind::Eq) || !c.left().is_var() || c.left().var() != v) return std::nullopt;
      if (mentions_any(c.right(), m.binders)) return std::nullopt;
      s.kind = Slot::Term;
      s.term = c.right();
      ++idx;
    } else if (v.type.is_boolean()) {
      if (c.is_true()) s.kind = Slot::One;
      else if (c.is_var() && c.var() == v) s.kind = Slot::Self;
      else return std::nullopt;
      ++idx;
    } else if (c.is_true()) {
      s.kind = Slot::One;
      ++idx;
    } else {
      s.kind = Slot::Apps;
      const std::size_t r = static_cast<std::size_t>(v.type.arity());
      while (idx < cs.size()) {
        Spine sp = spine(cs[idx]);
        if (!sp.head.is_var() || sp.head.var() != v || sp.args.size() != r) break;
        for (const auto& a : sp.args)
          if (mentions_any(a, m.binders) || !is_basic_strict(a)) return std::nullopt;
        s.apps.push_back(sp.args);
        ++idx;
      }
      if (s.apps.empty()) return std::nullopt;
    }
    m.slots.push_back(std::move(s));
  }
  if (idx != cs.size()) return std::nullopt;
  return m;
}

/// Reads a union of members, optionally accepting predicate-variable disjuncts.
inline std::optional<UnionView> view_union(const Expr& e, bool allow_tails) {
  if (!e.type().is_predicate()) return std::nullopt;
  std::vector<Expr> ds;
  flatten(e, ExprKind::Or, ds);
  UnionView u;
  for (const auto& d : ds) {
    if (d.is_pred_var()) {
      if (!allow_tails) return std::nullopt;
      u.tails.push_back(d.var());
      continue;
    }
    auto m = view_member(d);
    if (!m) return std::nullopt;
    u.members.push_back(std::move(*m));
  }
  if (u.members.empty() && !(allow_tails && !u.tails.empty())) return std::nullopt;
  return u;
}

inline bool is_basic_strict(const Expr& e) {
  if (e.type().is_iota()) return true;
  if (e.is_pred_var() || e.is(ExprKind::Prop)) return true;
  return view_union(e, false).has_value();
}

}  // namespace detail

/// Basic expressions: terms, predicate variables, 0 and 1, and non-empty
/// unions of abstraction members whose conjuncts follow the slot forms.
inline bool is_basic(const Expr& e) { return detail::is_basic_strict(e); }

/// Basic except that predicate variables may also occur as union disjuncts
/// (the lazy tails).
inline bool is_basic_with_tails(const Expr& e) {
  if (is_basic(e)) return true;
  return detail::view_union(e, true).has_value();
}

inline std::optional<UnionView> view_basic(const Expr& e, bool allow_tails = true) {
  return detail::view_union(e, allow_tails);
}

/// A basic expression whose basic subexpressions are pairwise distinct
/// variables; these are returned in order of occurrence.
inline std::optional<std::vector<Var>> template_vars(const Expr& e) {
  std::vector<Var> vars;
  if (e.type().is_boolean() && e.is(ExprKind::Prop)) return vars;
  auto u = detail::view_union(e, false);
  if (!u) return std::nullopt;
  std::set<Var> seen;
  auto take = [&](const Expr& x) {
    if (!x.is_var()) return false;
    if (!seen.insert(x.var()).second) return false;
    vars.push_back(x.var());
    return true;
  };
  for (const auto& m : u->members) {
    for (const auto& s : m.slots) {
      if (s.kind == Slot::Term && !take(s.term)) return std::nullopt;
      for (const auto& app : s.apps)
        for (const auto& a : app)
          if (!take(a)) return std::nullopt;
    }
  }
  return vars;
}

inline bool is_template(const Expr& e) { return template_vars(e).has_value(); }

/// The basic expression for the bottom element of a predicate type.
inline Expr bottom_of(const Type& t) {
  std::vector<Var> vs;
  for (std::size_t i = 0; i < t.args().size(); ++i) vs.push_back(Var{"V" + std::to_string(i + 1), t.args()[i]});
  return Expr::lambdas(vs, Expr::bottom());
}

// ---------------------------------------------------------------------------
// Template enumeration.

/// A template with its bookkeeping.
struct BasicTemplate {
  Expr expr;
  std::vector<Var> vars;
  int members = 0;
  int complexity = 0;
  bool has_zero_member = false;
};

/// Shape of a template, independent of variable names.
struct TemplateShape {
  struct MemberShape {
    bool zero = false;
    std::vector<int> choice;  // per position: o -> 0 (one) / 1 (self); pred -> 0 (one) / m apps
    int complexity = 1;
  };
  Type type;
  bool prop = false;
  bool prop_value = false;
  std::vector<MemberShape> members;
  int complexity = 0;
  std::string key;
};

namespace detail {

inline std::string binder_name(const Type& t, int k) {
  if (t.is_iota()) return k == 0 ? "X" : k == 1 ? "Y" : "X" + std::to_string(k);
  if (t.is_boolean()) return k == 0 ? "B" : k == 1 ? "C" : "B" + std::to_string(k);
  return k == 0 ? "Q" : k == 1 ? "R" : "Q" + std::to_string(k);
}

inline std::vector<Var> binders_for(const Type& t) {
  std::vector<Var> vs;
  int ni = 0, no = 0, np = 0;
  for (const auto& a : t.args()) {
    int& k = a.is_iota() ? ni : a.is_boolean() ? no : np;
    vs.push_back(Var{binder_name(a, k++), a});
  }
  return vs;
}

/// Name supply over a set of names that must be avoided.
struct NameSupply {
  std::set<std::string>* used;
  Var take(const std::string& base, const Type& t) {
    std::string n = fresh_name(base, [&](const std::string& s) { return used->count(s) > 0; });
    used->insert(n);
    return Var{n, t};
  }
};

inline Expr build_member(const Type& t, const TemplateShape::MemberShape& ms, NameSupply& ns,
                         std::vector<Var>& tvars) {
  std::vector<Var> bs = binders_for(t);
  if (ms.zero) return Expr::lambdas(bs, Expr::bottom());
  for (const auto& b : bs) ns.used->insert(b.name);
  std::vector<Expr> conjuncts;
  for (std::size_t i = 0; i < bs.size(); ++i) {
    const Var& v = bs[i];
    const int c = ms.choice[i];
    if (v.type.is_iota()) {
      Var z = ns.take(v.name, Type::iota());
      tvars.push_back(z);
      conjuncts.push_back(Expr::eq(Expr::var(v), Expr::var(z)));
    } else if (v.type.is_boolean()) {
      conjuncts.push_back(c == 0 ? Expr::top() : Expr::var(v));
    } else if (c == 0) {
      conjuncts.push_back(Expr::top());
    } else {
      for (int k = 0; k < c; ++k) {
        std::vector<Expr> args;
        for (const auto& at : v.type.args()) {
          Var z = ns.take(at.is_iota() ? "Z" : "P", at);
          tvars.push_back(z);
          args.push_back(Expr::var(z));
        }
        conjuncts.push_back(Expr::apps(Expr::var(v), args));
      }
    }
  }
  Expr body = conjuncts.back();
  for (std::size_t i = conjuncts.size() - 1; i-- > 0;) body = Expr::conj(conjuncts[i], body);
  return Expr::lambdas(bs, body);
}

inline Expr union_of(const std::vector<Expr>& ms) {
  Expr u = ms.back();
  for (std::size_t i = ms.size() - 1; i-- > 0;) u = Expr::disj(ms[i], u);
  return u;
}

inline std::vector<TemplateShape::MemberShape> member_shapes(const Type& t, int budget) {
  std::vector<TemplateShape::MemberShape> out;
  if (budget < 1) return out;
  TemplateShape::MemberShape zero;
  zero.zero = true;
  out.push_back(zero);
  const auto& args = t.args();
  TemplateShape::MemberShape cur;
  cur.choice.assign(args.size(), 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int cost) {
    if (i == args.size()) {
      cur.complexity = cost;
      out.push_back(cur);
      return;
    }
    const Type& a = args[i];
    if (a.is_iota()) {
      cur.choice[i] = 0;
      rec(i + 1, cost);
    } else if (a.is_boolean()) {
      for (int c = 0; c < 2; ++c) {
        cur.choice[i] = c;
        rec(i + 1, cost);
      }
    } else {
      for (int m = 0; cost + m <= budget; ++m) {
        cur.choice[i] = m;
        rec(i + 1, cost + m);
      }
    }
  };
  rec(0, 1);
  return out;
}

inline std::string shape_key(const Type& t, const std::vector<TemplateShape::MemberShape>& ms) {
  std::set<std::string> used;
  NameSupply ns{&used};
  std::vector<Var> tv;
  std::vector<Expr> es;
  for (const auto& m : ms) es.push_back(build_member(t, m, ns, tv));
  return to_string(union_of(es));
}

}  // namespace detail

/// All template shapes of type t with complexity <= budget, ordered by
/// (complexity, canonical print). Complexity is the number of members plus
/// the number of applications in higher-order slots.
inline std::vector<TemplateShape> template_shapes(const Type& t, int budget) {
  if (!t.is_predicate()) throw TypeError("templates exist only for predicate types");
  std::vector<TemplateShape> out;
  if (t.is_boolean()) {
    for (bool v : {false, true}) {
      TemplateShape s;
      s.type = t;
      s.prop = true;
      s.prop_value = v;
      s.key = v ? "true" : "false";
      out.push_back(s);
    }
    return out;
  }
  auto ms = detail::member_shapes(t, budget);
  std::vector<std::string> mkeys;
  for (const auto& m : ms) mkeys.push_back(detail::shape_key(t, {m}));
  std::vector<std::size_t> order(ms.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (ms[a].complexity != ms[b].complexity) return ms[a].complexity < ms[b].complexity;
    return mkeys[a] < mkeys[b];
  });
  // Multisets of member shapes, members in non-decreasing shape order.
  std::vector<std::size_t> pick;
  std::function<void(std::size_t, int)> rec = [&](std::size_t from, int cost) {
    if (!pick.empty()) {
      TemplateShape s;
      s.type = t;
      for (auto i : pick) s.members.push_back(ms[i]);
      s.complexity = cost;
      out.push_back(std::move(s));
    }
    for (std::size_t j = from; j < order.size(); ++j) {
      const auto& m = ms[order[j]];
      if (cost + m.complexity > budget) continue;
      pick.push_back(order[j]);
      rec(j, cost + m.complexity);
      pick.pop_back();
    }
  };
  rec(0, 0);
  for (auto& s : out) s.key = detail::shape_key(t, s.members);
  std::stable_sort(out.begin(), out.end(), [](const TemplateShape& a, const TemplateShape& b) {
    if (a.complexity != b.complexity) return a.complexity < b.complexity;
    return a.key < b.key;
  });
  return out;
}

/// Builds a template with variables fresh with respect to `used`; the new
/// names are added to `used`.
inline BasicTemplate instantiate(const TemplateShape& s, std::set<std::string>& used) {
  BasicTemplate bt;
  bt.complexity = s.complexity;
  if (s.prop) {
    bt.expr = Expr::prop(s.prop_value);
    bt.has_zero_member = !s.prop_value;
    return bt;
  }
  std::set<std::string> local = used;
  detail::NameSupply ns{&local};
  std::vector<Expr> es;
  for (const auto& m : s.members) {
    es.push_back(detail::build_member(s.type, m, ns, bt.vars));
    bt.has_zero_member = bt.has_zero_member || m.zero;
  }
  for (const auto& v : bt.vars) used.insert(v.name);
  bt.expr = detail::union_of(es);
  bt.members = static_cast<int>(s.members.size());
  return bt;
}

/// Every template of type t with complexity <= budget, instantiated with
/// variables fresh for `used`.
inline std::vector<BasicTemplate> enumerate_templates(const Type& t, int budget, std::set<std::string>& used) {
  std::vector<BasicTemplate> out;
  for (const auto& s : template_shapes(t, budget)) out.push_back(instantiate(s, used));
  return out;
}

inline std::vector<BasicTemplate> enumerate_templates(const Type& t, int budget) {
  std::set<std::string> used;
  return enumerate_templates(t, budget, used);
}

/// `members` copies of the first non-bottom single-member template of t,
/// followed by a fresh tail variable. At type o the result is the plain
/// template 1.
inline Expr lazy_union_template(const Type& t, int members, std::set<std::string>& used, Var* tail_out = nullptr) {
  if (!t.is_predicate()) throw TypeError("lazy unions exist only for predicate types");
  if (t.is_boolean()) return Expr::top();
  if (members < 1) throw std::invalid_argument("a lazy union needs at least one member");
  std::vector<Expr> es;
  const auto shapes = template_shapes(t, 1);
  const TemplateShape* first = nullptr;
  for (const auto& s : shapes)
    if (s.members.size() == 1 && !s.members[0].zero) {
      first = &s;
      break;
    }
  for (int i = 0; i < members; ++i) es.push_back(instantiate(*first, used).expr);
  detail::NameSupply ns{&used};
  Var tail = ns.take("L", t);
  if (tail_out) *tail_out = tail;
  es.push_back(Expr::var(tail));
  return detail::union_of(es);
}

// ---------------------------------------------------------------------------
// Normal form of unions, used to compare answers.

namespace detail {

inline Expr normalize(const Expr& e);

inline Expr normalize_kids(const Expr& e) {
  switch (e.kind()) {
    case ExprKind::App:
      return Expr::app(normalize(e.fun()), normalize(e.arg()));
    case ExprKind::Lambda:
      return Expr::lambda(e.var(), normalize(e.body()));
    case ExprKind::Exists:
      return Expr::exists(e.var(), normalize(e.body()));
    case ExprKind::And:
      return Expr::conj(normalize(e.left()), normalize(e.right()));
    default:
      return e;
  }
}

inline bool is_zero_member(const Expr& e) {
  Expr b = e;
  while (b.is(ExprKind::Lambda)) b = b.body();
  return b.is_false() && e.type().arity() > 0;
}

inline Expr normalize(const Expr& e) {
  if (!e.is(ExprKind::Or)) return normalize_kids(e);
  std::vector<Expr> ds;
  flatten(e, ExprKind::Or, ds);
  std::map<std::string, Expr> uniq;
  for (const auto& d : ds) {
    if (is_zero_member(d)) continue;
    Expr n = normalize(d);
    uniq.emplace(canonical_key(n), n);
  }
  if (uniq.empty()) return bottom_of(e.type());
  std::vector<Expr> ms;
  for (auto& kv : uniq) ms.push_back(kv.second);
  return union_of(ms);
}

}  // namespace detail

/// Flattens unions, drops bottom members and duplicates, and sorts members
/// canonically, so that expressions equal up to union reordering coincide.
inline Expr normalize_unions(const Expr& e) { return detail::normalize(e); }

// ---------------------------------------------------------------------------
// Set notation.

namespace detail {

inline std::string pretty_value(const Expr& e);

inline std::string pretty_args(const std::vector<Expr>& args) {
  if (args.size() == 1) return pretty_value(args[0]);
  std::string s = "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) s += ',';
    s += pretty_value(args[i]);
  }
  return s + ")";
}

inline std::string pretty_member(const Member& m) {
  std::vector<std::string> parts;
  for (const auto& s : m.slots) {
    switch (s.kind) {
      case Slot::Term: {
        std::string t;
        print_term(s.term, t);
        parts.push_back(t);
        break;
      }
      case Slot::One:
        parts.push_back(m.binders[parts.size()].type.is_boolean() ? "false" : "{}");
        break;
      case Slot::Self:
        parts.push_back("true");
        break;
      case Slot::Apps: {
        std::string set = "{";
        for (std::size_t k = 0; k < s.apps.size(); ++k) {
          if (k) set += ", ";
          set += pretty_args(s.apps[k]);
        }
        parts.push_back(set + "}");
        break;
      }
    }
  }
  if (parts.size() == 1) return parts[0];
  std::string s = "(";
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) s += ',';
    s += parts[i];
  }
  return s + ")";
}

inline std::string pretty_value(const Expr& e) {
  if (e.type().is_iota()) {
    std::string t;
    print_term(e, t);
    return t;
  }
  if (e.is_var()) return e.var().name;
  if (e.is(ExprKind::Prop)) return e.value() ? "true" : "false";
  auto u = view_union(e, true);
  if (!u) return to_string(e);
  std::vector<std::string> items;
  for (const auto& m : u->members) {
    if (m.zero) continue;
    items.push_back(pretty_member(m));
  }
  std::string s;
  if (!items.empty() || u->tails.empty()) {
    s = "{";
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i) s += ", ";
      s += items[i];
    }
    s += "}";
  }
  for (const auto& t : u->tails) {
    if (!s.empty()) s += " ∪ ";
    s += t.name;
  }
  return s;
}

}  // namespace detail

/// Set notation for a basic expression: `{a}`, `{(a,b)}`, `{0, s(0)} ∪ L`.
/// Expressions outside the basic forms fall back to core syntax.
inline std::string pretty_set(const Expr& b) { return detail::pretty_value(b); }

}  // namespace hopl
