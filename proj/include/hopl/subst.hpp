#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "hopl/expr.hpp"
#include "hopl/print.hpp"

namespace hopl {

/// Finite, type-preserving map from variables to expressions. Identity
/// bindings are never stored.
class Substitution {
 public:
  using Map = std::map<Var, Expr>;

  Substitution() = default;
  Substitution(std::initializer_list<std::pair<Var, Expr>> bs) {
    for (const auto& [v, e] : bs) bind(v, e);
  }

  static Substitution single(const Var& v, const Expr& e) {
    Substitution s;
    s.bind(v, e);
    return s;
  }

  /// Adds or replaces a binding; binding a variable to itself removes it.
  void bind(const Var& v, const Expr& e) {
    if (v.type != e.type())
      throw TypeError("binding " + v.name + ":" + v.type.str() + " to an expression of type " + e.type().str());
    if (e.is_var() && e.var() == v) {
      map_.erase(v);
      return;
    }
    map_.insert_or_assign(v, e);
  }

  bool empty() const { return map_.empty(); }
  std::size_t size() const { return map_.size(); }
  const Map& bindings() const { return map_; }
  auto begin() const { return map_.begin(); }
  auto end() const { return map_.end(); }

  bool contains(const Var& v) const { return map_.count(v) > 0; }
  const Expr* find(const Var& v) const {
    auto it = map_.find(v);
    return it == map_.end() ? nullptr : &it->second;
  }

  VarSet domain() const {
    VarSet d;
    for (const auto& kv : map_) d.insert(kv.first);
    return d;
  }

  /// Free variables of the range.
  VarSet range_vars() const {
    VarSet r;
    for (const auto& kv : map_) r.insert(kv.second.free_vars().begin(), kv.second.free_vars().end());
    return r;
  }

  /// Every domain variable has type i.
  bool zero_order() const {
    for (const auto& kv : map_)
      if (!kv.first.type.is_iota()) return false;
    return true;
  }

  /// Equal domains and alpha-equal ranges.
  friend bool operator==(const Substitution& a, const Substitution& b) {
    if (a.map_.size() != b.map_.size()) return false;
    auto it = b.map_.begin();
    for (const auto& kv : a.map_) {
      if (kv.first != it->first || !alpha_equal(kv.second, it->second)) return false;
      ++it;
    }
    return true;
  }
  friend bool operator!=(const Substitution& a, const Substitution& b) { return !(a == b); }

 private:
  Map map_;
};

namespace detail {

inline bool touches(const Expr& e, const Substitution& th) {
  if (e.closed() || th.empty()) return false;
  const auto& fv = e.free_vars();
  if (th.size() < fv.size()) {
    for (const auto& kv : th)
      if (e.has_free(kv.first)) return true;
    return false;
  }
  for (const auto& v : fv)
    if (th.contains(v)) return true;
  return false;
}

inline Expr apply_rec(const Expr& e, const Substitution& th) {
  if (!touches(e, th)) return e;
  switch (e.kind()) {
    case ExprKind::Var: {
      const Expr* r = th.find(e.var());
      return r ? *r : e;
    }
    case ExprKind::FunApp: {
      std::vector<Expr> args;
      args.reserve(e.kids().size());
      for (const auto& k : e.kids()) args.push_back(apply_rec(k, th));
      return Expr::fun_app(e.name(), std::move(args));
    }
    case ExprKind::App:
      return Expr::app(apply_rec(e.fun(), th), apply_rec(e.arg(), th));
    case ExprKind::Or:
      return Expr::disj(apply_rec(e.left(), th), apply_rec(e.right(), th));
    case ExprKind::And:
      return Expr::conj(apply_rec(e.left(), th), apply_rec(e.right(), th));
    case ExprKind::Eq:
      return Expr::eq(apply_rec(e.left(), th), apply_rec(e.right(), th));
    case ExprKind::Lambda:
    case ExprKind::Exists: {
      const Var& v = e.var();
      const Expr& body = e.body();
      // Bindings that reach the body: the binder shadows its own name.
      Substitution inner;
      bool captures = false;
      for (const auto& [dv, de] : th) {
        if (dv == v || !body.has_free(dv)) continue;
        inner.bind(dv, de);
        if (de.has_free(v)) captures = true;
      }
      if (inner.empty()) return e;
      Var nv = v;
      if (captures) {
        VarSet used = free_vars(body);
        for (const auto& kv : th) {
          used.insert(kv.first);
          used.insert(kv.second.free_vars().begin(), kv.second.free_vars().end());
        }
        nv = fresh_var(v.name, v.type, used);
        inner.bind(v, Expr::var(nv));
      }
      Expr nb = apply_rec(body, inner);
      return e.is(ExprKind::Lambda) ? Expr::lambda(nv, nb) : Expr::exists(nv, nb);
    }
    default:
      return e;
  }
}

}  // namespace detail

/// Simultaneous capture-avoiding replacement of the free variables of `e`.
/// A bound variable is renamed (deterministically) only when it would
/// capture a free variable of an inserted expression.
inline Expr apply(const Expr& e, const Substitution& th) { return detail::apply_rec(e, th); }

/// theta followed by sigma: {V/E sigma | V/E in theta, E sigma != V} plus the
/// bindings of sigma whose variable is not in dom(theta).
inline Substitution compose(const Substitution& th, const Substitution& sg) {
  Substitution out;
  for (const auto& [v, e] : th) out.bind(v, apply(e, sg));
  for (const auto& [v, e] : sg)
    if (!th.contains(v)) out.bind(v, e);
  return out;
}

inline Substitution restrict(const Substitution& th, const VarSet& vars) {
  Substitution out;
  for (const auto& [v, e] : th)
    if (vars.count(v)) out.bind(v, e);
  return out;
}

/// `{X/a, Q/\X.(X = a)}`; individual variables first, then by name.
inline std::string to_string(const Substitution& th) {
  std::string out = "{";
  bool first = true;
  for (const auto& [v, e] : th) {
    if (!first) out += ", ";
    first = false;
    out += v.name + "/" + to_string(e);
  }
  return out + "}";
}

}  // namespace hopl
