#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hopl/subst.hpp"

namespace hopl {

enum class UnifyError { None, Clash, OccursCheck };

struct UnifyResult {
  bool ok = false;
  Substitution theta;
  UnifyError error = UnifyError::None;

  explicit operator bool() const { return ok; }
};

namespace detail {

inline bool occurs(const Var& v, const Expr& t) { return t.has_free(v); }

}  // namespace detail

/// Most general unifier of a list of pairs of terms of type i
/// (Martelli-Montanari with occurs check). When two variables meet, the
/// smaller one is bound to the larger.
inline UnifyResult mgu(std::vector<std::pair<Expr, Expr>> pairs) {
  UnifyResult res;
  for (const auto& [a, b] : pairs)
    if (!a.type().is_iota() || !b.type().is_iota()) throw TypeError("mgu is defined on terms of type i only");
  std::reverse(pairs.begin(), pairs.end());
  Substitution th;
  while (!pairs.empty()) {
    auto [s, t] = std::move(pairs.back());
    pairs.pop_back();
    s = apply(s, th);
    t = apply(t, th);
    if (alpha_equal(s, t)) continue;
    if (s.is_var() && t.is_var()) {
      const Var& a = s.var();
      const Var& b = t.var();
      if (a < b) th = compose(th, Substitution::single(a, t));
      else th = compose(th, Substitution::single(b, s));
      continue;
    }
    if (!s.is_var() && t.is_var()) std::swap(s, t);
    if (s.is_var()) {
      if (detail::occurs(s.var(), t)) {
        res.error = UnifyError::OccursCheck;
        return res;
      }
      th = compose(th, Substitution::single(s.var(), t));
      continue;
    }
    if (s.kind() != t.kind() || s.name() != t.name() || s.kids().size() != t.kids().size()) {
      res.error = UnifyError::Clash;
      return res;
    }
    for (std::size_t i = s.kids().size(); i-- > 0;) pairs.emplace_back(s.kids()[i], t.kids()[i]);
  }
  res.ok = true;
  res.theta = std::move(th);
  return res;
}

inline UnifyResult mgu(const Expr& t1, const Expr& t2) { return mgu({{t1, t2}}); }

}  // namespace hopl
