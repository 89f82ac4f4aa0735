#pragma once

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hopl/hopl.hpp"

namespace hopl::test {

inline std::string corpus(const std::string& name) { return std::string(HOPL_CORPUS_DIR) + "/" + name; }

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Program load_corpus(const std::string& name) { return load_program(slurp(corpus(name))).program; }

/// Free variables in order of first occurrence (left to right).
inline void free_in_order(const Expr& e, std::vector<Var>& bound, std::vector<Var>& out) {
  switch (e.kind()) {
    case ExprKind::Var: {
      const Var& v = e.var();
      for (const auto& b : bound)
        if (b == v) return;
      for (const auto& o : out)
        if (o == v) return;
      out.push_back(v);
      return;
    }
    case ExprKind::Lambda:
    case ExprKind::Exists:
      bound.push_back(e.var());
      free_in_order(e.body(), bound, out);
      bound.pop_back();
      return;
    default:
      for (const auto& k : e.kids()) free_in_order(k, bound, out);
  }
}

/// Alpha-equality after a consistent renaming of free variables by order
/// of first occurrence.
inline bool same_up_to_renaming(const Expr& a, const Expr& b) {
  std::vector<Var> bound, fa, fb;
  free_in_order(a, bound, fa);
  free_in_order(b, bound, fb);
  if (fa.size() != fb.size()) return false;
  Substitution ra, rb;
  for (std::size_t i = 0; i < fa.size(); ++i) {
    if (fa[i].type != fb[i].type) return false;
    Var canon{"Free_" + std::to_string(i), fa[i].type};
    ra.bind(fa[i], Expr::var(canon));
    rb.bind(fb[i], Expr::var(canon));
  }
  return alpha_equal(apply(a, ra), apply(b, rb));
}

/// A copy of `prog` with `text` typed as an expression against it.
inline Expr expr_in(Program& prog, const std::string& text) { return load_expression(prog, text); }

inline Var find_var(const Goal& g, const std::string& name) {
  for (const auto& v : g.free)
    if (v.name == name) return v;
  throw std::runtime_error("no query variable " + name);
}

/// Hand-written refutation of `closure Q a b` with one template step.
struct ClosureTrace {
  Program prog = load_corpus("closure.hol");
  Goal goal;
  std::vector<RefutationLine> lines;

  ClosureTrace() {
    goal = load_query(prog, "?- closure(Q,a,b).");
    const Var q = find_var(goal, "Q");
    const Var x0{"X0", Type::iota()}, y0{"Y0", Type::iota()};
    auto e = [&](const char* s) { return expr_in(prog, s); };
    lines = {
        {e("closure Q a b"), {}},
        {e("(\\R.\\X.\\Y.R X Y) Q a b"), {}},
        {e("Q a b"), Substitution::single(q, e("\\X.\\Y.(X = X0) /\\ (Y = Y0)"))},
        {e("(\\X.\\Y.(X = X0) /\\ (Y = Y0)) a b"), {}},
        {e("(a = X0) /\\ (b = Y0)"), Substitution::single(x0, Expr::ind_const("a"))},
        {e("true /\\ (b = Y0)"), {}},
        {e("b = Y0"), Substitution::single(y0, Expr::ind_const("b"))},
        {Expr::top(), {}},
    };
  }
};

}  // namespace hopl::test
