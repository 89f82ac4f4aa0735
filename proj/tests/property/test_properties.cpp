#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace hopl;

namespace {

constexpr int kCases = 1000;

const Type I = Type::iota();
const Type O = Type::boolean();
const Type IO = Type::arrow(I, O);
const Type IIO = Type::arrow(I, IO);
const Type IO_O = Type::arrow(IO, O);

const char* kProgram = R"(
q(a).
q(X) :- r(X,X).
r(a,b).
r(X,Y) :- r(Y,X).
h(P) :- P(a).
h(P) :- P(b), q(b).
s(X) :- h(q), r(X,a).
)";

const Var X{"X", I};
const Var Y{"Y", I};
const Var P{"P", IO};

/// Random well-typed expressions over constants a, b, predicates q, r, h,
/// s and free variables X, Y : i and P : i->o.
class Gen {
 public:
  explicit Gen(unsigned seed) : rng_(seed) {}

  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }
  bool coin() { return pick(2) == 0; }

  Expr term(const std::vector<Var>& env) {
    std::vector<Expr> opts{Expr::ind_const("a"), Expr::ind_const("b")};
    for (const auto& v : env)
      if (v.type == I) opts.push_back(Expr::var(v));
    return opts[pick(static_cast<int>(opts.size()))];
  }

  Expr boolean(int d, std::vector<Var> env) {
    std::vector<Var> preds;
    for (const auto& v : env)
      if (v.type == IO) preds.push_back(v);
    const int leaf = 6, all = d > 0 ? 13 : leaf;
    switch (pick(all)) {
      case 0: return Expr::prop(coin());
      case 1: return Expr::eq(term(env), term(env));
      case 2: return Expr::app(pred("q"), term(env));
      case 3: return Expr::apps(pred("r"), {term(env), term(env)});
      case 4: return preds.empty() ? Expr::app(pred("s"), term(env))
                                   : Expr::app(Expr::var(preds[pick(static_cast<int>(preds.size()))]), term(env));
      case 5: return Expr::app(pred("h"), pred("q"));
      case 6: return Expr::conj(boolean(d - 1, env), boolean(d - 1, env));
      case 7: return Expr::disj(boolean(d - 1, env), boolean(d - 1, env));
      case 8: {
        Var v = fresh(I);
        env.push_back(v);
        return Expr::exists(v, boolean(d - 1, env));
      }
      case 9: return Expr::app(unary(d - 1, env), term(env));
      case 10: return Expr::app(pred("h"), unary(d - 1, env));
      case 11: return Expr::app(second(d - 1, env), unary(d - 1, env));
      default: return Expr::apps(binary(d - 1, env), {term(env), term(env)});
    }
  }

  /// An expression of type i->o.
  Expr unary(int d, std::vector<Var> env) {
    std::vector<Expr> opts{pred("q"), pred("s"), Expr::app(pred("r"), term(env))};
    for (const auto& v : env)
      if (v.type == IO) opts.push_back(Expr::var(v));
    if (d <= 0 || coin()) return opts[pick(static_cast<int>(opts.size()))];
    if (coin()) return Expr::disj(unary(d - 1, env), unary(d - 1, env));
    Var v = fresh(I);
    env.push_back(v);
    return Expr::lambda(v, boolean(d - 1, env));
  }

  /// An expression of type i->i->o.
  Expr binary(int d, std::vector<Var> env) {
    if (d <= 0 || coin()) return pred("r");
    Var v = fresh(I);
    env.push_back(v);
    return Expr::lambda(v, unary(d - 1, env));
  }

  /// An expression of type (i->o)->o.
  Expr second(int d, std::vector<Var> env) {
    if (d <= 0 || coin()) return pred("h");
    Var v = fresh(IO);
    env.push_back(v);
    return Expr::lambda(v, boolean(d - 1, env));
  }

  Expr of_type(const Type& t, int d, const std::vector<Var>& env) {
    if (t == I) return term(env);
    if (t == O) return boolean(d, env);
    if (t == IO) return unary(d, env);
    if (t == IIO) return binary(d, env);
    return second(d, env);
  }

  Substitution subst(int d) {
    Substitution th;
    const std::vector<Var> env{X, Y, P};
    if (coin()) th.bind(X, term(env));
    if (coin()) th.bind(Y, term(env));
    if (coin()) th.bind(P, unary(d, env));
    return th;
  }

  /// Union of members of type i->o or (i->o)->o built from terms over a, b,
  /// X and Y.
  Expr basic(const Type& t) {
    std::vector<Expr> members;
    const int n = 1 + pick(3);
    for (int k = 0; k < n; ++k) {
      Var v = fresh(t == IO ? I : IO);
      Expr body;
      if (t == IO) {
        body = Expr::eq(Expr::var(v), term({X, Y}));
      } else {
        body = Expr::app(Expr::var(v), term({X, Y}));
        for (int j = pick(2); j > 0; --j) body = Expr::conj(body, Expr::app(Expr::var(v), term({X, Y})));
      }
      members.push_back(Expr::lambda(v, body));
    }
    Expr out = members[0];
    for (std::size_t k = 1; k < members.size(); ++k) out = Expr::disj(out, members[k]);
    return out;
  }

  Var fresh(const Type& t) { return Var{(t == I ? "V" : "Q") + std::to_string(++counter_), t}; }

  std::mt19937& rng() { return rng_; }

 private:
  Expr pred(const std::string& p) {
    static const std::map<std::string, Type> sig{{"q", IO}, {"s", IO}, {"r", IIO}, {"h", IO_O}};
    return Expr::pred_const(p, sig.at(p));
  }

  std::mt19937 rng_;
  int counter_ = 0;
};

/// The program above over its two-element universe.
struct World {
  Program prog = load_program(kProgram).program;
  Domain dom = build_domain(prog, 0);
  Lattice lat{dom};

  ElemId any(Gen& g, const Type& t) {
    const auto& c = lat.carrier(t);
    return c[g.pick(static_cast<int>(c.size()))];
  }

  HerbrandInterp interp(Gen& g) {
    HerbrandInterp i;
    for (const auto& [p, t] : prog.signature.predicates) i.den[p] = any(g, t);
    return i;
  }

  State state(Gen& g) {
    return State{{X, g.pick(2)}, {Y, g.pick(2)}, {P, any(g, IO)}};
  }

  /// I ⊔ T_P(I) iterated to a fixpoint: a model above I.
  HerbrandInterp model_above(HerbrandInterp i) {
    while (true) {
      HerbrandInterp j = interp_lub(prog, lat, i, tp_step(prog, lat, i));
      if (j == i) return i;
      i = std::move(j);
    }
  }

  int value(const Expr& e, const HerbrandInterp& i, const State& s) { return eval(e, lat, i, s); }

  bool leq(const Type& t, int a, int b) { return t == I ? a == b : lat.leq(t, a, b); }
};

bool same_subst(const Substitution& a, const Substitution& b) {
  VarSet dom;
  for (const auto& [v, e] : a) dom.insert(v);
  for (const auto& [v, e] : b) dom.insert(v);
  for (const auto& v : dom)
    if (!alpha_equal(apply(Expr::var(v), a), apply(Expr::var(v), b))) return false;
  return true;
}

TEST(SubstitutionAlgebra, CompositionLaw) {
  Gen g(1);
  for (int k = 0; k < kCases; ++k) {
    Expr e = g.boolean(3, {X, Y, P});
    Substitution th = g.subst(2), sg = g.subst(2);
    EXPECT_TRUE(alpha_equal(apply(apply(e, th), sg), apply(e, compose(th, sg))))
        << to_string(e) << "  " << to_string(th) << "  " << to_string(sg);
  }
}

TEST(SubstitutionAlgebra, CompositionIsAssociative) {
  Gen g(2);
  for (int k = 0; k < kCases; ++k) {
    Substitution a = g.subst(2), b = g.subst(2), c = g.subst(2);
    EXPECT_TRUE(same_subst(compose(compose(a, b), c), compose(a, compose(b, c))));
  }
}

TEST(SubstitutionAlgebra, EmptySubstitutionIsNeutral) {
  Gen g(3);
  for (int k = 0; k < kCases; ++k) {
    Substitution a = g.subst(2);
    EXPECT_TRUE(same_subst(compose(a, {}), a));
    EXPECT_TRUE(same_subst(compose({}, a), a));
  }
}

TEST(SubstitutionAlgebra, BasicExpressionsAreClosedUnderTermSubstitution) {
  Gen g(4);
  for (int k = 0; k < kCases; ++k) {
    const Type t = g.coin() ? IO : IO_O;
    Expr b = g.basic(t);
    ASSERT_TRUE(is_basic(b)) << to_string(b);
    Substitution th;
    th.bind(X, g.term({X, Y}));
    th.bind(Y, g.term({X, Y}));
    Expr r = apply(b, th);
    EXPECT_TRUE(is_basic(r)) << to_string(r);
    EXPECT_TRUE(is_basic(Expr::disj(r, bottom_of(t))));
  }
}

TEST(Semantics, SubstitutionLemma) {
  Gen g(5);
  World w;
  for (int k = 0; k < kCases; ++k) {
    Expr e = g.boolean(3, {X, Y, P});
    Substitution th = g.subst(2);
    HerbrandInterp i = w.interp(g);
    State s = w.state(g);
    State moved = s;
    for (const auto& [v, rhs] : th) moved[v] = w.value(rhs, i, s);
    EXPECT_EQ(w.value(apply(e, th), i, s), w.value(e, i, moved)) << to_string(e) << "  " << to_string(th);
  }
}

TEST(Semantics, BetaLemma) {
  Gen g(6);
  World w;
  for (int k = 0; k < kCases; ++k) {
    const bool pred_arg = g.coin();
    Var v = g.fresh(pred_arg ? IO : I);
    Expr body = g.boolean(3, {X, Y, P, v});
    Expr arg = pred_arg ? g.unary(2, {X, Y, P}) : g.term({X, Y});
    HerbrandInterp i = w.interp(g);
    State s = w.state(g);
    Expr redex = Expr::app(Expr::lambda(v, body), arg);
    EXPECT_EQ(w.value(redex, i, s), w.value(apply(body, Substitution::single(v, arg)), i, s)) << to_string(redex);
  }
}

TEST(Semantics, MonotoneInTheInterpretation) {
  Gen g(7);
  World w;
  for (int k = 0; k < kCases; ++k) {
    const Type t = std::vector<Type>{O, IO, IIO, IO_O}[g.pick(4)];
    Expr e = g.of_type(t, 3, {X, Y, P});
    HerbrandInterp i = w.interp(g);
    HerbrandInterp j = interp_lub(w.prog, w.lat, i, w.interp(g));
    State s = w.state(g);
    EXPECT_TRUE(w.leq(t, w.value(e, i, s), w.value(e, j, s))) << to_string(e);
  }
}

TEST(Semantics, MonotoneInTheState) {
  Gen g(8);
  World w;
  for (int k = 0; k < kCases; ++k) {
    const Type t = std::vector<Type>{O, IO, IIO, IO_O}[g.pick(4)];
    Expr e = g.of_type(t, 3, {X, Y, P});
    HerbrandInterp i = w.interp(g);
    State s = w.state(g);
    State bigger = s;
    bigger[P] = w.lat.lub(IO, s[P], w.any(g, IO));
    EXPECT_TRUE(w.leq(t, w.value(e, i, s), w.value(e, i, bigger))) << to_string(e);
  }
}

TEST(Semantics, ContinuousAlongChains) {
  Gen g(9);
  World w;
  for (int k = 0; k < kCases; ++k) {
    const Type t = std::vector<Type>{O, IO, IO_O}[g.pick(3)];
    Expr e = g.of_type(t, 3, {X, Y, P});
    State s = w.state(g);
    std::vector<HerbrandInterp> chain{w.interp(g)};
    for (int n = 0; n < 3; ++n) chain.push_back(interp_lub(w.prog, w.lat, chain.back(), w.interp(g)));
    HerbrandInterp top = chain.front();
    int lub_of_values = w.value(e, chain.front(), s);
    for (const auto& c : chain) {
      top = interp_lub(w.prog, w.lat, top, c);
      lub_of_values = w.lat.lub(t, lub_of_values, w.value(e, c, s));
    }
    EXPECT_EQ(w.value(e, top, s), lub_of_values) << to_string(e);
  }
}

TEST(Semantics, BasisApplicationAgreesWithDirectApplication) {
  Gen g(10);
  World w;
  for (int k = 0; k < kCases; ++k) {
    Expr e = g.boolean(3, {X, Y, P});
    HerbrandInterp i = w.interp(g);
    State s = w.state(g);
    InterpSource src(w.lat, i);
    Evaluator basis(w.lat, src, 1u << 20), direct(w.lat, src, 0);
    EXPECT_EQ(basis.eval(e, s), direct.eval(e, s)) << to_string(e);
    ElemId f = w.any(g, IO_O), x = w.any(g, IO);
    EXPECT_EQ(w.lat.apply_by_basis(IO_O, f, x), w.lat.apply(IO_O, f, x));
    ElemId r = w.any(g, IIO);
    int t = g.pick(2);
    EXPECT_EQ(w.lat.apply_by_basis(IIO, r, t), w.lat.apply(IIO, r, t));
  }
}

TEST(Lattices, Laws) {
  Gen g(11);
  World w;
  for (int k = 0; k < kCases; ++k) {
    const Type t = std::vector<Type>{O, IO, IIO, IO_O}[g.pick(4)];
    ElemId a = w.any(g, t), b = w.any(g, t), c = w.any(g, t);
    Lattice& L = w.lat;
    EXPECT_EQ(L.lub(t, a, b), L.lub(t, b, a));
    EXPECT_EQ(L.glb(t, a, b), L.glb(t, b, a));
    EXPECT_EQ(L.lub(t, L.lub(t, a, b), c), L.lub(t, a, L.lub(t, b, c)));
    EXPECT_EQ(L.glb(t, L.glb(t, a, b), c), L.glb(t, a, L.glb(t, b, c)));
    EXPECT_EQ(L.lub(t, a, L.glb(t, a, b)), a);
    EXPECT_EQ(L.glb(t, a, L.lub(t, a, b)), a);
    EXPECT_EQ(L.lub(t, a, a), a);
    EXPECT_EQ(L.leq(t, a, b), L.lub(t, a, b) == b);
    EXPECT_TRUE(L.leq(t, L.bottom(t), a));
    EXPECT_TRUE(L.leq(t, a, L.top(t)));
    if (L.leq(t, a, b) && L.leq(t, b, c)) EXPECT_TRUE(L.leq(t, a, c));
    if (L.leq(t, a, b) && L.leq(t, b, a)) EXPECT_EQ(a, b);
  }
}

TEST(Lattices, StepFunctionLaw) {
  Gen g(12);
  World w;
  for (int k = 0; k < kCases; ++k) {
    if (g.coin()) {
      ElemId f = w.any(g, IO_O), x = w.any(g, IO), c = w.any(g, O);
      EXPECT_EQ(w.lat.leq(IO_O, w.lat.step(IO_O, x, c), f), w.lat.leq(O, c, w.lat.apply(IO_O, f, x)));
    } else {
      ElemId f = w.any(g, IIO), c = w.any(g, IO);
      int x = g.pick(2);
      EXPECT_EQ(w.lat.leq(IIO, w.lat.step(IIO, x, c), f), w.lat.leq(IO, c, w.lat.apply(IIO, f, x)));
    }
  }
}

TEST(Lattices, EveryElementIsTheLubOfItsSteps) {
  Gen g(13);
  World w;
  for (int k = 0; k < kCases; ++k) {
    ElemId f = w.any(g, IO_O);
    ElemId acc = w.lat.bottom(IO_O);
    for (ElemId x : w.lat.carrier(IO)) acc = w.lat.lub(IO_O, acc, w.lat.step(IO_O, x, w.lat.apply(IO_O, f, x)));
    EXPECT_EQ(acc, f);
    ElemId r = w.any(g, IIO);
    ElemId racc = w.lat.bottom(IIO);
    for (int x = 0; x < 2; ++x) racc = w.lat.lub(IIO, racc, w.lat.step(IIO, x, w.lat.apply(IIO, r, x)));
    EXPECT_EQ(racc, r);
  }
}

TEST(Models, ImmediateConsequenceIsMonotone) {
  Gen g(14);
  World w;
  for (int k = 0; k < kCases; ++k) {
    HerbrandInterp i = w.interp(g);
    HerbrandInterp j = interp_lub(w.prog, w.lat, i, w.interp(g));
    EXPECT_TRUE(interp_leq(w.prog, w.lat, tp_step(w.prog, w.lat, i), tp_step(w.prog, w.lat, j)));
  }
}

TEST(Models, IntersectionOfModelsIsAModel) {
  Gen g(15);
  World w;
  for (int k = 0; k < kCases; ++k) {
    HerbrandInterp m1 = w.model_above(w.interp(g)), m2 = w.model_above(w.interp(g));
    ASSERT_TRUE(is_model(w.prog, w.lat, m1));
    EXPECT_TRUE(is_model(w.prog, w.lat, interp_glb(w.prog, w.lat, m1, m2)));
  }
}

TEST(Models, MinimumModelIsBelowEveryModel) {
  Gen g(16);
  World w;
  HerbrandInterp least = min_model(w.prog, w.lat);
  ASSERT_TRUE(is_model(w.prog, w.lat, least));
  for (int k = 0; k < kCases; ++k) EXPECT_TRUE(interp_leq(w.prog, w.lat, least, w.model_above(w.interp(g))));
}

TEST(Models, LocalSolverAgreesWithTheMinimumModel) {
  Gen g(17);
  World w;
  HerbrandInterp least = min_model(w.prog, w.lat);
  LocalSolver solver(w.prog, w.lat);
  for (int k = 0; k < kCases; ++k) {
    Expr e = g.boolean(3, {X, Y, P});
    State s = w.state(g);
    EXPECT_EQ(solver.truth(e, s), w.lat.is_true(w.value(e, least, s))) << to_string(e);
  }
}

class TermGen {
 public:
  explicit TermGen(unsigned seed) : rng_(seed) {}

  Expr term(int d) {
    int c = std::uniform_int_distribution<int>(0, d > 0 ? 6 : 3)(rng_);
    switch (c) {
      case 0: return Expr::ind_const("a");
      case 1: return Expr::var(Var{"X", I});
      case 2: return Expr::var(Var{"Y", I});
      case 3: return Expr::var(Var{"Z", I});
      case 4:
      case 5: return Expr::fun_app("f", {term(d - 1)});
      default: return Expr::fun_app("g", {term(d - 1), term(d - 1)});
    }
  }

 private:
  std::mt19937 rng_;
};

TEST(Unification, MostGeneralUnifiers) {
  TermGen g(18);
  const std::vector<Var> vars{{"X", I}, {"Y", I}, {"Z", I}};
  const std::vector<Expr> ground{Expr::ind_const("a"), Expr::ind_const("b"),
                                 Expr::fun_app("f", {Expr::ind_const("a")})};
  int unified = 0;
  for (int k = 0; k < kCases; ++k) {
    Expr t1 = g.term(2), t2 = g.term(2);
    UnifyResult r = mgu(t1, t2);
    if (r) {
      ++unified;
      EXPECT_TRUE(alpha_equal(apply(t1, r.theta), apply(t2, r.theta)));
      for (const auto& v : vars) {
        Expr once = apply(Expr::var(v), r.theta);
        EXPECT_TRUE(alpha_equal(apply(once, r.theta), once)) << "not idempotent";
      }
    }
    // Every ground unifier over a small set of terms factors through the mgu.
    for (const auto& gx : ground)
      for (const auto& gy : ground)
        for (const auto& gz : ground) {
          Substitution gam{{vars[0], gx}, {vars[1], gy}, {vars[2], gz}};
          if (!alpha_equal(apply(t1, gam), apply(t2, gam))) continue;
          ASSERT_TRUE(r.ok) << to_string(t1) << " = " << to_string(t2);
          for (const auto& v : vars)
            EXPECT_TRUE(alpha_equal(apply(apply(Expr::var(v), r.theta), gam), apply(Expr::var(v), gam)));
        }
  }
  EXPECT_GT(unified, kCases / 20);
}

// A lambda whose predicate-typed binder does not occur in its body; the
// text alone leaves the binder's type open.
bool has_vacuous_pred_binder(const Expr& e) {
  if (e.is(ExprKind::Lambda) && e.var().type != I && !e.body().has_free(e.var())) return true;
  for (const auto& k : e.kids())
    if (has_vacuous_pred_binder(k)) return true;
  return false;
}

TEST(Parsing, PrintedExpressionsParseBack) {
  Gen g(19);
  World w;
  for (int k = 0; k < kCases; ++k) {
    Expr e = g.boolean(3, {X, Y, P});
    Program p = w.prog;
    Expr back = load_expression(p, to_string(e));
    EXPECT_EQ(to_string(back), to_string(e));
    if (!has_vacuous_pred_binder(e)) EXPECT_TRUE(alpha_equal(back, e)) << to_string(e);
  }
}

}  // namespace
