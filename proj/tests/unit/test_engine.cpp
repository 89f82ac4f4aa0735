#include <gtest/gtest.h>

#include <chrono>

#include "support.hpp"

using namespace hopl;

namespace {

Program closure_program() { return test::load_corpus("closure.hol"); }

std::vector<std::string> goals_of(const std::vector<Successor>& ss) {
  std::vector<std::string> out;
  for (const auto& s : ss) out.push_back(to_string(s.goal));
  return out;
}

std::vector<std::string> pretty_answers(const Program& prog, const std::string& query, SolveLimits lim, int n) {
  Program p = prog;
  Goal g = load_query(p, query);
  auto st = solve(p, g, lim);
  std::vector<std::string> out;
  for (const auto& a : st.take(n)) out.push_back(format_answer(a, st.query_vars(), false));
  return out;
}

TEST(Steps, ClauseUnfoldingGivesOneSuccessorPerClause) {
  Program prog = closure_program();
  auto ss = derive_steps(prog, test::expr_in(prog, "closure Q a b"));
  ASSERT_EQ(ss.size(), 2u);
  EXPECT_EQ(ss[0].rule.str(), "1");
  EXPECT_EQ(goals_of(ss)[0], "(\\R.\\X.\\Y.R X Y) Q a b");
  EXPECT_TRUE(ss[0].theta.empty());
}

TEST(Steps, Beta) {
  Program prog = closure_program();
  auto ss = derive_steps(prog, test::expr_in(prog, "(\\X.(X = a)) b"));
  ASSERT_EQ(ss.size(), 1u);
  EXPECT_EQ(ss[0].rule.str(), "3");
  EXPECT_EQ(to_string(ss[0].goal), "b = a");
}

TEST(Steps, EquationsUnifyOrFail) {
  Program prog = closure_program();
  auto ok = derive_steps(prog, test::expr_in(prog, "X = a"));
  ASSERT_EQ(ok.size(), 1u);
  EXPECT_TRUE(ok[0].goal.is_true());
  EXPECT_EQ(to_string(ok[0].theta), "{X/a}");
  EXPECT_TRUE(derive_steps(prog, test::expr_in(prog, "a = b")).empty());
  EXPECT_TRUE(derive_steps(prog, Expr::top()).empty());
}

TEST(Steps, ExistentialsOpenWithFreshVariables) {
  Program prog = closure_program();
  auto ss = derive_steps(prog, test::expr_in(prog, "exists Z (edge a Z)"));
  ASSERT_EQ(ss.size(), 1u);
  EXPECT_EQ(ss[0].rule.str(), "12");
  EXPECT_EQ(to_string(ss[0].goal), "edge a Z");
}

TEST(Steps, ConjunctionRulesAreLabelledWithTheInnerRule) {
  Program prog = closure_program();
  auto ss = derive_steps(prog, test::expr_in(prog, "(X = a /\\ edge X b) /\\ true"));
  std::vector<std::string> rules;
  for (const auto& s : ss) rules.push_back(s.rule.str());
  EXPECT_EQ(rules, (std::vector<std::string>{"11-in-7", "1-in-7", "1-in-7", "10"}));
  EXPECT_EQ(to_string(ss[0].goal), "(true /\\ edge a b) /\\ true");
  EXPECT_EQ(to_string(ss[0].theta), "{X/a}");
}

TEST(Steps, LeftmostSelectionStepsOnlyTheLeftConjunct) {
  Program prog = closure_program();
  StepOptions o;
  o.selection = Selection::Leftmost;
  auto ss = derive_steps(prog, test::expr_in(prog, "edge a X /\\ X = b"), o);
  ASSERT_EQ(ss.size(), 2u);
  for (const auto& s : ss) EXPECT_EQ(s.rule.str(), "1-in-7");
}

TEST(Steps, EagerTemplatesForPredicateVariables) {
  Program prog = closure_program();
  StepOptions o;
  o.budget = 1;
  o.lazy = false;
  auto ss = derive_steps(prog, test::expr_in(prog, "Q a"), o);
  ASSERT_EQ(ss.size(), 2u);
  EXPECT_EQ(to_string(ss[0].theta), "{Q/\\X.(X = X0)}");
  EXPECT_EQ(to_string(ss[1].theta), "{Q/\\X.false}");
}

TEST(Steps, LazyTemplatesIntroduceATail) {
  Program prog = closure_program();
  StepOptions o;
  o.budget = 1;
  o.lazy = true;
  auto ss = derive_steps(prog, test::expr_in(prog, "Q a"), o);
  ASSERT_EQ(ss.size(), 1u);
  EXPECT_TRUE(ss[0].lazy_intro);
  ASSERT_TRUE(ss[0].tail.has_value());
  EXPECT_EQ(to_string(ss[0].theta), "{Q/(\\X.(X = X0)) \\/ L}");
}

TEST(Steps, SuccessorsAreWellTypedGoals) {
  Program prog = closure_program();
  for (const char* s : {"closure Q a b", "exists Z (closure edge a Z /\\ Q Z)", "Q a /\\ (edge a X \\/ edge X a) a"}) {
    Expr e;
    try {
      e = test::expr_in(prog, s);
    } catch (const FrontendError&) {
      continue;
    }
    StepOptions o;
    o.budget = 2;
    o.lazy = false;
    for (const auto& succ : derive_steps(prog, e, o)) EXPECT_TRUE(succ.goal.type().is_boolean());
  }
}

TEST(Solve, LazyNatExample) {
  Program prog = test::load_corpus("nat.hol");
  SolveLimits lim;
  lim.max_depth = 50;
  lim.template_budget = 4;
  auto got = pretty_answers(prog, "?- p(R).", lim, 5);
  EXPECT_EQ(got, (std::vector<std::string>{"R = {0, s(0)} ∪ L"}));
}

TEST(Solve, EagerNatExamplePadsTheUnion) {
  Program prog = test::load_corpus("nat.hol");
  SolveLimits lim;
  lim.max_depth = 50;
  lim.template_budget = 4;
  lim.lazy = false;
  auto got = pretty_answers(prog, "?- p(R).", lim, 3);
  ASSERT_EQ(got.size(), 3u);
  EXPECT_EQ(got[0], "R = {0, s(0)}");
  EXPECT_EQ(got[1], "R = {0, s(0), X2}");
  EXPECT_EQ(got[2], "R = {0, s(0), X2, X3}");
}

TEST(Solve, ClosureAnswerForms) {
  Program prog = closure_program();
  auto got = pretty_answers(prog, "?- closure(Q,a,b).", {}, 2);
  EXPECT_EQ(got, (std::vector<std::string>{"Q = {(a,b)} ∪ L", "Q = {(a,Z), (Z,b)} ∪ L"}));
}

TEST(Solve, GroundQueries) {
  Program prog = closure_program();
  EXPECT_EQ(pretty_answers(prog, "?- closure(edge,a,c).", {}, 5), (std::vector<std::string>{"true"}));
  EXPECT_TRUE(pretty_answers(prog, "?- closure(edge,c,a).", {}, 5).empty());
  EXPECT_TRUE(pretty_answers(prog, "?- a = b.", {}, 5).empty());
}

TEST(Solve, FirstOrderAnswers) {
  Program prog = closure_program();
  auto got = pretty_answers(prog, "?- closure(edge,a,Y).", {}, 5);
  EXPECT_EQ(got, (std::vector<std::string>{"Y = b", "Y = c"}));
}

TEST(Solve, OrderedExample) {
  Program prog = test::load_corpus("ordered.hol");
  EXPECT_EQ(pretty_answers(prog, "?- ordered(R,[1,2,3]).", {}, 5), (std::vector<std::string>{"R = {(1,2), (2,3)} ∪ L"}));
}

TEST(Solve, AnswerQuota) {
  Program prog = closure_program();
  Goal g = load_query(prog, "?- closure(Q,a,b).");
  SolveLimits lim;
  lim.max_answers = 3;
  auto st = solve(prog, g, lim);
  EXPECT_EQ(st.take(10).size(), 3u);
  EXPECT_EQ(st.status(), SearchStatus::QuotaReached);
}

TEST(Solve, ExhaustionIsReported) {
  Program prog = closure_program();
  Goal g = load_query(prog, "?- closure(edge,a,Y).");
  auto st = solve(prog, g);
  st.take(10);
  EXPECT_EQ(st.status(), SearchStatus::Exhausted);
}

TEST(Solve, AnswersAreDistinct) {
  Program prog = test::load_corpus("band.hol");
  Goal g = load_query(prog, "?- band(B).");
  auto st = solve(prog, g);
  std::set<std::string> keys;
  for (const auto& a : st.take(10)) EXPECT_TRUE(keys.insert(answer_key(a.bindings, st.query_vars())).second);
}

TEST(Solve, TracesStartAtTheQueryAndEndAtTrue) {
  Program prog = closure_program();
  Goal g = load_query(prog, "?- closure(Q,a,b).");
  SolveLimits lim;
  lim.keep_trace = true;
  lim.lazy = false;
  auto st = solve(prog, g, lim);
  auto a = st.next();
  ASSERT_TRUE(a.has_value());
  ASSERT_GE(a->trace.size(), 2u);
  EXPECT_EQ(to_string(a->trace.front()), "0 | - | {} | closure Q a b");
  EXPECT_TRUE(a->trace.back().goal.is_true());
  EXPECT_EQ(a->length, static_cast<int>(a->trace.size()) - 1);
  EXPECT_EQ(to_string(a->bindings), "{Q/\\X.\\Y.(X = a) /\\ (Y = b)}");
}

TEST(Solve, EngineTracesAreRefutations) {
  Program prog = closure_program();
  Goal g = load_query(prog, "?- closure(Q,a,c).");
  SolveLimits lim;
  lim.keep_trace = true;
  lim.lazy = false;
  auto st = solve(prog, g, lim);
  for (const auto& a : st.take(4)) {
    std::vector<RefutationLine> lines;
    for (std::size_t i = 0; i < a.trace.size(); ++i)
      lines.push_back({a.trace[i].goal, i + 1 < a.trace.size() ? a.trace[i + 1].theta : Substitution{}});
    auto r = check_refutation(prog, g.body, lines);
    EXPECT_TRUE(r.ok) << r.reason << " at " << r.failed_step;
  }
}

TEST(Refutation, AcceptsTheClosureTrace) {
  test::ClosureTrace t;
  auto r = check_refutation(t.prog, t.goal.body, t.lines);
  EXPECT_TRUE(r.ok) << r.reason << " at " << r.failed_step;
}

TEST(Refutation, RejectsAWrongUnifier) {
  test::ClosureTrace t;
  t.lines[4].theta = Substitution::single(Var{"X0", Type::iota()}, Expr::ind_const("b"));
  auto r = check_refutation(t.prog, t.goal.body, t.lines);
  EXPECT_FALSE(r.ok);
  EXPECT_EQ(r.failed_step, 4);
}

TEST(Refutation, RejectsTemplatesReusingVariables) {
  test::ClosureTrace t;
  const Var q = test::find_var(t.goal, "Q");
  t.lines[2].theta = Substitution::single(q, test::expr_in(t.prog, "\\U.\\W.(U = X) /\\ (W = Y0)"));
  t.lines[3].goal = test::expr_in(t.prog, "(\\U.\\W.(U = X) /\\ (W = Y0)) a b");
  auto r = check_refutation(t.prog, t.goal.body, t.lines);
  EXPECT_FALSE(r.ok);
  EXPECT_EQ(r.failed_step, 2);
  EXPECT_NE(r.reason.find("X"), std::string::npos);
}

TEST(Refutation, RejectsAMissingFinalBox) {
  test::ClosureTrace t;
  t.lines.pop_back();
  EXPECT_FALSE(check_refutation(t.prog, t.goal.body, t.lines).ok);
}

TEST(Refutation, RejectsAWrongStart) {
  test::ClosureTrace t;
  t.lines.erase(t.lines.begin());
  auto r = check_refutation(t.prog, t.goal.body, t.lines);
  EXPECT_FALSE(r.ok);
  EXPECT_EQ(r.failed_step, 0);
}

TEST(Refutation, RejectsAnUnlicensedJump) {
  test::ClosureTrace t;
  t.lines.erase(t.lines.begin() + 3);  // template application skipped
  EXPECT_FALSE(check_refutation(t.prog, t.goal.body, t.lines).ok);
}

}  // namespace
