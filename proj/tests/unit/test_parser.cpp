#include <gtest/gtest.h>

#include "support.hpp"

using namespace hopl;

namespace {

const Clause& first_clause(const Program& p, const std::string& name) { return *p.clauses_for(name).front(); }

TEST(Lexer, AcceptsAsciiAndUnicodeOperators) {
  auto ascii = detail::lex("\\X. X = a /\\ true \\/ false <- ->");
  auto uni = detail::lex("λX. X ≈ a ∧ true ∨ false ← →");
  ASSERT_EQ(ascii.size(), uni.size());
  for (std::size_t i = 0; i < ascii.size(); ++i) EXPECT_EQ(ascii[i].kind, uni[i].kind) << i;
}

TEST(Lexer, SkipsComments) {
  auto toks = detail::lex("p(a). % a comment\n% another\nq(b).");
  int idents = 0;
  for (const auto& t : toks)
    if (t.kind == Tok::Ident) ++idents;
  EXPECT_EQ(idents, 4);
}

TEST(Lexer, ReportsPositions) {
  try {
    parse("p(a).\nq(b) $ r.");
    FAIL() << "expected a syntax error";
  } catch (const SyntaxError& e) {
    ASSERT_FALSE(e.diags.empty());
    EXPECT_EQ(e.diags[0].span.line, 2);
    EXPECT_EQ(e.diags[0].span.col, 6);
  }
}

TEST(Parser, SyntaxErrorsCarryLocations) {
  try {
    parse("p(a) :- q(a.\n");
    FAIL() << "expected a syntax error";
  } catch (const SyntaxError& e) {
    EXPECT_TRUE(e.has_kind("syntax"));
    EXPECT_EQ(e.diags[0].span.line, 1);
    EXPECT_NE(e.diags[0].str().find("error"), std::string::npos);
  }
}

TEST(Parser, ReadsClausesQueriesAndDeclarations) {
  SourceProgram sp = parse(":- type p (i->o)->o.\np(Q) :- Q(0).\nnat(0).\n?- p(R).\n");
  EXPECT_EQ(sp.decls.size(), 1u);
  EXPECT_EQ(sp.clauses.size(), 2u);
  ASSERT_EQ(sp.queries.size(), 1u);
  EXPECT_EQ(sp.queries[0].text, "?- p(R).");
}

TEST(Parser, ListsExpandToConsAndNil) {
  Program prog = load_program("l([a,b|T]) :- T = [].").program;
  EXPECT_EQ(prog.signature.functions.at("cons"), 2);
  EXPECT_TRUE(prog.signature.constants.count("nil"));
}

TEST(Desugar, HeadVariablesBecomeBinders) {
  Program prog = test::load_corpus("closure.hol");
  const auto& cs = prog.clauses_for("closure");
  ASSERT_EQ(cs.size(), 2u);
  EXPECT_EQ(to_string(cs[0]->body), "\\R.\\X.\\Y.R X Y");
  EXPECT_EQ(to_string(cs[1]->body), "\\R.\\X.\\Y.exists Z (R X Z /\\ closure R Z Y)");
}

TEST(Desugar, NonVariableHeadArgumentsBecomeEquations) {
  Program prog = test::load_corpus("ordered.hol");
  const auto& cs = prog.clauses_for("ordered");
  ASSERT_EQ(cs.size(), 3u);
  EXPECT_EQ(to_string(cs[0]->body), "\\R.\\V.(V = [])");
  EXPECT_EQ(to_string(cs[1]->body), "\\R.\\V.exists X (V = [X])");
  EXPECT_EQ(to_string(cs[2]->body),
            "\\R.\\V.exists X exists Y exists T ((V = [X,Y|T]) /\\ R X Y /\\ ordered R [Y|T])");
}

TEST(Desugar, SugaredAndCoreClausesAgree) {
  Program a = load_program("edge(a,b). path(X,Y) :- edge(X,Z), edge(Z,Y).").program;
  Program b = load_program("edge(a,b). path <- \\X.\\Y.exists Z (edge X Z /\\ edge Z Y).").program;
  EXPECT_TRUE(alpha_equal(first_clause(a, "path").body, first_clause(b, "path").body));
}

TEST(Typing, InfersPredicateTypes) {
  EXPECT_EQ(test::load_corpus("closure.hol").signature.predicates.at("closure").str(), "(i->i->o)->i->i->o");
  EXPECT_EQ(test::load_corpus("ordered.hol").signature.predicates.at("ordered").str(), "(i->i->o)->i->o");
  Program nat = test::load_corpus("nat.hol");
  EXPECT_EQ(nat.signature.predicates.at("p").str(), "(i->o)->o");
  EXPECT_EQ(nat.signature.predicates.at("nat").str(), "i->o");
  EXPECT_EQ(test::load_corpus("band.hol").signature.predicates.at("band").str(), "(i->o)->o");
  EXPECT_EQ(test::load_corpus("allmembers.hol").signature.predicates.at("allmembers").str(), "i->(i->o)->o");
}

TEST(Typing, SortsConstantsAndFunctions) {
  Program nat = test::load_corpus("nat.hol");
  EXPECT_TRUE(nat.signature.constants.count("0"));
  EXPECT_EQ(nat.signature.functions.at("s"), 1);
}

TEST(Typing, UndeterminedTypesAreReportedAsNotes) {
  LoadResult r = load_program(test::slurp(test::corpus("closure.hol")));
  bool found = false;
  for (const auto& d : r.notes)
    if (d.severity == Diagnostic::Severity::Note && d.message.find("R") != std::string::npos) found = true;
  EXPECT_TRUE(found);
}

TEST(Typing, DeclarationsFixTypes) {
  Program p = load_program(":- type q (i->i->o)->o.\nq(R) :- R(a,a).").program;
  EXPECT_EQ(p.signature.predicates.at("q").str(), "(i->i->o)->o");
  EXPECT_THROW(load_program(":- type q i->o.\nq(R) :- R(a)."), FrontendError);
}

TEST(Typing, ExtensionalityViolationIsRejected) {
  try {
    load_program(test::slurp(test::corpus("profession.hol")));
    FAIL() << "expected a type error";
  } catch (const FrontendError& e) {
    EXPECT_TRUE(e.has_kind("extensionality"));
    EXPECT_EQ(e.diags[0].span.line, 5);
  }
}

TEST(Typing, PredicateVariablesMayNotBeRepeatedInHeads) {
  EXPECT_THROW(load_program("q(a). p(R,R) :- R(a)."), FrontendError);
}

TEST(Typing, MismatchedUsesAreRejected) {
  EXPECT_THROW(load_program("p(a). q :- p(a,b)."), FrontendError);
  EXPECT_THROW(load_program("p(a). q(X) :- p(X), X(a)."), FrontendError);
}

TEST(Typing, ImplicitClausesForBodyOnlyPredicates) {
  Program p = load_program("q(X) :- r(X).").program;
  const auto& rs = p.clauses_for("r");
  ASSERT_EQ(rs.size(), 1u);
  EXPECT_TRUE(rs[0]->implicit);
  EXPECT_EQ(to_string(rs[0]->body), "\\V1.false");
}

TEST(Queries, AreTypedAgainstTheProgram) {
  Program prog = test::load_corpus("closure.hol");
  Goal g = load_query(prog, "?- closure(Q,a,b).");
  ASSERT_EQ(g.free.size(), 1u);
  EXPECT_EQ(g.free[0].name, "Q");
  EXPECT_EQ(g.free[0].type.str(), "i->i->o");
  EXPECT_EQ(to_string(g.body), "closure Q a b");
}

TEST(Queries, AnonymousVariablesAreExistential) {
  Program prog = test::load_corpus("closure.hol");
  Goal g = load_query(prog, "?- edge(a,_).");
  EXPECT_TRUE(g.free.empty());
  EXPECT_TRUE(g.body.closed());
}

TEST(Queries, NewConstantsJoinTheSignature) {
  Program prog = test::load_corpus("closure.hol");
  load_query(prog, "?- closure(edge,a,zed).");
  EXPECT_TRUE(prog.signature.constants.count("zed"));
}

TEST(Queries, IllTypedQueriesAreRejected) {
  Program prog = test::load_corpus("closure.hol");
  EXPECT_THROW(load_query(prog, "?- closure(a,a,b)."), FrontendError);
  EXPECT_THROW(load_query(prog, "?- closure(Q,a"), FrontendError);
}

}  // namespace
