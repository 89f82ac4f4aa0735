#pragma once

#include <cctype>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "hopl/program.hpp"
#include "hopl/type.hpp"

namespace hopl {

// ---------------------------------------------------------------------------
// Diagnostics.

struct Diagnostic {
  enum class Severity { Error, Note };
  Severity severity = Severity::Error;
  std::string kind;  // "syntax", "type", "extensionality", "default", ...
  std::string message;
  Span span;

  std::string str() const {
    std::string s = span.line ? span.str() + ": " : std::string();
    s += severity == Severity::Error ? "error: " : "note: ";
    return s + message;
  }
};

class FrontendError : public std::runtime_error {
 public:
  explicit FrontendError(std::vector<Diagnostic> ds)
      : std::runtime_error(ds.empty() ? std::string("front-end error") : ds.front().str()), diags(std::move(ds)) {}
  std::vector<Diagnostic> diags;

  bool has_kind(const std::string& k) const {
    for (const auto& d : diags)
      if (d.kind == k) return true;
    return false;
  }
};

class SyntaxError : public FrontendError {
 public:
  SyntaxError(const std::string& msg, Span sp) : FrontendError({Diagnostic{Diagnostic::Severity::Error, "syntax", msg, sp}}) {}
};

// ---------------------------------------------------------------------------
// Lexer.

enum class Tok {
  End,
  Ident,   // lowercase-initial identifier or numeral
  Var,     // uppercase- or underscore-initial identifier
  LParen,
  RParen,
  LBrack,
  RBrack,
  Comma,
  Dot,
  Bar,
  Eq,
  If,      // :-
  Arrow,   // <-
  Query,   // ?-
  Lambda,  // \ or λ
  And,     // /\ or ∧
  Or,      // \/ or ∨
  Exists,  // exists or ∃
  True,
  False,
  TypeArrow  // -> or →
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  Span span;
  bool spaced = true;  // preceded by whitespace or a comment
};

namespace detail {

inline bool ident_char(unsigned char c) { return std::isalnum(c) || c == '_'; }

inline std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1, col = 1;
  bool spaced = true;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else if ((static_cast<unsigned char>(src[i]) & 0xC0) != 0x80) {
        ++col;
      }
    }
  };
  auto starts = [&](const char* s) { return src.compare(i, std::char_traits<char>::length(s), s) == 0; };
  while (true) {
    while (i < src.size()) {
      if (std::isspace(static_cast<unsigned char>(src[i]))) {
        advance(1);
        spaced = true;
      } else if (src[i] == '%') {
        while (i < src.size() && src[i] != '\n') advance(1);
        spaced = true;
      } else {
        break;
      }
    }
    Token t;
    t.span.line = line;
    t.span.col = col;
    t.spaced = spaced;
    spaced = false;
    if (i >= src.size()) {
      t.kind = Tok::End;
      t.span.end_line = line;
      t.span.end_col = col;
      out.push_back(t);
      return out;
    }
    struct Sym {
      const char* s;
      Tok k;
    };
    static const Sym syms[] = {
        {":-", Tok::If},      {"<-", Tok::Arrow},    {"?-", Tok::Query},    {"/\\", Tok::And},   {"\\/", Tok::Or},
        {"->", Tok::TypeArrow}, {"\\", Tok::Lambda}, {"(", Tok::LParen},    {")", Tok::RParen},  {"[", Tok::LBrack},
        {"]", Tok::RBrack},   {",", Tok::Comma},     {".", Tok::Dot},       {"|", Tok::Bar},     {"=", Tok::Eq},
        {"λ", Tok::Lambda},   {"∧", Tok::And},       {"∨", Tok::Or},        {"≈", Tok::Eq},      {"∃", Tok::Exists},
        {"←", Tok::Arrow},    {"→", Tok::TypeArrow}, {"ι", Tok::Ident}};
    bool matched = false;
    for (const auto& s : syms) {
      if (starts(s.s)) {
        t.kind = s.k;
        t.text = s.s;
        if (t.kind == Tok::Ident) t.text = "i";
        advance(std::char_traits<char>::length(s.s));
        matched = true;
        break;
      }
    }
    if (!matched) {
      unsigned char c = static_cast<unsigned char>(src[i]);
      if (std::isalnum(c) || c == '_') {
        std::size_t j = i;
        while (j < src.size() && ident_char(static_cast<unsigned char>(src[j]))) ++j;
        t.text = src.substr(i, j - i);
        if (std::isupper(c) || c == '_') t.kind = Tok::Var;
        else if (t.text == "exists") t.kind = Tok::Exists;
        else if (t.text == "true") t.kind = Tok::True;
        else if (t.text == "false") t.kind = Tok::False;
        else t.kind = Tok::Ident;
        advance(j - i);
      } else {
        std::string bad(1, src[i]);
        throw SyntaxError("unexpected character '" + bad + "'", t.span);
      }
    }
    t.span.end_line = line;
    t.span.end_col = col;
    out.push_back(t);
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Surface syntax tree (untyped).

struct SExpr;
using SExprP = std::shared_ptr<SExpr>;

struct SExpr {
  enum class Kind { Var, Name, Apply, Eq, And, Or, Lambda, Exists, True, False };
  Kind kind = Kind::Name;
  std::string name;          // Var, Name, binder of Lambda/Exists
  std::vector<SExprP> kids;  // Apply: head then args; Eq/And/Or: two; Lambda/Exists: body
  Span span;
  Span binder_span;
  bool head_arg = false;  // Eq introduced for a non-variable head argument

  static SExprP make(Kind k, std::string n, std::vector<SExprP> ks, Span sp) {
    auto e = std::make_shared<SExpr>();
    e->kind = k;
    e->name = std::move(n);
    e->kids = std::move(ks);
    e->span = sp;
    return e;
  }
};

struct TypeDecl {
  std::string name;
  Type type;
  Span span;
};

struct SurfaceClause {
  bool core = false;
  std::string name;            // head predicate
  std::vector<SExprP> args;    // sugared head arguments
  std::vector<SExprP> body;    // sugared body items
  SExprP core_body;            // core clause body
  Span span;
};

struct SurfaceQuery {
  std::vector<SExprP> body;
  Span span;
  std::string text;  // source tokens, whitespace collapsed
};

struct SourceProgram {
  std::string text;
  std::vector<TypeDecl> decls;
  std::vector<SurfaceClause> clauses;
  std::vector<SurfaceQuery> queries;
};

namespace detail {

inline bool reserved(const std::string& s) { return s == "exists" || s == "true" || s == "false"; }

class Parser {
 public:
  explicit Parser(const std::string& text) : toks_(lex(text)) {}

  SourceProgram program(const std::string& text) {
    SourceProgram p;
    p.text = text;
    while (peek().kind != Tok::End) {
      if (peek().kind == Tok::If) {
        p.decls.push_back(decl());
      } else if (peek().kind == Tok::Query) {
        p.queries.push_back(query());
      } else {
        p.clauses.push_back(clause());
      }
    }
    return p;
  }

  SurfaceQuery query() {
    SurfaceQuery q;
    const std::size_t start = pos_;
    q.span = expect(Tok::Query, "'?-'").span;
    q.body = items();
    expect(Tok::Dot, "'.' at the end of the query");
    q.text = source_text(start, pos_);
    return q;
  }

  /// A query with or without the leading `?-` and the final dot.
  SurfaceQuery bare_query() {
    SurfaceQuery q;
    q.span = peek().span;
    if (peek().kind == Tok::Query) next();
    const std::size_t start = pos_;
    q.body = items();
    q.text = "?- " + source_text(start, pos_) + ".";
    if (peek().kind == Tok::Dot) next();
    if (peek().kind != Tok::End) fail("unexpected " + describe(peek()) + " after the query");
    return q;
  }

  SExprP expression() {
    SExprP e = expr();
    if (peek().kind != Tok::End) fail("unexpected " + describe(peek()));
    return e;
  }

  Type type_expr() {
    Type lhs = type_atom();
    if (peek().kind == Tok::TypeArrow) {
      next();
      Type rhs = type_expr();
      if (!rhs.is_predicate()) fail("the result of an arrow type must be a predicate type");
      if (!lhs.is_argument()) fail("argument types must be i or predicate types");
      return Type::arrow(lhs, rhs);
    }
    return lhs;
  }

 private:
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  Token next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

  [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(msg, peek().span); }

  static std::string describe(const Token& t) {
    if (t.kind == Tok::End) return "end of input";
    return "'" + t.text + "'";
  }

  Token expect(Tok k, const std::string& what) {
    if (peek().kind != k) fail("expected " + what + ", found " + describe(peek()));
    return next();
  }

  std::string source_text(std::size_t from, std::size_t to) const {
    std::string s;
    for (std::size_t i = from; i < to && i < toks_.size(); ++i) {
      if (i > from && toks_[i].spaced) s += ' ';
      s += toks_[i].text;
    }
    return s;
  }

  static Span join(Span a, Span b) {
    a.end_line = b.end_line;
    a.end_col = b.end_col;
    return a;
  }

  TypeDecl decl() {
    TypeDecl d;
    d.span = expect(Tok::If, "':-'").span;
    Token kw = expect(Tok::Ident, "'type'");
    if (kw.text != "type") throw SyntaxError("unknown directive '" + kw.text + "'", kw.span);
    Token n = expect(Tok::Ident, "a predicate name");
    if (reserved(n.text)) throw SyntaxError("reserved word '" + n.text + "' used as a name", n.span);
    d.name = n.text;
    d.type = type_expr();
    if (!d.type.is_predicate()) throw SyntaxError("declared type of " + d.name + " must be a predicate type", n.span);
    expect(Tok::Dot, "'.' after the type declaration");
    return d;
  }

  Type type_atom() {
    const Token& t = peek();
    if (t.kind == Tok::LParen) {
      next();
      Type ty = type_expr();
      expect(Tok::RParen, "')'");
      return ty;
    }
    if (t.kind == Tok::Ident && t.text == "i") {
      next();
      return Type::iota();
    }
    if (t.kind == Tok::Ident && t.text == "o") {
      next();
      return Type::boolean();
    }
    fail("expected a type, found " + describe(t));
  }

  SurfaceClause clause() {
    SurfaceClause c;
    Token h = peek();
    if (h.kind == Tok::Exists || h.kind == Tok::True || h.kind == Tok::False)
      throw SyntaxError("reserved word '" + h.text + "' cannot head a clause", h.span);
    if (h.kind != Tok::Ident) fail("expected a clause head, found " + describe(h));
    c.span = h.span;
    if (peek(1).kind == Tok::Arrow) {
      next();
      next();
      c.core = true;
      c.name = h.text;
      c.core_body = expr();
      expect(Tok::Dot, "'.' at the end of the clause");
      return c;
    }
    SExprP head = atom();
    if (head->kind == SExpr::Kind::Name) {
      c.name = head->name;
    } else if (head->kind == SExpr::Kind::Apply && head->kids[0]->kind == SExpr::Kind::Name) {
      c.name = head->kids[0]->name;
      c.args.assign(head->kids.begin() + 1, head->kids.end());
    } else {
      throw SyntaxError("clause head must be a predicate name or an application of one", head->span);
    }
    if (peek().kind == Tok::If) {
      next();
      c.body = items();
    }
    expect(Tok::Dot, "'.' at the end of the clause");
    return c;
  }

  std::vector<SExprP> items() {
    std::vector<SExprP> out{expr()};
    while (peek().kind == Tok::Comma) {
      next();
      out.push_back(expr());
    }
    return out;
  }

  // expr := binder | or
  SExprP expr() {
    if (peek().kind == Tok::Lambda || peek().kind == Tok::Exists) return binder();
    return disjunction();
  }

  SExprP binder() {
    Token b = next();
    Token v = expect(Tok::Var, "a variable after " + describe(b));
    if (b.kind == Tok::Lambda) expect(Tok::Dot, "'.' after the lambda binder");
    SExprP body = expr();
    auto e = SExpr::make(b.kind == Tok::Lambda ? SExpr::Kind::Lambda : SExpr::Kind::Exists, v.text, {body},
                         join(b.span, body->span));
    e->binder_span = v.span;
    return e;
  }

  SExprP rhs(SExprP (Parser::*level)()) {
    if (peek().kind == Tok::Lambda || peek().kind == Tok::Exists) return binder();
    return (this->*level)();
  }

  SExprP disjunction() {
    SExprP l = conjunction();
    if (peek().kind == Tok::Or) {
      next();
      SExprP r = rhs(&Parser::disjunction);
      return SExpr::make(SExpr::Kind::Or, "", {l, r}, join(l->span, r->span));
    }
    return l;
  }

  SExprP conjunction() {
    SExprP l = equation();
    if (peek().kind == Tok::And) {
      next();
      SExprP r = rhs(&Parser::conjunction);
      return SExpr::make(SExpr::Kind::And, "", {l, r}, join(l->span, r->span));
    }
    return l;
  }

  SExprP equation() {
    SExprP l = application();
    if (peek().kind == Tok::Eq) {
      next();
      SExprP r = application();
      return SExpr::make(SExpr::Kind::Eq, "", {l, r}, join(l->span, r->span));
    }
    return l;
  }

  bool starts_atom() const {
    switch (peek().kind) {
      case Tok::Var:
      case Tok::Ident:
      case Tok::LParen:
      case Tok::LBrack:
      case Tok::True:
      case Tok::False:
        return true;
      default:
        return false;
    }
  }

  SExprP application() {
    SExprP h = atom();
    if (!starts_atom()) return h;
    std::vector<SExprP> ks{h};
    while (starts_atom()) ks.push_back(atom());
    Span sp = join(h->span, ks.back()->span);
    return SExpr::make(SExpr::Kind::Apply, "", std::move(ks), sp);
  }

  SExprP atom() {
    Token t = peek();
    switch (t.kind) {
      case Tok::Var:
      case Tok::Ident: {
        next();
        SExprP e = SExpr::make(t.kind == Tok::Var ? SExpr::Kind::Var : SExpr::Kind::Name, t.text, {}, t.span);
        if (peek().kind == Tok::LParen && !peek().spaced) {
          next();
          std::vector<SExprP> ks{e};
          if (peek().kind == Tok::RParen) fail("empty argument list");
          ks.push_back(expr());
          while (peek().kind == Tok::Comma) {
            next();
            ks.push_back(expr());
          }
          Token r = expect(Tok::RParen, "')' or ','");
          return SExpr::make(SExpr::Kind::Apply, "", std::move(ks), join(t.span, r.span));
        }
        return e;
      }
      case Tok::LParen: {
        next();
        SExprP e = expr();
        expect(Tok::RParen, "')'");
        return e;
      }
      case Tok::LBrack:
        return list();
      case Tok::True:
        next();
        return SExpr::make(SExpr::Kind::True, "", {}, t.span);
      case Tok::False:
        next();
        return SExpr::make(SExpr::Kind::False, "", {}, t.span);
      case Tok::Exists:
        throw SyntaxError("'exists' must be followed by a variable and a body", t.span);
      default:
        fail("expected an expression, found " + describe(t));
    }
  }

  SExprP list() {
    Token open = expect(Tok::LBrack, "'['");
    std::vector<SExprP> elems;
    SExprP tail;
    if (peek().kind != Tok::RBrack) {
      elems.push_back(expr());
      while (peek().kind == Tok::Comma) {
        next();
        elems.push_back(expr());
      }
      if (peek().kind == Tok::Bar) {
        next();
        tail = expr();
      }
    }
    Token close = expect(Tok::RBrack, "']'");
    Span sp = join(open.span, close.span);
    SExprP cur = tail ? tail : SExpr::make(SExpr::Kind::Name, "nil", {}, close.span);
    for (auto it = elems.rbegin(); it != elems.rend(); ++it) {
      SExprP cons = SExpr::make(SExpr::Kind::Name, "cons", {}, (*it)->span);
      cur = SExpr::make(SExpr::Kind::Apply, "", {cons, *it, cur}, sp);
    }
    return cur;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses a program text: type declarations, sugared and core clauses, and
/// embedded queries.
inline SourceProgram parse(const std::string& text) {
  detail::Parser p(text);
  return p.program(text);
}

inline SurfaceQuery parse_query_text(const std::string& text) {
  detail::Parser p(text);
  return p.bare_query();
}

inline SExprP parse_expression(const std::string& text) {
  detail::Parser p(text);
  return p.expression();
}

inline Type parse_type(const std::string& text) {
  detail::Parser p(text);
  return p.type_expr();
}

}  // namespace hopl
