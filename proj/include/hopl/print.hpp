#pragma once

#include <string>
#include <vector>

#include "hopl/expr.hpp"

namespace hopl {

namespace detail {

// Precedence levels, loosest first.
enum Prec : int { kTop = -1, kBinder = 0, kOr = 1, kAnd = 2, kEq = 3, kApp = 4, kAtom = 5 };

inline void print_term(const Expr& e, std::string& out);

inline void print_list(const Expr& e, std::string& out) {
  out += '[';
  Expr cur = e;
  bool first = true;
  while (cur.is(ExprKind::FunApp) && cur.name() == "cons" && cur.kids().size() == 2) {
    if (!first) out += ',';
    first = false;
    print_term(cur.kids()[0], out);
    cur = cur.kids()[1];
  }
  if (!(cur.is(ExprKind::IndConst) && cur.name() == "nil")) {
    out += '|';
    print_term(cur, out);
  }
  out += ']';
}

inline void print_term(const Expr& e, std::string& out) {
  switch (e.kind()) {
    case ExprKind::IndConst:
      out += e.name() == "nil" ? "[]" : e.name();
      return;
    case ExprKind::Var:
      out += e.var().name;
      return;
    case ExprKind::FunApp:
      if (e.name() == "cons" && e.kids().size() == 2) {
        print_list(e, out);
        return;
      }
      out += e.name();
      out += '(';
      for (std::size_t i = 0; i < e.kids().size(); ++i) {
        if (i) out += ',';
        print_term(e.kids()[i], out);
      }
      out += ')';
      return;
    default:
      out += "<non-term>";
  }
}

inline void print(const Expr& e, int ctx, std::string& out) {
  auto open = [&](bool p) {
    if (p) out += '(';
  };
  auto close = [&](bool p) {
    if (p) out += ')';
  };
  switch (e.kind()) {
    case ExprKind::Prop:
      out += e.value() ? "true" : "false";
      return;
    case ExprKind::IndConst:
    case ExprKind::FunApp:
      print_term(e, out);
      return;
    case ExprKind::PredConst:
      out += e.name();
      return;
    case ExprKind::Var:
      out += e.var().name;
      return;
    case ExprKind::Eq: {
      bool p = ctx != kTop;
      open(p);
      print_term(e.left(), out);
      out += " = ";
      print_term(e.right(), out);
      close(p);
      return;
    }
    case ExprKind::Lambda: {
      bool p = ctx > kBinder;
      open(p);
      out += '\\';
      out += e.var().name;
      out += '.';
      print(e.body(), kBinder, out);
      close(p);
      return;
    }
    case ExprKind::Exists: {
      bool p = ctx > kBinder;
      open(p);
      out += "exists ";
      out += e.var().name;
      out += ' ';
      const Expr& b = e.body();
      bool bp = b.is(ExprKind::And) || b.is(ExprKind::Or);
      open(bp);
      print(b, bp ? kTop : kBinder, out);
      close(bp);
      close(p);
      return;
    }
    case ExprKind::Or:
    case ExprKind::And: {
      const bool is_or = e.is(ExprKind::Or);
      const int self = is_or ? kOr : kAnd;
      bool p = ctx > self;
      open(p);
      const Expr& l = e.left();
      const Expr& r = e.right();
      auto operand = [&](const Expr& x, int level) {
        bool lp = x.is(ExprKind::Lambda) || x.is(ExprKind::Exists);
        open(lp);
        print(x, lp ? kTop : level, out);
        close(lp);
      };
      operand(l, self + 1);
      out += is_or ? " \\/ " : " /\\ ";
      operand(r, self);
      close(p);
      return;
    }
    case ExprKind::App: {
      bool p = ctx > kApp;
      open(p);
      Spine s = spine(e);
      print(s.head, kAtom, out);
      for (const auto& a : s.args) {
        out += ' ';
        print(a, kAtom, out);
      }
      close(p);
      return;
    }
  }
}

}  // namespace detail

/// Core ASCII syntax, re-readable by the parser.
inline std::string to_string(const Expr& e) {
  std::string out;
  detail::print(e, detail::kTop, out);
  return out;
}

inline std::string to_string(const Var& v) { return v.name; }

namespace detail {

inline void canon(const Expr& e, std::vector<const Var*>& env, std::string& out) {
  switch (e.kind()) {
    case ExprKind::Prop:
      out += e.value() ? "1" : "0";
      return;
    case ExprKind::IndConst:
      out += "c:" + e.name();
      return;
    case ExprKind::PredConst:
      out += "p:" + e.name();
      return;
    case ExprKind::Var: {
      int i = binder_index(env, e.var());
      if (i >= 0) out += "#" + std::to_string(env.size() - static_cast<std::size_t>(i));
      else out += "v:" + e.var().name + ":" + e.var().type.str();
      return;
    }
    case ExprKind::Lambda:
    case ExprKind::Exists:
      out += e.is(ExprKind::Lambda) ? "(L " : "(E ";
      out += e.var().type.str();
      out += ' ';
      env.push_back(&e.var());
      canon(e.body(), env, out);
      env.pop_back();
      out += ')';
      return;
    default:
      break;
  }
  static const char* tags[] = {"", "", "", "", "F", "A", "", "O", "N", "Q", ""};
  out += '(';
  out += tags[static_cast<int>(e.kind())];
  if (e.is(ExprKind::FunApp)) out += ":" + e.name();
  for (const auto& k : e.kids()) {
    out += ' ';
    canon(k, env, out);
  }
  out += ')';
}

}  // namespace detail

/// A string that is equal for two expressions iff they are alpha-equal.
inline std::string canonical_key(const Expr& e) {
  std::string out;
  std::vector<const Var*> env;
  detail::canon(e, env, out);
  return out;
}

}  // namespace hopl
