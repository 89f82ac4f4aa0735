#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "hopl/expr.hpp"
#include "hopl/parser.hpp"
#include "hopl/program.hpp"

namespace hopl {

// ---------------------------------------------------------------------------
// Desugaring of Prolog-style clauses into core form.

namespace detail {

inline void surface_vars(const SExprP& e, std::vector<std::string>& bound, std::vector<std::string>& out,
                         std::set<std::string>& seen) {
  switch (e->kind) {
    case SExpr::Kind::Var:
      if (std::find(bound.begin(), bound.end(), e->name) == bound.end() && seen.insert(e->name).second)
        out.push_back(e->name);
      return;
    case SExpr::Kind::Lambda:
    case SExpr::Kind::Exists:
      bound.push_back(e->name);
      surface_vars(e->kids[0], bound, out, seen);
      bound.pop_back();
      return;
    default:
      for (const auto& k : e->kids) surface_vars(k, bound, out, seen);
  }
}

/// Free variables of surface expressions, in order of first occurrence.
inline std::vector<std::string> surface_free_vars(const std::vector<SExprP>& es) {
  std::vector<std::string> bound, out;
  std::set<std::string> seen;
  for (const auto& e : es) surface_vars(e, bound, out, seen);
  return out;
}

inline void all_surface_names(const SExprP& e, std::set<std::string>& out) {
  if (e->kind == SExpr::Kind::Var || e->kind == SExpr::Kind::Lambda || e->kind == SExpr::Kind::Exists)
    out.insert(e->name);
  for (const auto& k : e->kids) all_surface_names(k, out);
}

/// Gives every anonymous `_` its own name.
inline SExprP rename_anonymous(const SExprP& e, std::set<std::string>& used) {
  if (e->kind == SExpr::Kind::Var && e->name == "_") {
    auto c = std::make_shared<SExpr>(*e);
    c->name = fresh_name("_", [&](const std::string& s) { return used.count(s) > 0; });
    used.insert(c->name);
    return c;
  }
  if (e->kids.empty()) return e;
  auto c = std::make_shared<SExpr>(*e);
  for (auto& k : c->kids) k = rename_anonymous(k, used);
  return c;
}

inline SExprP conj_all(const std::vector<SExprP>& items, Span sp) {
  if (items.empty()) return SExpr::make(SExpr::Kind::True, "", {}, sp);
  SExprP cur = items.back();
  for (std::size_t i = items.size() - 1; i-- > 0;)
    cur = SExpr::make(SExpr::Kind::And, "", {items[i], cur}, items[i]->span);
  return cur;
}

inline SExprP wrap_exists(const std::vector<std::string>& vs, SExprP body) {
  for (auto it = vs.rbegin(); it != vs.rend(); ++it) {
    Span sp = body->span;
    body = SExpr::make(SExpr::Kind::Exists, *it, {body}, sp);
  }
  return body;
}

}  // namespace detail

/// Core body of a clause: distinct variable head arguments become binders,
/// other head arguments are bound to fresh binders by equations, and the
/// remaining variables are existentially quantified.
inline SExprP desugar(const SurfaceClause& c) {
  if (c.core) return c.core_body;
  std::set<std::string> used;
  for (const auto& a : c.args) detail::all_surface_names(a, used);
  for (const auto& b : c.body) detail::all_surface_names(b, used);
  std::vector<SExprP> args, body;
  for (const auto& a : c.args) args.push_back(detail::rename_anonymous(a, used));
  for (const auto& b : c.body) body.push_back(detail::rename_anonymous(b, used));

  std::vector<std::string> binders;
  std::vector<Span> binder_spans;
  std::vector<SExprP> items;
  for (const auto& a : args) {
    if (a->kind == SExpr::Kind::Var && std::find(binders.begin(), binders.end(), a->name) == binders.end()) {
      binders.push_back(a->name);
      binder_spans.push_back(a->span);
      continue;
    }
    std::string v = fresh_name("V", [&](const std::string& s) { return used.count(s) > 0; });
    used.insert(v);
    binders.push_back(v);
    binder_spans.push_back(a->span);
    auto eq = SExpr::make(SExpr::Kind::Eq, "", {SExpr::make(SExpr::Kind::Var, v, {}, a->span), a}, a->span);
    eq->head_arg = true;
    items.push_back(eq);
  }
  items.insert(items.end(), body.begin(), body.end());
  SExprP core = detail::conj_all(items, c.span);
  std::vector<std::string> locals;
  for (const auto& v : detail::surface_free_vars({core}))
    if (std::find(binders.begin(), binders.end(), v) == binders.end()) locals.push_back(v);
  core = detail::wrap_exists(locals, core);
  for (std::size_t i = binders.size(); i-- > 0;) {
    auto l = SExpr::make(SExpr::Kind::Lambda, binders[i], {core}, c.span);
    l->binder_span = binder_spans[i];
    core = l;
  }
  return core;
}

// ---------------------------------------------------------------------------
// Type inference.

namespace detail {

class TypeSolver {
 public:
  enum class K { Unknown, Iota, Bool, Arrow };
  struct Node {
    K k = K::Unknown;
    int a = -1, r = -1;
    int parent = -1;
    Span origin;
  };

  int fresh(Span sp) {
    Node n;
    n.origin = sp;
    n.parent = static_cast<int>(ns_.size());
    ns_.push_back(n);
    return n.parent;
  }
  int iota(Span sp = {}) {
    int x = fresh(sp);
    ns_[static_cast<std::size_t>(x)].k = K::Iota;
    return x;
  }
  int boolean(Span sp = {}) {
    int x = fresh(sp);
    ns_[static_cast<std::size_t>(x)].k = K::Bool;
    return x;
  }
  int arrow(int a, int r, Span sp = {}) {
    int x = fresh(sp);
    auto& n = ns_[static_cast<std::size_t>(x)];
    n.k = K::Arrow;
    n.a = a;
    n.r = r;
    return x;
  }
  int from_type(const Type& t) {
    if (t.is_iota()) return iota();
    int cur = boolean();
    for (std::size_t i = t.args().size(); i-- > 0;) cur = arrow(from_type(t.args()[i]), cur);
    return cur;
  }
  int function_type(int arity) {
    int cur = iota();
    for (int i = 0; i < arity; ++i) cur = arrow(iota(), cur);
    return cur;
  }

  int find(int x) {
    while (ns_[static_cast<std::size_t>(x)].parent != x) {
      auto& p = ns_[static_cast<std::size_t>(x)].parent;
      p = ns_[static_cast<std::size_t>(p)].parent;
      x = p;
    }
    return x;
  }
  const Node& node(int x) { return ns_[static_cast<std::size_t>(find(x))]; }

  bool unify(int x, int y) {
    x = find(x);
    y = find(y);
    if (x == y) return true;
    Node& nx = ns_[static_cast<std::size_t>(x)];
    Node& ny = ns_[static_cast<std::size_t>(y)];
    if (nx.k == K::Unknown) {
      if (occurs(x, y)) return false;
      nx.parent = y;
      return true;
    }
    if (ny.k == K::Unknown) {
      if (occurs(y, x)) return false;
      ny.parent = x;
      return true;
    }
    if (nx.k != ny.k) return false;
    if (nx.k != K::Arrow) {
      nx.parent = y;
      return true;
    }
    int xa = nx.a, xr = nx.r, ya = ny.a, yr = ny.r;
    nx.parent = y;
    return unify(xa, ya) && unify(xr, yr);
  }

  /// Final result of an arrow chain.
  int result(int x) {
    x = find(x);
    while (node(x).k == K::Arrow) x = find(node(x).r);
    return x;
  }

  std::string str(int x, int depth = 0) {
    x = find(x);
    const Node& n = node(x);
    switch (n.k) {
      case K::Unknown:
        return "?";
      case K::Iota:
        return "i";
      case K::Bool:
        return "o";
      case K::Arrow: {
        if (depth > 32) return "...";
        std::string a = str(n.a, depth + 1);
        if (node(n.a).k == K::Arrow) a = "(" + a + ")";
        return a + "->" + str(n.r, depth + 1);
      }
    }
    return "?";
  }

  bool unknown_inside(int x) {
    x = find(x);
    const Node& n = node(x);
    if (n.k == K::Unknown) return true;
    if (n.k == K::Arrow) return unknown_inside(n.a) || unknown_inside(n.r);
    return false;
  }

  /// Replaces every unknown in x by i.
  void default_iota(int x) {
    x = find(x);
    Node& n = ns_[static_cast<std::size_t>(x)];
    if (n.k == K::Unknown) {
      n.k = K::Iota;
      return;
    }
    if (n.k == K::Arrow) {
      int a = n.a, r = n.r;
      default_iota(a);
      default_iota(r);
    }
  }

  /// Converts a solved argument or predicate type.
  std::optional<Type> to_type(int x) {
    x = find(x);
    const Node& n = node(x);
    switch (n.k) {
      case K::Iota:
        return Type::iota();
      case K::Bool:
        return Type::boolean();
      case K::Arrow: {
        auto a = to_type(n.a);
        auto r = to_type(n.r);
        if (!a || !r || !a->is_argument() || !r->is_predicate()) return std::nullopt;
        return Type::arrow(*a, *r);
      }
      default:
        return std::nullopt;
    }
  }

  /// Arity n when x is i^n -> i with n >= 1.
  int function_arity(int x) {
    int n = 0;
    x = find(x);
    while (node(x).k == K::Arrow) {
      if (node(node(x).a).k != K::Iota) return -1;
      ++n;
      x = find(node(x).r);
    }
    return node(x).k == K::Iota && n > 0 ? n : -1;
  }

 private:
  bool occurs(int v, int t) {
    t = find(t);
    if (t == v) return true;
    const Node& n = ns_[static_cast<std::size_t>(t)];
    if (n.k == K::Arrow) return occurs(v, n.a) || occurs(v, n.r);
    return false;
  }

  std::vector<Node> ns_;
};

/// Whole-program (or query) inference state.
class Typer {
 public:
  TypeSolver ts;
  std::vector<Diagnostic> diags;

  struct NameInfo {
    int node = -1;
    Span first;
    bool fixed = false;  // comes from an already typed program
    std::vector<std::pair<int, Span>> uses;  // number of call arguments, location
  };
  std::map<std::string, NameInfo> names;
  std::unordered_map<const SExpr*, int> node_of;     // type of each node
  std::vector<int> lambda_bodies;
  std::unordered_map<const SExpr*, int> binder_of;   // binder type of Lambda/Exists
  struct VarInfo {
    std::string name;
    int node;
    Span span;
  };
  std::vector<VarInfo> vars;  // every binder and free variable introduced

  struct Deferred {
    const SExpr* eq;
  };
  std::vector<Deferred> deferred;

  void error(const std::string& kind, const std::string& msg, Span sp) {
    diags.push_back(Diagnostic{Diagnostic::Severity::Error, kind, msg, sp});
  }
  bool has_errors() const {
    for (const auto& d : diags)
      if (d.severity == Diagnostic::Severity::Error) return true;
    return false;
  }

  NameInfo& name(const std::string& n, Span sp) {
    auto it = names.find(n);
    if (it != names.end()) return it->second;
    NameInfo& ni = names[n];
    ni.node = ts.fresh(sp);
    ni.first = sp;
    return ni;
  }

  void expect(int x, int y, Span where, const std::string& what, Span other = {}) {
    if (ts.unify(x, y)) return;
    std::string msg = "type mismatch in " + what + ": " + ts.str(x) + " vs " + ts.str(y);
    if (other.line) msg += " (conflicting use at " + other.str() + ")";
    error("type", msg, where);
  }

  using Env = std::vector<std::pair<std::string, int>>;

  int lookup(const Env& env, const std::string& n) {
    for (auto it = env.rbegin(); it != env.rend(); ++it)
      if (it->first == n) return it->second;
    return -1;
  }

  /// Free variables are looked up in (and added to) `free` when non-null;
  /// otherwise they are errors.
  int infer(const SExprP& e, Env& env, std::map<std::string, int>* free) {
    int t = infer_node(e, env, free);
    node_of[e.get()] = t;
    return t;
  }

  int infer_node(const SExprP& e, Env& env, std::map<std::string, int>* free) {
    switch (e->kind) {
      case SExpr::Kind::Var: {
        int t = lookup(env, e->name);
        if (t >= 0) return t;
        if (free) {
          auto it = free->find(e->name);
          if (it != free->end()) return it->second;
          int n = ts.fresh(e->span);
          free->emplace(e->name, n);
          vars.push_back({e->name, n, e->span});
          return n;
        }
        error("scope", "variable " + e->name + " is not bound in the clause body", e->span);
        return ts.fresh(e->span);
      }
      case SExpr::Kind::Name: {
        NameInfo& ni = name(e->name, e->span);
        ni.uses.emplace_back(0, e->span);
        return ni.node;
      }
      case SExpr::Kind::Apply: {
        const SExprP& h = e->kids[0];
        int t;
        if (h->kind == SExpr::Kind::Name) {
          NameInfo& ni = name(h->name, h->span);
          ni.uses.emplace_back(static_cast<int>(e->kids.size()) - 1, h->span);
          t = ni.node;
          node_of[h.get()] = t;
        } else {
          t = infer(h, env, free);
        }
        for (std::size_t i = 1; i < e->kids.size(); ++i) {
          int a = infer(e->kids[i], env, free);
          int r = ts.fresh(e->span);
          if (!ts.unify(t, ts.arrow(a, r))) {
            std::string what = ts.node(t).k == TypeSolver::K::Arrow ? "argument " + std::to_string(i) + " of an application"
                                                                     : "application";
            error("type",
                  "type mismatch in " + what + ": cannot apply an expression of type " + ts.str(t) +
                      " to an argument of type " + ts.str(a) + " (argument at " + e->kids[i]->span.str() + ")",
                  h->span);
          }
          t = r;
        }
        return t;
      }
      case SExpr::Kind::Eq: {
        int l = infer(e->kids[0], env, free);
        int r = infer(e->kids[1], env, free);
        if (e->head_arg) {
          deferred.push_back({e.get()});
        } else {
          expect(l, ts.iota(), e->kids[0]->span, "the left side of '='");
          expect(r, ts.iota(), e->kids[1]->span, "the right side of '='");
        }
        return ts.boolean();
      }
      case SExpr::Kind::And:
      case SExpr::Kind::Or: {
        int l = infer(e->kids[0], env, free);
        int r = infer(e->kids[1], env, free);
        expect(l, r, e->kids[1]->span, e->kind == SExpr::Kind::And ? "'/\\'" : "'\\/'", e->kids[0]->span);
        return l;
      }
      case SExpr::Kind::Lambda:
      case SExpr::Kind::Exists: {
        int v = ts.fresh(e->binder_span.line ? e->binder_span : e->span);
        binder_of[e.get()] = v;
        vars.push_back({e->name, v, e->binder_span.line ? e->binder_span : e->span});
        env.emplace_back(e->name, v);
        int b = infer(e->kids[0], env, free);
        env.pop_back();
        if (e->kind == SExpr::Kind::Exists) {
          expect(b, ts.boolean(), e->kids[0]->span, "the body of 'exists'");
          return ts.boolean();
        }
        lambda_bodies.push_back(b);
        return ts.arrow(v, b);
      }
      case SExpr::Kind::True:
      case SExpr::Kind::False:
        return ts.boolean();
    }
    return ts.fresh(e->span);
  }

  void solve_deferred() {
    for (const auto& d : deferred) {
      const SExpr* eq = d.eq;
      int l = node_of.at(eq->kids[0].get());
      int r = node_of.at(eq->kids[1].get());
      std::string lt = ts.str(l), rt = ts.str(r);
      bool ok = ts.unify(l, ts.iota()) && ts.unify(r, ts.iota());
      if (!ok) {
        std::string arg = eq->kids[1]->kind == SExpr::Kind::Var ? "repeated variable " + eq->kids[1]->name
                                                               : "non-variable argument";
        error("extensionality",
              "predicate-typed head argument must be a distinct variable; found a " + arg + " of type " +
                  (lt != "i" && lt != "?" ? lt : rt),
              eq->kids[1]->span);
      }
    }
    deferred.clear();
  }

  /// Least committal completion: the final result of a variable's type is
  /// o, every other unknown is i. Each default is reported as a note.
  void apply_defaults() {
    // A lambda body has a predicate type, so an undetermined result is o.
    for (int b : lambda_bodies) {
      int res = ts.result(b);
      if (ts.node(res).k == TypeSolver::K::Unknown) ts.unify(res, ts.boolean());
    }
    for (const auto& v : vars) {
      if (!ts.unknown_inside(v.node)) continue;
      int res = ts.result(v.node);
      bool applied = ts.node(v.node).k == TypeSolver::K::Arrow;
      if (applied && ts.node(res).k == TypeSolver::K::Unknown) ts.unify(res, ts.boolean());
      if (ts.unknown_inside(v.node)) ts.default_iota(v.node);
      diags.push_back(Diagnostic{Diagnostic::Severity::Note, "default",
                                 "type of variable " + v.name + " is not determined; using " + ts.str(v.node), v.span});
    }
    for (auto& [n, ni] : names) {
      if (!ts.unknown_inside(ni.node)) continue;
      ts.default_iota(ni.node);
      diags.push_back(Diagnostic{Diagnostic::Severity::Note, "default",
                                 "type of " + n + " is not determined; using " + ts.str(ni.node), ni.first});
    }
  }

  enum class NameKind { Constant, Function, Predicate, Invalid };

  NameKind classify(const std::string& n, NameInfo& ni, int* arity, std::optional<Type>* type) {
    const auto& node = ts.node(ni.node);
    if (node.k == TypeSolver::K::Iota) return NameKind::Constant;
    int fa = ts.function_arity(ni.node);
    if (fa > 0) {
      *arity = fa;
      for (const auto& [k, sp] : ni.uses)
        if (k != fa) {
          error("type", "function symbol " + n + "/" + std::to_string(fa) + " used with " + std::to_string(k) + " argument(s)",
                sp);
          return NameKind::Invalid;
        }
      return NameKind::Function;
    }
    auto t = ts.to_type(ni.node);
    if (t && t->is_predicate()) {
      *type = t;
      return NameKind::Predicate;
    }
    error("type", n + " has type " + ts.str(ni.node) + ", which is neither i, i^n->i, nor a predicate type", ni.first);
    return NameKind::Invalid;
  }

  void check_vars() {
    for (const auto& v : vars) {
      auto t = ts.to_type(v.node);
      if (!t) error("type", "variable " + v.name + " has type " + ts.str(v.node) + ", which is not an argument type", v.span);
    }
  }

  // --- conversion to typed expressions ---

  std::map<std::string, NameKind> kinds;
  std::map<std::string, Type> pred_types;

  Type var_type(int node) {
    auto t = ts.to_type(node);
    if (!t) throw TypeError("unresolved variable type");
    return *t;
  }

  Expr convert(const SExprP& e, std::vector<std::pair<std::string, Var>>& env,
               const std::map<std::string, int>* free) {
    switch (e->kind) {
      case SExpr::Kind::Var: {
        for (auto it = env.rbegin(); it != env.rend(); ++it)
          if (it->first == e->name) return Expr::var(it->second);
        return Expr::var(Var{e->name, var_type(free->at(e->name))});
      }
      case SExpr::Kind::Name:
        return name_expr(e->name);
      case SExpr::Kind::Apply: {
        const SExprP& h = e->kids[0];
        std::vector<Expr> args;
        for (std::size_t i = 1; i < e->kids.size(); ++i) args.push_back(convert(e->kids[i], env, free));
        if (h->kind == SExpr::Kind::Name && kinds.at(h->name) == NameKind::Function) return Expr::fun_app(h->name, args);
        return Expr::apps(convert(h, env, free), args);
      }
      case SExpr::Kind::Eq:
        return Expr::eq(convert(e->kids[0], env, free), convert(e->kids[1], env, free));
      case SExpr::Kind::And:
        return Expr::conj(convert(e->kids[0], env, free), convert(e->kids[1], env, free));
      case SExpr::Kind::Or:
        return Expr::disj(convert(e->kids[0], env, free), convert(e->kids[1], env, free));
      case SExpr::Kind::Lambda:
      case SExpr::Kind::Exists: {
        Var v{e->name, var_type(binder_of.at(e.get()))};
        env.emplace_back(e->name, v);
        Expr b = convert(e->kids[0], env, free);
        env.pop_back();
        return e->kind == SExpr::Kind::Lambda ? Expr::lambda(v, b) : Expr::exists(v, b);
      }
      case SExpr::Kind::True:
        return Expr::top();
      case SExpr::Kind::False:
        return Expr::bottom();
    }
    throw TypeError("unknown surface node");
  }

  Expr name_expr(const std::string& n) {
    switch (kinds.at(n)) {
      case NameKind::Constant:
        return Expr::ind_const(n);
      case NameKind::Predicate:
        return Expr::pred_const(n, pred_types.at(n));
      default:
        throw TypeError("function symbol " + n + " used without arguments");
    }
  }

  /// Classifies every name and fills the signature.
  void finish_names(Signature& sig) {
    for (auto& [n, ni] : names) {
      int arity = 0;
      std::optional<Type> t;
      NameKind k = classify(n, ni, &arity, &t);
      kinds[n] = k;
      if (k == NameKind::Constant) sig.constants.insert(n);
      else if (k == NameKind::Function) sig.functions[n] = arity;
      else if (k == NameKind::Predicate) {
        pred_types[n] = *t;
        sig.predicates[n] = *t;
      }
    }
  }

  [[noreturn]] void raise() {
    std::vector<Diagnostic> errs;
    for (const auto& d : diags)
      if (d.severity == Diagnostic::Severity::Error) errs.push_back(d);
    throw FrontendError(std::move(errs));
  }
};

inline bool reserved_name(const std::string& n) { return n == "exists" || n == "true" || n == "false"; }

}  // namespace detail

// ---------------------------------------------------------------------------
// Loading programs and queries.

struct LoadResult {
  Program program;
  std::vector<Diagnostic> notes;
  std::vector<SurfaceQuery> queries;
  std::vector<std::string> query_texts;
};

/// Type checks and builds a program from parsed sources. Throws
/// FrontendError with every diagnostic found.
inline LoadResult build_program(const std::vector<SourceProgram>& sources) {
  detail::Typer ty;
  struct Pending {
    const SurfaceClause* clause;
    SExprP body;
    int type;
  };
  std::vector<Pending> pending;
  for (const auto& src : sources) {
    for (const auto& d : src.decls) {
      auto& ni = ty.name(d.name, d.span);
      ty.expect(ni.node, ty.ts.from_type(d.type), d.span, "the declaration of " + d.name, ni.first);
    }
  }
  for (const auto& src : sources) {
    for (const auto& c : src.clauses) {
      SExprP body = desugar(c);
      detail::Typer::Env env;
      int bt = ty.infer(body, env, nullptr);
      auto& ni = ty.name(c.name, c.span);
      ni.uses.emplace_back(-1, c.span);
      ty.expect(ni.node, bt, c.span, "the clauses for " + c.name, ni.first);
      pending.push_back({&c, body, bt});
    }
  }
  // Clause heads are predicates: their types end in o.
  for (const auto& p : pending) {
    int res = ty.ts.result(p.type);
    if (ty.ts.node(res).k == detail::TypeSolver::K::Unknown) ty.ts.unify(res, ty.ts.boolean());
  }
  ty.solve_deferred();
  if (ty.has_errors()) ty.raise();
  ty.apply_defaults();
  // A clause head fixes its name as a predicate; treat head uses as any arity.
  for (auto& [n, ni] : ty.names) {
    std::vector<std::pair<int, Span>> uses;
    for (const auto& u : ni.uses)
      if (u.first >= 0) uses.push_back(u);
    ni.uses = uses;
  }
  ty.check_vars();
  Program prog;
  ty.finish_names(prog.signature);
  for (const auto& p : pending) {
    if (ty.kinds[p.clause->name] != detail::Typer::NameKind::Predicate)
      ty.error("type", p.clause->name + " heads a clause but is not a predicate", p.clause->span);
  }
  if (ty.has_errors()) ty.raise();
  for (const auto& p : pending) {
    std::vector<std::pair<std::string, Var>> env;
    Clause c;
    c.head = p.clause->name;
    c.type = ty.pred_types.at(c.head);
    c.body = ty.convert(p.body, env, nullptr);
    c.span = p.clause->span;
    prog.add(std::move(c));
  }
  prog.complete();
  LoadResult res;
  res.program = std::move(prog);
  for (const auto& d : ty.diags)
    if (d.severity == Diagnostic::Severity::Note) res.notes.push_back(d);
  for (const auto& src : sources)
    for (const auto& q : src.queries) {
      res.queries.push_back(q);
      res.query_texts.push_back(q.text);
    }
  return res;
}

inline LoadResult load_program(const std::string& text) { return build_program({parse(text)}); }

/// Desugared surface body of a query: items joined by conjunction, with
/// underscore variables existentially quantified.
inline SExprP desugar_query(const SurfaceQuery& q, std::vector<std::string>* free_out) {
  std::set<std::string> used;
  std::vector<SExprP> items;
  for (const auto& b : q.body) detail::all_surface_names(b, used);
  for (const auto& b : q.body) items.push_back(detail::rename_anonymous(b, used));
  SExprP body = detail::conj_all(items, q.span);
  std::vector<std::string> hidden, shown;
  for (const auto& v : detail::surface_free_vars({body})) (v[0] == '_' ? hidden : shown).push_back(v);
  if (free_out) *free_out = shown;
  return detail::wrap_exists(hidden, body);
}

/// Types a query against a program. Predicate constants first seen in the
/// query are added to the program with the empty relation as meaning;
/// new individual constants and function symbols join the signature.
inline Goal build_query(Program& prog, const SurfaceQuery& q, std::vector<Diagnostic>* notes = nullptr) {
  detail::Typer ty;
  for (const auto& [n, t] : prog.signature.predicates) {
    auto& ni = ty.name(n, {});
    ni.node = ty.ts.from_type(t);
    ni.fixed = true;
  }
  for (const auto& n : prog.signature.constants) {
    auto& ni = ty.name(n, {});
    ni.node = ty.ts.iota();
    ni.fixed = true;
  }
  for (const auto& [n, a] : prog.signature.functions) {
    auto& ni = ty.name(n, {});
    ni.node = ty.ts.function_type(a);
    ni.fixed = true;
  }
  std::vector<std::string> shown;
  SExprP body = desugar_query(q, &shown);
  detail::Typer::Env env;
  std::map<std::string, int> free;
  int t = ty.infer(body, env, &free);
  ty.expect(t, ty.ts.boolean(), q.span, "the query (which must have type o)");
  if (ty.has_errors()) ty.raise();
  ty.apply_defaults();
  ty.check_vars();
  Signature sig;
  ty.finish_names(sig);
  if (ty.has_errors()) ty.raise();
  bool added = false;
  for (const auto& [n, pt] : sig.predicates) {
    if (!prog.signature.predicates.count(n)) {
      prog.signature.predicates[n] = pt;
      added = true;
    }
  }
  for (const auto& c : sig.constants) prog.signature.constants.insert(c);
  for (const auto& [f, a] : sig.functions) prog.signature.functions.emplace(f, a);
  if (added) prog.complete();
  std::vector<std::pair<std::string, Var>> cenv;
  Goal g;
  g.body = ty.convert(body, cenv, &free);
  for (const auto& n : shown) g.free.push_back(Var{n, ty.var_type(free.at(n))});
  if (notes)
    for (const auto& d : ty.diags)
      if (d.severity == Diagnostic::Severity::Note) notes->push_back(d);
  return g;
}

inline Goal load_query(Program& prog, const std::string& text, std::vector<Diagnostic>* notes = nullptr) {
  return build_query(prog, parse_query_text(text), notes);
}

/// Parses and types a closed or open core expression against a program;
/// free variables get inferred types.
inline Expr load_expression(Program& prog, const std::string& text) {
  SurfaceQuery q;
  q.body = {parse_expression(text)};
  detail::Typer ty;
  for (const auto& [n, t] : prog.signature.predicates) {
    auto& ni = ty.name(n, {});
    ni.node = ty.ts.from_type(t);
  }
  for (const auto& n : prog.signature.constants) ty.name(n, {}).node = ty.ts.iota();
  for (const auto& [n, a] : prog.signature.functions) ty.name(n, {}).node = ty.ts.function_type(a);
  detail::Typer::Env env;
  std::map<std::string, int> free;
  SExprP body = q.body[0];
  ty.infer(body, env, &free);
  if (ty.has_errors()) ty.raise();
  ty.apply_defaults();
  ty.check_vars();
  Signature sig;
  ty.finish_names(sig);
  if (ty.has_errors()) ty.raise();
  std::vector<std::pair<std::string, Var>> cenv;
  return ty.convert(body, cenv, &free);
}

}  // namespace hopl
