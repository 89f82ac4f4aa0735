#pragma once

#include <algorithm>
#include <cctype>
#include <functional>
#include <iterator>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hopl/type.hpp"

namespace hopl {

/// Raised when a constructor is asked to build an ill-typed expression.
class TypeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A variable is a name together with its type; `X:i` and `X:i->o` are
/// different variables.
struct Var {
  std::string name;
  Type type;

  bool is_individual() const { return type.is_iota(); }
  bool is_predicate() const { return type.is_predicate(); }

  friend bool operator==(const Var& a, const Var& b) { return a.type == b.type && a.name == b.name; }
  friend bool operator!=(const Var& a, const Var& b) { return !(a == b); }
  /// Individual variables sort before predicate variables, then by name.
  friend bool operator<(const Var& a, const Var& b) {
    const bool pa = a.is_predicate(), pb = b.is_predicate();
    if (pa != pb) return pb;
    if (a.name != b.name) return a.name < b.name;
    return a.type < b.type;
  }
};

using VarSet = std::set<Var>;

enum class ExprKind { Prop, IndConst, PredConst, Var, FunApp, App, Lambda, Or, And, Eq, Exists };

/// Immutable, shared, typed expression tree. Copies are cheap.
class Expr {
 public:
  Expr() = default;

  // --- constructors (each checks the formation rule it implements) ---

  static Expr prop(bool value) {
    static const Expr t = make(ExprKind::Prop, Type::boolean(), true, {}, {}, {});
    static const Expr f = make(ExprKind::Prop, Type::boolean(), false, {}, {}, {});
    return value ? t : f;
  }
  static Expr top() { return prop(true); }
  static Expr bottom() { return prop(false); }

  static Expr ind_const(std::string name) { return make(ExprKind::IndConst, Type::iota(), false, std::move(name), {}, {}); }

  static Expr pred_const(std::string name, Type type) {
    if (!type.is_predicate()) throw TypeError("predicate constant " + name + " needs a predicate type, got " + type.str());
    return make(ExprKind::PredConst, type, false, std::move(name), {}, {});
  }

  static Expr var(Var v) {
    if (!v.type.is_argument()) throw TypeError("variable " + v.name + " must have type i or a predicate type");
    Type t = v.type;
    return make(ExprKind::Var, t, false, {}, std::move(v), {});
  }
  static Expr var(std::string name, Type type) { return var(Var{std::move(name), type}); }

  static Expr fun_app(std::string symbol, std::vector<Expr> args) {
    if (args.empty()) throw TypeError("function symbol " + symbol + " applied to no arguments");
    for (const auto& a : args)
      if (!a.type().is_iota()) throw TypeError("argument of " + symbol + " must have type i, got " + a.type().str());
    return make(ExprKind::FunApp, Type::iota(), false, std::move(symbol), {}, std::move(args));
  }

  static Expr app(Expr fun, Expr arg) {
    const Type& ft = fun.type();
    if (!ft.is_predicate() || ft.arity() == 0)
      throw TypeError("cannot apply an expression of type " + ft.str());
    if (ft.args().front() != arg.type())
      throw TypeError("argument type " + arg.type().str() + " does not match " + ft.args().front().str());
    Type rt = ft.drop(1);
    return make(ExprKind::App, rt, false, {}, {}, {std::move(fun), std::move(arg)});
  }

  static Expr apps(Expr head, const std::vector<Expr>& args, std::size_t from = 0) {
    for (std::size_t i = from; i < args.size(); ++i) head = app(std::move(head), args[i]);
    return head;
  }

  static Expr lambda(Var v, Expr body) {
    if (!v.type.is_argument()) throw TypeError("lambda binder must have an argument type");
    if (!body.type().is_predicate()) throw TypeError("lambda body must have a predicate type, got " + body.type().str());
    Type t = Type::arrow(v.type, body.type());
    return make(ExprKind::Lambda, t, false, {}, std::move(v), {std::move(body)});
  }

  static Expr lambdas(const std::vector<Var>& vs, Expr body) {
    for (auto it = vs.rbegin(); it != vs.rend(); ++it) body = lambda(*it, std::move(body));
    return body;
  }

  static Expr disj(Expr l, Expr r) { return binop(ExprKind::Or, std::move(l), std::move(r)); }
  static Expr conj(Expr l, Expr r) { return binop(ExprKind::And, std::move(l), std::move(r)); }

  static Expr eq(Expr l, Expr r) {
    if (!l.type().is_iota() || !r.type().is_iota()) throw TypeError("both sides of = must have type i");
    return make(ExprKind::Eq, Type::boolean(), false, {}, {}, {std::move(l), std::move(r)});
  }

  static Expr exists(Var v, Expr body) {
    if (!v.type.is_argument()) throw TypeError("existential variable must have an argument type");
    if (!body.type().is_boolean()) throw TypeError("body of exists must have type o, got " + body.type().str());
    return make(ExprKind::Exists, Type::boolean(), false, {}, std::move(v), {std::move(body)});
  }

  // --- accessors ---

  bool valid() const { return static_cast<bool>(n_); }
  ExprKind kind() const { return n_->kind; }
  const Type& type() const { return n_->type; }
  const std::string& name() const { return n_->name; }
  const Var& var() const { return n_->var; }
  const std::vector<Expr>& kids() const { return n_->kids; }
  bool value() const { return n_->value; }

  const Expr& fun() const { return n_->kids[0]; }
  const Expr& arg() const { return n_->kids[1]; }
  const Expr& left() const { return n_->kids[0]; }
  const Expr& right() const { return n_->kids[1]; }
  const Expr& body() const { return n_->kids[0]; }

  bool is(ExprKind k) const { return n_->kind == k; }
  bool is_true() const { return is(ExprKind::Prop) && n_->value; }
  bool is_false() const { return is(ExprKind::Prop) && !n_->value; }
  bool is_var() const { return is(ExprKind::Var); }
  bool is_pred_var() const { return is_var() && n_->var.is_predicate(); }
  bool is_term() const { return n_->type.is_iota(); }

  /// Free variables in sorted order.
  const std::vector<Var>& free_vars() const { return n_->fv; }
  bool closed() const { return n_->fv.empty(); }
  bool has_free(const Var& v) const { return std::binary_search(n_->fv.begin(), n_->fv.end(), v); }
  std::size_t size() const { return n_->size; }

  const void* id() const { return n_.get(); }
  bool same_node(const Expr& o) const { return n_ == o.n_; }

 private:
  struct Node {
    ExprKind kind;
    Type type;
    bool value;
    std::string name;
    Var var;
    std::vector<Expr> kids;
    std::vector<Var> fv;
    std::size_t size;
  };

  static Expr binop(ExprKind k, Expr l, Expr r) {
    if (!l.type().is_predicate()) throw TypeError("operands of a union or intersection must have a predicate type");
    if (l.type() != r.type())
      throw TypeError("operand types differ: " + l.type().str() + " vs " + r.type().str());
    Type t = l.type();
    return make(k, t, false, {}, {}, {std::move(l), std::move(r)});
  }

  static Expr make(ExprKind k, Type t, bool value, std::string name, Var v, std::vector<Expr> kids) {
    auto node = std::make_shared<Node>();
    node->kind = k;
    node->type = t;
    node->value = value;
    node->name = std::move(name);
    node->var = std::move(v);
    node->kids = std::move(kids);
    node->size = 1;
    if (k == ExprKind::Var) {
      node->fv.push_back(node->var);
    } else {
      for (const auto& c : node->kids) {
        node->size += c.size();
        if (c.free_vars().empty()) continue;
        std::vector<Var> merged;
        merged.reserve(node->fv.size() + c.free_vars().size());
        std::set_union(node->fv.begin(), node->fv.end(), c.free_vars().begin(), c.free_vars().end(),
                       std::back_inserter(merged));
        node->fv = std::move(merged);
      }
      if (k == ExprKind::Lambda || k == ExprKind::Exists) {
        auto it = std::lower_bound(node->fv.begin(), node->fv.end(), node->var);
        if (it != node->fv.end() && *it == node->var) node->fv.erase(it);
      }
    }
    Expr e;
    e.n_ = std::move(node);
    return e;
  }

  std::shared_ptr<const Node> n_;
};

// ---------------------------------------------------------------------------
// Spines, variable sets, fresh names.

/// `h E1 ... En` split into its head and arguments.
struct Spine {
  Expr head;
  std::vector<Expr> args;
};

inline Spine spine(const Expr& e) {
  Spine s;
  Expr cur = e;
  while (cur.is(ExprKind::App)) {
    s.args.push_back(cur.arg());
    cur = cur.fun();
  }
  std::reverse(s.args.begin(), s.args.end());
  s.head = cur;
  return s;
}

inline VarSet free_vars(const Expr& e) { return VarSet(e.free_vars().begin(), e.free_vars().end()); }

/// Every variable with a free or binding occurrence.
inline void collect_vars(const Expr& e, VarSet& out) {
  if (e.is(ExprKind::Var)) {
    out.insert(e.var());
    return;
  }
  if (e.is(ExprKind::Lambda) || e.is(ExprKind::Exists)) out.insert(e.var());
  for (const auto& k : e.kids()) collect_vars(k, out);
}

inline VarSet all_vars(const Expr& e) {
  VarSet s;
  collect_vars(e, s);
  return s;
}

inline void collect_names(const Expr& e, std::set<std::string>& out) {
  if (e.is(ExprKind::Var) || e.is(ExprKind::Lambda) || e.is(ExprKind::Exists)) out.insert(e.var().name);
  for (const auto& k : e.kids()) collect_names(k, out);
}

/// `base` itself when unused, otherwise the base stripped of trailing digits
/// followed by the smallest unused numeric suffix.
inline std::string fresh_name(const std::string& base, const std::function<bool(const std::string&)>& used) {
  if (!used(base)) return base;
  std::string root = base;
  while (root.size() > 1 && std::isdigit(static_cast<unsigned char>(root.back()))) root.pop_back();
  for (unsigned i = 0;; ++i) {
    std::string cand = root + std::to_string(i);
    if (!used(cand)) return cand;
  }
}

inline Var fresh_var(const std::string& base, const Type& type, const VarSet& used) {
  return Var{fresh_name(base, [&](const std::string& n) { return used.count(Var{n, type}) > 0; }), type};
}

// ---------------------------------------------------------------------------
// Alpha-equivalence.

namespace detail {

inline int binder_index(const std::vector<const Var*>& env, const Var& v) {
  for (int i = static_cast<int>(env.size()) - 1; i >= 0; --i)
    if (*env[static_cast<std::size_t>(i)] == v) return i;
  return -1;
}

inline bool alpha_eq(const Expr& a, const Expr& b, std::vector<const Var*>& ea, std::vector<const Var*>& eb) {
  if (a.same_node(b) && ea.empty() && eb.empty()) return true;
  if (a.kind() != b.kind() || a.type() != b.type()) return false;
  switch (a.kind()) {
    case ExprKind::Prop:
      return a.value() == b.value();
    case ExprKind::IndConst:
    case ExprKind::PredConst:
      return a.name() == b.name();
    case ExprKind::Var: {
      int ia = binder_index(ea, a.var()), ib = binder_index(eb, b.var());
      if (ia != ib) return false;
      return ia >= 0 || a.var() == b.var();
    }
    case ExprKind::FunApp:
      if (a.name() != b.name() || a.kids().size() != b.kids().size()) return false;
      break;
    case ExprKind::Lambda:
    case ExprKind::Exists: {
      if (a.var().type != b.var().type) return false;
      ea.push_back(&a.var());
      eb.push_back(&b.var());
      bool r = alpha_eq(a.body(), b.body(), ea, eb);
      ea.pop_back();
      eb.pop_back();
      return r;
    }
    default:
      break;
  }
  for (std::size_t i = 0; i < a.kids().size(); ++i)
    if (!alpha_eq(a.kids()[i], b.kids()[i], ea, eb)) return false;
  return true;
}

}  // namespace detail

/// True iff the two expressions differ only in the names of bound variables.
inline bool alpha_equal(const Expr& a, const Expr& b) {
  if (a.same_node(b)) return true;
  if (a.free_vars() != b.free_vars() || a.size() != b.size()) return false;
  std::vector<const Var*> ea, eb;
  return detail::alpha_eq(a, b, ea, eb);
}

}  // namespace hopl
