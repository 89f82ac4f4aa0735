#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "hopl/expr.hpp"
#include "hopl/print.hpp"
#include "hopl/program.hpp"

namespace hopl {

/// Raised when a finite carrier would be too large to enumerate.
class SizeGuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Truncated Herbrand universe.

/// Index of a term outside the universe; it is equal to nothing.
constexpr int kJunk = -1;

class Domain {
 public:
  /// Ground terms of depth <= bound over the signature, ordered by depth,
  /// then by symbol and argument positions. Without function symbols the
  /// bound is irrelevant; without constants the single constant `⋆` is used.
  static Domain build(const Signature& sig, int depth_bound, const std::set<std::string>& extra_constants = {},
                      std::size_t max_terms = 2'000'000) {
    Domain d;
    std::set<std::string> consts = sig.constants;
    consts.insert(extra_constants.begin(), extra_constants.end());
    if (consts.empty()) consts.insert("⋆");
    for (const auto& c : consts) d.add(c, {}, 0);
    std::vector<std::pair<std::string, int>> funs(sig.functions.begin(), sig.functions.end());
    if (funs.empty()) return d;
    for (int depth = 1; depth <= depth_bound; ++depth) {
      const std::size_t prev = d.size();
      for (const auto& [f, n] : funs) {
        // All argument tuples over terms of depth < depth with at least one of depth - 1.
        std::vector<int> args(static_cast<std::size_t>(n), 0);
        std::function<void(std::size_t, bool)> rec = [&](std::size_t i, bool deep) {
          if (i == args.size()) {
            if (!deep) return;
            if (d.size() >= max_terms) throw SizeGuardError("universe exceeds " + std::to_string(max_terms) + " terms");
            d.add(f, args, depth);
            return;
          }
          for (std::size_t t = 0; t < prev; ++t) {
            args[i] = static_cast<int>(t);
            rec(i + 1, deep || d.depth_[t] == depth - 1);
          }
        };
        rec(0, false);
      }
      if (d.size() == prev) break;
    }
    return d;
  }

  std::size_t size() const { return sym_.size(); }
  const std::string& symbol(int t) const { return syms_[static_cast<std::size_t>(sym_[static_cast<std::size_t>(t)])]; }
  const std::vector<int>& kids(int t) const { return kids_[static_cast<std::size_t>(t)]; }
  int depth(int t) const { return depth_[static_cast<std::size_t>(t)]; }

  int constant(const std::string& c) const { return lookup(c, {}); }

  /// Index of f(args), or kJunk when it lies outside the universe.
  int lookup(const std::string& f, const std::vector<int>& args) const {
    for (int a : args)
      if (a == kJunk) return kJunk;
    auto s = sym_index_.find(f);
    if (s == sym_index_.end()) return kJunk;
    auto it = index_.find(key(s->second, args));
    return it == index_.end() ? kJunk : it->second;
  }

  /// Index of a ground term.
  int index_of(const Expr& t) const {
    if (t.is(ExprKind::IndConst)) return constant(t.name());
    if (t.is(ExprKind::FunApp)) {
      std::vector<int> args;
      for (const auto& k : t.kids()) args.push_back(index_of(k));
      return lookup(t.name(), args);
    }
    return kJunk;
  }

  Expr term(int t) const {
    if (kids(t).empty()) return Expr::ind_const(symbol(t));
    std::vector<Expr> args;
    for (int k : kids(t)) args.push_back(term(k));
    return Expr::fun_app(symbol(t), args);
  }

  std::string show(int t) const {
    if (t == kJunk) return "<junk>";
    std::string s;
    detail::print_term(term(t), s);
    return s;
  }

 private:
  static std::string key(int sym, const std::vector<int>& args) {
    std::string k = std::to_string(sym);
    for (int a : args) k += "," + std::to_string(a);
    return k;
  }

  void add(const std::string& f, const std::vector<int>& args, int depth) {
    auto s = sym_index_.find(f);
    int si;
    if (s == sym_index_.end()) {
      si = static_cast<int>(syms_.size());
      syms_.push_back(f);
      sym_index_.emplace(f, si);
    } else {
      si = s->second;
    }
    index_.emplace(key(si, args), static_cast<int>(sym_.size()));
    sym_.push_back(si);
    kids_.push_back(args);
    depth_.push_back(depth);
  }

  std::vector<std::string> syms_;
  std::unordered_map<std::string, int> sym_index_;
  std::vector<int> sym_;
  std::vector<std::vector<int>> kids_;
  std::vector<int> depth_;
  std::unordered_map<std::string, int> index_;
};

// ---------------------------------------------------------------------------
// Finite lattices of predicate types.

/// Identifier of an element of a predicate type's lattice (per type).
using ElemId = int;
/// Argument tuple: term indices at i positions, element ids at predicate positions.
using Tuple = std::vector<int>;

/// Elements of the lattice of a predicate type rho_1 -> ... -> rho_n -> o
/// over a finite domain. A monotone map is represented by the set of
/// argument tuples where it yields 1, an up-set of the product order, kept
/// as its antichain of minimal tuples. Individuals are ordered trivially.
class Lattice {
 public:
  explicit Lattice(const Domain& d, std::size_t guard = 1'000'000) : dom_(d), guard_(guard) {}

  const Domain& domain() const { return dom_; }
  std::size_t guard() const { return guard_; }

  /// Element whose up-set is generated by the given tuples.
  ElemId make(const Type& t, std::vector<Tuple> gens) {
    return intern(t, minimize(t, std::move(gens)));
  }

  const std::vector<Tuple>& tuples(const Type& t, ElemId e) { return table(t).elems[static_cast<std::size_t>(e)]; }

  ElemId bottom(const Type& t) { return intern(t, {}); }
  ElemId top(const Type& t) {
    std::vector<Tuple> gens;
    const auto& args = t.args();
    Tuple cur(args.size(), 0);
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
      if (i == args.size()) {
        gens.push_back(cur);
        return;
      }
      if (args[i].is_iota()) {
        for (std::size_t k = 0; k < dom_.size(); ++k) {
          cur[i] = static_cast<int>(k);
          rec(i + 1);
        }
      } else {
        cur[i] = bottom(args[i]);
        rec(i + 1);
      }
    };
    rec(0);
    return intern(t, std::move(gens));
  }

  /// Boolean elements.
  ElemId truth(bool b) { return b ? top(Type::boolean()) : bottom(Type::boolean()); }
  bool is_true(ElemId e) { return !tuples(Type::boolean(), e).empty(); }

  bool leq(const Type& t, ElemId a, ElemId b) {
    if (a == b) return true;
    auto& tb = table(t);
    const std::uint64_t k = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
    auto it = tb.leq_memo.find(k);
    if (it != tb.leq_memo.end()) return it->second;
    bool r = true;
    const auto& ta = tb.elems[static_cast<std::size_t>(a)];
    const auto& tbs = tb.elems[static_cast<std::size_t>(b)];
    for (const auto& x : ta) {
      bool covered = false;
      for (const auto& y : tbs)
        if (tuple_leq(t, y, x)) {
          covered = true;
          break;
        }
      if (!covered) {
        r = false;
        break;
      }
    }
    table(t).leq_memo.emplace(k, r);
    return r;
  }

  bool tuple_leq(const Type& t, const Tuple& x, const Tuple& y) {
    const auto& args = t.args();
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i].is_iota()) {
        if (x[i] != y[i]) return false;
      } else if (!leq(args[i], x[i], y[i])) {
        return false;
      }
    }
    return true;
  }

  ElemId lub(const Type& t, ElemId a, ElemId b) {
    if (a == b) return a;
    std::vector<Tuple> g = tuples(t, a);
    const auto& tb = tuples(t, b);
    g.insert(g.end(), tb.begin(), tb.end());
    return make(t, std::move(g));
  }

  ElemId glb(const Type& t, ElemId a, ElemId b) {
    if (a == b) return a;
    const auto& args = t.args();
    std::vector<Tuple> g;
    const std::vector<Tuple> ta = tuples(t, a);
    const std::vector<Tuple> tb = tuples(t, b);
    for (const auto& x : ta)
      for (const auto& y : tb) {
        Tuple z(args.size());
        bool ok = true;
        for (std::size_t i = 0; i < args.size() && ok; ++i) {
          if (args[i].is_iota()) {
            ok = x[i] == y[i];
            z[i] = x[i];
          } else {
            z[i] = lub(args[i], x[i], y[i]);
          }
        }
        if (ok) g.push_back(std::move(z));
      }
    return make(t, std::move(g));
  }

  /// f(args) for a full argument tuple.
  bool holds(const Type& t, ElemId f, const Tuple& args) {
    for (const auto& x : tuples(t, f))
      if (tuple_leq(t, x, args)) return true;
    return false;
  }

  /// f(x) as an element of the remaining type.
  ElemId apply(const Type& t, ElemId f, int x) {
    const Type& a = t.args().front();
    Type rest = t.drop(1);
    std::vector<Tuple> g;
    for (const auto& tu : tuples(t, f)) {
      bool ok = a.is_iota() ? tu[0] == x : leq(a, tu[0], x);
      if (ok) g.emplace_back(tu.begin() + 1, tu.end());
    }
    return make(rest, std::move(g));
  }

  /// Application as the lub of f(b) over the basic elements b below x.
  ElemId apply_by_basis(const Type& t, ElemId f, int x) {
    const Type& a = t.args().front();
    Type rest = t.drop(1);
    if (a.is_iota()) return apply(t, f, x);
    ElemId acc = bottom(rest);
    for (ElemId b : carrier(a))
      if (leq(a, b, x)) acc = lub(rest, acc, apply(t, f, b));
    return acc;
  }

  /// The step function (a ↘ c) of type t: c on arguments above a, bottom elsewhere.
  ElemId step(const Type& t, int a, ElemId c) {
    Type rest = t.drop(1);
    std::vector<Tuple> g;
    for (const auto& tu : tuples(rest, c)) {
      Tuple z{a};
      z.insert(z.end(), tu.begin(), tu.end());
      g.push_back(std::move(z));
    }
    return make(t, std::move(g));
  }

  /// Basic elements of an argument type: the domain for i, every lattice
  /// element for predicate types.
  std::vector<int> basic_elements(const Type& t) {
    if (t.is_iota()) {
      std::vector<int> v(dom_.size());
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<int>(i);
      return v;
    }
    return carrier(t);
  }

  /// Tuples of the argument product of t.
  const std::vector<Tuple>& product(const Type& t) {
    auto& tb = table(t);
    if (tb.product_ready) return tb.product;
    const auto& args = t.args();
    double estimate = 1;
    std::vector<std::vector<int>> comps;
    for (const auto& a : args) {
      if (a.is_iota()) estimate *= static_cast<double>(dom_.size());
      else estimate *= static_cast<double>(carrier(a).size());
      if (estimate > static_cast<double>(guard_))
        throw SizeGuardError("argument product of " + t.str() + " exceeds " + std::to_string(guard_));
    }
    for (const auto& a : args) comps.push_back(basic_elements(a));
    std::vector<Tuple> out;
    Tuple cur(args.size());
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
      if (i == args.size()) {
        out.push_back(cur);
        return;
      }
      for (int v : comps[i]) {
        cur[i] = v;
        rec(i + 1);
      }
    };
    rec(0);
    auto& tb2 = table(t);
    tb2.product = std::move(out);
    tb2.product_ready = true;
    return tb2.product;
  }

  /// Every element of the lattice of t, in a fixed order (bottom first).
  const std::vector<ElemId>& carrier(const Type& t) {
    {
      auto& tb = table(t);
      if (tb.carrier_ready) return tb.carrier;
    }
    // A set of tuples differing only at i positions is an antichain, so
    // the carrier has at least 2^(|D|^k) elements for k such positions.
    double width = 1;
    for (const auto& a : t.args())
      if (a.is_iota()) width *= static_cast<double>(dom_.size());
    if (width >= 20 && std::pow(2.0, width) > static_cast<double>(guard_))
      throw SizeGuardError("lattice of " + t.str() + " exceeds " + std::to_string(guard_) + " elements");
    const std::vector<Tuple> prod = product(t);
    const std::size_t n = prod.size();
    std::vector<std::vector<char>> comparable(n, std::vector<char>(n, 0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        comparable[i][j] = i == j || tuple_leq(t, prod[i], prod[j]) || tuple_leq(t, prod[j], prod[i]);
    std::vector<ElemId> out;
    std::vector<std::size_t> chosen;
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
      if (i == n) {
        if (out.size() >= guard_) throw SizeGuardError("lattice of " + t.str() + " exceeds " + std::to_string(guard_) + " elements");
        std::vector<Tuple> g;
        for (auto k : chosen) g.push_back(prod[k]);
        out.push_back(intern(t, std::move(g)));
        return;
      }
      rec(i + 1);
      for (auto k : chosen)
        if (comparable[k][i]) return;
      chosen.push_back(i);
      rec(i + 1);
      chosen.pop_back();
    };
    rec(0);
    auto& tb = table(t);
    tb.carrier = std::move(out);
    tb.carrier_ready = true;
    return tb.carrier;
  }

  /// Rendering in set notation: `{(a,b), (b,c)}`, nested for predicate positions.
  std::string show(const Type& t, ElemId e) {
    if (t.is_boolean()) return is_true(e) ? "true" : "false";
    std::vector<std::string> items;
    for (const auto& tu : tuples(t, e)) {
      std::string s;
      const auto& args = t.args();
      for (std::size_t i = 0; i < args.size(); ++i) {
        if (i) s += ',';
        s += args[i].is_iota() ? dom_.show(tu[i]) : show(args[i], tu[i]);
      }
      items.push_back(args.size() == 1 ? s : "(" + s + ")");
    }
    // Element ids depend on interning history; keep listings stable.
    bool first_order = true;
    for (const auto& a : t.args())
      if (!a.is_iota()) first_order = false;
    if (!first_order) std::sort(items.begin(), items.end());
    std::string out = "{";
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i) out += ", ";
      out += items[i];
    }
    return out + "}";
  }

  std::size_t interned(const Type& t) { return table(t).elems.size(); }

 private:
  struct TypeTable {
    std::vector<std::vector<Tuple>> elems;
    std::map<std::vector<Tuple>, ElemId> ids;
    std::unordered_map<std::uint64_t, bool> leq_memo;
    std::vector<ElemId> carrier;
    bool carrier_ready = false;
    std::vector<Tuple> product;
    bool product_ready = false;
  };

  TypeTable& table(const Type& t) {
    if (!t.is_predicate()) throw TypeError("lattice elements exist only for predicate types, not " + t.str());
    return tables_[t];
  }

  ElemId intern(const Type& t, std::vector<Tuple> antichain) {
    std::sort(antichain.begin(), antichain.end());
    antichain.erase(std::unique(antichain.begin(), antichain.end()), antichain.end());
    auto& tb = table(t);
    auto it = tb.ids.find(antichain);
    if (it != tb.ids.end()) return it->second;
    ElemId id = static_cast<ElemId>(tb.elems.size());
    tb.ids.emplace(antichain, id);
    tb.elems.push_back(std::move(antichain));
    return id;
  }

  std::vector<Tuple> minimize(const Type& t, std::vector<Tuple> g) {
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    bool all_iota = true;
    for (const auto& a : t.args())
      if (!a.is_iota()) all_iota = false;
    if (all_iota) return g;
    std::vector<Tuple> out;
    for (std::size_t i = 0; i < g.size(); ++i) {
      bool dominated = false;
      for (std::size_t j = 0; j < g.size() && !dominated; ++j)
        if (i != j && tuple_leq(t, g[j], g[i])) dominated = true;
      if (!dominated) out.push_back(g[i]);
    }
    return out;
  }

  const Domain& dom_;
  std::size_t guard_;
  std::unordered_map<Type, TypeTable> tables_;
};

inline Domain build_domain(const Program& prog, int depth_bound) {
  if (depth_bound < 0) throw std::invalid_argument("term depth bound must be non-negative");
  return Domain::build(prog.signature, depth_bound);
}

/// Every element of the lattice of a predicate type, bottom first.
inline std::vector<ElemId> enumerate_lattice(Lattice& lat, const Type& t) { return lat.carrier(t); }

/// The step function (a ↘ c) of type t.
inline ElemId step_function(Lattice& lat, const Type& t, int a, ElemId c) { return lat.step(t, a, c); }

}  // namespace hopl
