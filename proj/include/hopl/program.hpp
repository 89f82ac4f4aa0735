#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "hopl/basic.hpp"
#include "hopl/expr.hpp"
#include "hopl/print.hpp"

namespace hopl {

/// Position in the source text (1-based).
struct Span {
  int line = 0;
  int col = 0;
  int end_line = 0;
  int end_col = 0;

  std::string str() const { return std::to_string(line) + ":" + std::to_string(col); }
};

/// p <-pi E with E closed, of type pi.
struct Clause {
  std::string head;
  Type type;
  Expr body;
  bool implicit = false;  // added by completion
  Span span;
};

struct Signature {
  std::set<std::string> constants;
  std::map<std::string, int> functions;
  std::map<std::string, Type> predicates;
};

class Program {
 public:
  Signature signature;

  Program() = default;
  Program(const Program& o) : signature(o.signature), clauses_(o.clauses_) { reindex(); }
  Program(Program&& o) noexcept : signature(std::move(o.signature)), clauses_(std::move(o.clauses_)) { reindex(); }
  Program& operator=(const Program& o) {
    if (this != &o) {
      signature = o.signature;
      clauses_ = o.clauses_;
      reindex();
    }
    return *this;
  }
  Program& operator=(Program&& o) noexcept {
    signature = std::move(o.signature);
    clauses_ = std::move(o.clauses_);
    reindex();
    return *this;
  }

  const std::vector<Clause>& clauses() const { return clauses_; }

  /// Clauses for `p` in file order.
  const std::vector<const Clause*>& clauses_for(const std::string& p) const {
    static const std::vector<const Clause*> none;
    auto it = index_.find(p);
    return it == index_.end() ? none : it->second;
  }

  void add(Clause c) {
    if (!c.body.closed()) throw TypeError("body of a clause for " + c.head + " is not closed");
    if (c.body.type() != c.type) throw TypeError("body of a clause for " + c.head + " has the wrong type");
    auto it = signature.predicates.find(c.head);
    if (it != signature.predicates.end() && it->second != c.type)
      throw TypeError("clauses for " + c.head + " disagree on its type");
    signature.predicates[c.head] = c.type;
    clauses_.push_back(std::move(c));
    reindex();
  }

  /// Adds p <- bottom for every predicate constant without clauses.
  void complete() {
    for (const auto& [p, t] : signature.predicates) {
      if (index_.count(p)) continue;
      Clause c;
      c.head = p;
      c.type = t;
      c.body = bottom_of(t);
      c.implicit = true;
      clauses_.push_back(std::move(c));
    }
    reindex();
  }

  Expr pred(const std::string& p) const { return Expr::pred_const(p, signature.predicates.at(p)); }

  /// Core syntax listing, one clause per line.
  std::string str(bool with_implicit = false) const {
    std::string out;
    for (const auto& c : clauses_) {
      if (c.implicit && !with_implicit) continue;
      out += c.head + " <- " + to_string(c.body) + ".\n";
    }
    return out;
  }

 private:
  void reindex() {
    index_.clear();
    for (const auto& c : clauses_) index_[c.head].push_back(&c);
  }

  std::vector<Clause> clauses_;
  std::map<std::string, std::vector<const Clause*>> index_;
};

/// A goal <- A with the free variables of the original query in order of
/// first occurrence.
struct Goal {
  Expr body;
  std::vector<Var> free;
};

}  // namespace hopl
