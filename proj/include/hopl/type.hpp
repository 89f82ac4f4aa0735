#pragma once

#include <algorithm>
#include <cstddef>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace hopl {

/// Types of H: individual (i), functional (i^n -> i) and predicate
/// (rho_1 -> ... -> rho_n -> o). Values are interned, so equality is a
/// pointer comparison and the boolean type is the predicate type with no
/// arguments.
class Type {
 public:
  enum class Kind { Individual, Functional, Predicate };

  /// Defaults to the individual type.
  Type() : Type(iota()) {}

  static Type iota() {
    static const Rep* r = intern(Kind::Individual, 0, {}).rep_;
    return Type(r);
  }
  static Type boolean() {
    static const Rep* r = intern(Kind::Predicate, 0, {}).rep_;
    return Type(r);
  }

  static Type functional(int arity) {
    if (arity < 1) throw std::invalid_argument("functional type needs arity >= 1");
    return intern(Kind::Functional, arity, {});
  }

  static Type predicate(std::vector<Type> args) {
    for (const auto& a : args)
      if (!a.is_argument())
        throw std::invalid_argument("predicate argument must be i or a predicate type, got " + a.str());
    const int n = static_cast<int>(args.size());
    return intern(Kind::Predicate, n, std::move(args));
  }

  /// rho -> pi for an argument type rho and predicate type pi.
  static Type arrow(const Type& arg, const Type& result) {
    if (!result.is_predicate()) throw std::invalid_argument("arrow result must be a predicate type");
    std::vector<Type> args{arg};
    args.insert(args.end(), result.args().begin(), result.args().end());
    return predicate(std::move(args));
  }

  Kind kind() const { return rep_->kind; }
  bool is_iota() const { return rep_->kind == Kind::Individual; }
  bool is_functional() const { return rep_->kind == Kind::Functional; }
  bool is_predicate() const { return rep_->kind == Kind::Predicate; }
  bool is_boolean() const { return is_predicate() && rep_->args.empty(); }
  bool is_argument() const { return is_iota() || is_predicate(); }

  /// Arity of a functional type, or number of arguments of a predicate type.
  int arity() const { return rep_->arity; }
  const std::vector<Type>& args() const { return rep_->args; }

  /// Type left after supplying the first k arguments of a predicate type.
  Type drop(std::size_t k) const {
    if (!is_predicate() || k > rep_->args.size()) throw std::invalid_argument("cannot drop arguments of " + str());
    if (k == 0) return *this;
    return predicate(std::vector<Type>(rep_->args.begin() + static_cast<std::ptrdiff_t>(k), rep_->args.end()));
  }

  /// Order of the type: 0 for i and o, otherwise 1 + max order of the arguments.
  int order() const { return rep_->order; }

  /// ASCII form accepted by the parser, e.g. `(i->i->o)->i->i->o`.
  const std::string& str() const { return rep_->text; }

  /// Unicode form, e.g. `(ι→ι→o)→ι→ι→o`.
  std::string pretty() const {
    std::string out;
    for (char c : rep_->text) {
      if (c == 'i') out += "ι";
      else if (c == '-') out += "→";
      else if (c == '>') continue;
      else out += c;
    }
    return out;
  }

  friend bool operator==(const Type& a, const Type& b) { return a.rep_ == b.rep_; }
  friend bool operator!=(const Type& a, const Type& b) { return a.rep_ != b.rep_; }
  friend bool operator<(const Type& a, const Type& b) {
    if (a.rep_ == b.rep_) return false;
    if (a.rep_->order != b.rep_->order) return a.rep_->order < b.rep_->order;
    return a.rep_->text < b.rep_->text;
  }

  std::size_t hash() const { return std::hash<const void*>{}(rep_); }

 private:
  struct Rep {
    Kind kind;
    int arity;
    std::vector<Type> args;
    std::string text;
    int order;
  };

  explicit Type(const Rep* r) : rep_(r) {}

  static std::string render(Kind k, int arity, const std::vector<Type>& args) {
    switch (k) {
      case Kind::Individual:
        return "i";
      case Kind::Functional: {
        std::string s;
        for (int i = 0; i < arity; ++i) s += "i->";
        return s + "i";
      }
      case Kind::Predicate: {
        std::string s;
        for (const auto& a : args) {
          if (a.is_predicate() && !a.is_boolean()) s += "(" + a.str() + ")->";
          else s += a.str() + "->";
        }
        return s + "o";
      }
    }
    return "?";
  }

  static Type intern(Kind k, int arity, std::vector<Type> args) {
    static std::mutex mu;
    static std::unordered_map<std::string, std::unique_ptr<Rep>> table;
    std::string text = render(k, arity, args);
    std::lock_guard<std::mutex> lock(mu);
    auto it = table.find(text);
    if (it != table.end()) return Type(it->second.get());
    int order = 0;
    for (const auto& a : args) order = std::max(order, a.order() + 1);
    if (k == Kind::Functional) order = 1;
    auto rep = std::make_unique<Rep>(Rep{k, arity, std::move(args), text, order});
    const Rep* raw = rep.get();
    table.emplace(std::move(text), std::move(rep));
    return Type(raw);
  }

  const Rep* rep_;
};

}  // namespace hopl

template <>
struct std::hash<hopl::Type> {
  std::size_t operator()(const hopl::Type& t) const noexcept { return t.hash(); }
};
