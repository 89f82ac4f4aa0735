#pragma once

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hopl/engine.hpp"
#include "hopl/frontend.hpp"
#include "hopl/model.hpp"

namespace hopl {

struct SessionConfig {
  int max_depth = 200;
  int template_budget = 6;
  int max_answers = 10;
  bool lazy_union = true;
  bool oracle_check = false;
  int term_depth_bound = 3;
  bool raw = false;
  bool trace = false;
  bool dump_ho = false;

  SolveLimits limits() const {
    SolveLimits l;
    l.max_depth = max_depth;
    l.template_budget = template_budget;
    l.max_answers = max_answers;
    l.lazy = lazy_union;
    l.keep_trace = trace;
    return l;
  }

  /// `key = value` lines, in the order accepted by `set`.
  std::string echo() const {
    std::ostringstream o;
    o << "maxDepth = " << max_depth << "\n"
      << "templateBudget = " << template_budget << "\n"
      << "maxAnswers = " << max_answers << "\n"
      << "lazyUnion = " << (lazy_union ? "on" : "off") << "\n"
      << "oracleCheck = " << (oracle_check ? "on" : "off") << "\n"
      << "termDepthBound = " << term_depth_bound << "\n"
      << "rawPrint = " << (raw ? "on" : "off") << "\n"
      << "trace = " << (trace ? "on" : "off") << "\n"
      << "dumpHo = " << (dump_ho ? "on" : "off") << "\n";
    return o.str();
  }

  /// Sets one option; returns an error message, empty on success.
  std::string set(const std::string& key, const std::string& value) {
    auto number = [&](int& field, int min) -> std::string {
      try {
        std::size_t used = 0;
        int v = std::stoi(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        if (v < min) return key + " must be at least " + std::to_string(min);
        field = v;
        return {};
      } catch (const std::exception&) {
        return "expected a number for " + key + ", got '" + value + "'";
      }
    };
    auto flag = [&](bool& field) -> std::string {
      if (value == "on" || value == "true" || value == "1") field = true;
      else if (value == "off" || value == "false" || value == "0") field = false;
      else return "expected on or off for " + key + ", got '" + value + "'";
      return {};
    };
    if (key == "maxDepth") return number(max_depth, 1);
    if (key == "templateBudget") return number(template_budget, 1);
    if (key == "maxAnswers") return number(max_answers, 1);
    if (key == "termDepthBound") return number(term_depth_bound, 0);
    if (key == "lazyUnion") return flag(lazy_union);
    if (key == "oracleCheck") return flag(oracle_check);
    if (key == "rawPrint") return flag(raw);
    if (key == "trace") return flag(trace);
    if (key == "dumpHo") return flag(dump_ho);
    return "unknown setting '" + key + "'";
  }
};

/// Exit codes of batch runs.
enum ExitCode { kExitAnswers = 0, kExitNoAnswers = 1, kExitError = 2 };

/// `X = {a, b} ∪ L, Y = c`, or `true` when nothing is bound.
inline std::string format_answer(const Answer& a, const std::vector<Var>& query_vars, bool raw) {
  std::string out;
  for (const auto& v : query_vars) {
    const Expr* e = a.bindings.find(v);
    if (!e) continue;
    if (!out.empty()) out += ", ";
    out += v.name + " = " + (raw ? to_string(*e) : pretty_set(*e));
  }
  return out.empty() ? "true" : out;
}

/// Loaded program text plus configuration; shared by batch runs and the REPL.
class Session {
 public:
  explicit Session(SessionConfig cfg = {}) : cfg_(cfg) {}

  SessionConfig& config() { return cfg_; }
  const Program& program() const { return loaded_.program; }
  const std::vector<std::string>& embedded_queries() const { return loaded_.query_texts; }

  /// Adds a source and rebuilds the program. On error the previous program
  /// is kept and diagnostics go to `err`.
  bool load_text(const std::string& text, const std::string& origin, std::ostream& err) {
    std::vector<SourceProgram> next = sources_;
    std::vector<std::string> next_names = names_;
    try {
      next.push_back(parse(text));
      next_names.push_back(origin);
      LoadResult r = build_program(next);
      for (const auto& d : r.notes) err << prefix(next_names) << d.str() << "\n";
      sources_ = std::move(next);
      names_ = std::move(next_names);
      loaded_ = std::move(r);
      return true;
    } catch (const FrontendError& e) {
      const std::string pre = next_names.size() == sources_.size() ? origin + ":" : prefix(next_names);
      for (const auto& d : e.diags) err << pre << d.str() << "\n";
      return false;
    }
  }

  bool load_file(const std::string& path, std::ostream& err) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      err << path << ": error: cannot open file\n";
      return false;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return load_text(ss.str(), path, err);
  }

  /// Answers to one query, pulled on demand.
  class Run {
   public:
    Run(Session& s, std::string text, std::ostream& err) : s_(s) {
      prog_ = std::make_unique<Program>(s.loaded_.program);
      std::vector<Diagnostic> notes;
      try {
        goal_ = build_query(*prog_, parse_query_text(text), &notes);
      } catch (const FrontendError& e) {
        for (const auto& d : e.diags) err << "query:" << d.str() << "\n";
        failed_ = true;
        return;
      }
      for (const auto& d : notes) err << "query:" << d.str() << "\n";
      stream_.emplace(*prog_, goal_, s.cfg_.limits());
    }

    bool failed() const { return failed_; }
    int emitted() const { return emitted_; }

    /// The next answer as display lines (trace lines first), or nothing.
    std::optional<std::string> next() {
      if (failed_ || emitted_ >= s_.cfg_.max_answers) return std::nullopt;
      auto a = stream_->next();
      if (!a) return std::nullopt;
      ++emitted_;
      std::string out;
      if (s_.cfg_.trace)
        for (const auto& st : a->trace) out += "  " + to_string(st) + "\n";
      out += format_answer(*a, stream_->query_vars(), s_.cfg_.raw);
      if (s_.cfg_.oracle_check) out += " " + verdict(*a);
      return out;
    }

    /// Closing line once no further answer will be shown.
    std::string status() const {
      if (failed_) return "query rejected";
      if (emitted_ == 0) return "no answers within limits";
      if (emitted_ >= s_.cfg_.max_answers)
        return "answer limit reached (maxAnswers = " + std::to_string(s_.cfg_.max_answers) + ")";
      return "no more answers within limits";
    }

   private:
    std::string verdict(const Answer& a) {
      if (ineligible_) return "[skipped (ineligible)]";
      try {
        if (!lattice_) {
          domain_ = std::make_unique<Domain>(Domain::build(prog_->signature, s_.cfg_.term_depth_bound));
          lattice_ = std::make_unique<Lattice>(*domain_);
        }
      } catch (const SizeGuardError&) {
        ineligible_ = true;
        return "[skipped (ineligible)]";
      }
      try {
        return check_correct_answer(*prog_, goal_, a, *lattice_) ? "[verified]" : "[MISMATCH: not a correct answer]";
      } catch (const SizeGuardError&) {
        return "[skipped (ineligible)]";
      } catch (const IneligibleAnswer&) {
        return "[skipped (ineligible)]";
      }
    }

    Session& s_;
    std::unique_ptr<Program> prog_;
    Goal goal_;
    std::optional<AnswerStream> stream_;
    bool failed_ = false;
    int emitted_ = 0;
    std::unique_ptr<Domain> domain_;
    std::unique_ptr<Lattice> lattice_;
    bool ineligible_ = false;
  };

  /// Runs a query to completion; returns the number of answers, or -1 when
  /// the query is rejected.
  int run_query(const std::string& text, std::ostream& out, std::ostream& err) {
    Run r(*this, text, err);
    if (r.failed()) return -1;
    while (auto line = r.next()) out << *line << "\n";
    out << r.status() << "\n";
    return r.emitted();
  }

  /// The truncated minimum model, one line per predicate.
  std::string model(std::ostream& err) {
    try {
      Domain d = Domain::build(loaded_.program.signature, cfg_.term_depth_bound);
      Lattice lat(d);
      return dump_model(loaded_.program, lat, cfg_.dump_ho);
    } catch (const SizeGuardError& e) {
      err << "error: " << e.what() << "\n";
      return {};
    }
  }

 private:
  static std::string prefix(const std::vector<std::string>& names) {
    return names.size() == 1 ? names.front() + ":" : std::string();
  }

  SessionConfig cfg_;
  std::vector<SourceProgram> sources_;
  std::vector<std::string> names_;
  LoadResult loaded_;
};

/// Runs each query in turn, echoing it first when there are several.
/// Exit code 0 when some answer was found, 1 when none, 2 on errors.
inline int run_queries(Session& s, const std::vector<std::string>& queries, std::ostream& out, std::ostream& err) {
  int total = 0;
  for (const auto& q : queries) {
    if (queries.size() > 1) out << q << "\n";
    int n = s.run_query(q, out, err);
    if (n < 0) return kExitError;
    total += n;
  }
  return total > 0 ? kExitAnswers : kExitNoAnswers;
}

/// Loads the files and runs `query`, or else every query embedded in them.
inline int run_batch(const std::vector<std::string>& files, const std::optional<std::string>& query,
                     const SessionConfig& cfg, std::ostream& out, std::ostream& err) {
  Session s(cfg);
  for (const auto& f : files)
    if (!s.load_file(f, err)) return kExitError;
  return run_queries(s, query ? std::vector<std::string>{*query} : s.embedded_queries(), out, err);
}

/// Line-oriented interactive session. Prompts are written only when
/// `interactive` is set, so piped sessions print the same answer text as
/// batch runs.
inline int repl(Session& s, std::istream& in, std::ostream& out, std::ostream& err, bool interactive) {
  auto prompt = [&](const char* p) {
    if (interactive) out << p << std::flush;
  };
  auto trim = [](std::string x) {
    const auto b = x.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = x.find_last_not_of(" \t\r");
    return x.substr(b, e - b + 1);
  };
  std::string line;
  prompt("hopl> ");
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) {
      prompt("hopl> ");
      continue;
    }
    if (line == ":quit" || line == ":q") break;
    std::istringstream words(line);
    std::string cmd;
    words >> cmd;
    if (cmd == ":load") {
      std::string f;
      bool any = false;
      while (words >> f) {
        any = true;
        if (s.load_file(f, err)) out << "loaded " << f << "\n";
      }
      if (!any) err << "error: :load needs a file name\n";
    } else if (cmd == ":set?") {
      out << s.config().echo();
    } else if (cmd == ":set") {
      std::string key, value;
      words >> key >> value;
      std::string msg = s.config().set(key, value);
      if (!msg.empty()) err << "error: " << msg << "\n";
    } else if (cmd == ":model") {
      out << s.model(err);
    } else if (cmd == ":trace") {
      std::string v;
      words >> v;
      std::string msg = s.config().set("trace", v);
      if (!msg.empty()) err << "error: " << msg << "\n";
    } else if (cmd == ":help") {
      out << ":load FILE  :set KEY VALUE  :set?  :model  :trace on|off  :quit\n"
             "?- Goal.    then ';' for the next answer, anything else to stop\n";
    } else if (cmd.rfind("?-", 0) == 0) {
      Session::Run r(s, line, err);
      if (!r.failed()) {
        bool stopped = false;
        while (auto ans = r.next()) {
          out << *ans << "\n";
          prompt("more? ");
          std::string reply;
          if (!std::getline(in, reply) || trim(reply) != ";") {
            stopped = true;
            break;
          }
        }
        if (!stopped) out << r.status() << "\n";
      }
    } else {
      err << "error: unknown command '" << cmd << "'\n";
    }
    prompt("hopl> ");
  }
  return 0;
}

}  // namespace hopl
