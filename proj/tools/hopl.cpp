#include <unistd.h>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hopl/session.hpp"

int main(int argc, char** argv) {
  CLI::App app{"hopl: interpreter and model checker for extensional higher-order logic programs"};
  hopl::SessionConfig cfg;
  std::vector<std::string> files;
  std::string query;
  bool eager = false;
  bool lazy = false;
  bool show_model = false;
  bool interactive = false;

  app.add_option("files", files, "Program files (.hol)");
  app.add_option("-q,--query", query, "Query to run, e.g. \"?- p(R).\"");
  app.add_option("--max-depth", cfg.max_depth, "Maximum derivation length")->check(CLI::PositiveNumber);
  app.add_option("--template-budget", cfg.template_budget, "Maximum template complexity")->check(CLI::PositiveNumber);
  app.add_option("--max-answers", cfg.max_answers, "Maximum number of answers")->check(CLI::PositiveNumber);
  auto* e = app.add_flag("--eager-union", eager, "Enumerate unions of templates eagerly");
  auto* l = app.add_flag("--lazy-union", lazy, "Represent open unions with tail variables (default)");
  e->excludes(l);
  app.add_flag("--oracle-check", cfg.oracle_check, "Verify each answer in the truncated minimum model");
  app.add_option("--universe-depth", cfg.term_depth_bound, "Term depth bound of the finite universe")
      ->check(CLI::NonNegativeNumber);
  app.add_flag("--raw", cfg.raw, "Print answers in core lambda syntax");
  app.add_flag("--trace", cfg.trace, "Print the derivation of each answer");
  app.add_flag("--model", show_model, "Print the truncated minimum model of the program");
  app.add_flag("--dump-ho", cfg.dump_ho, "Include higher-order predicates in model listings");
  app.add_flag("-i,--interactive", interactive, "Start the interactive loop after loading the files");

  CLI11_PARSE(app, argc, argv);
  if (eager) cfg.lazy_union = false;

  hopl::Session s(cfg);
  for (const auto& f : files)
    if (!s.load_file(f, std::cerr)) return hopl::kExitError;
  std::vector<std::string> queries;
  if (!query.empty()) queries.push_back(query);
  else if (!interactive) queries = s.embedded_queries();

  // Batch mode whenever there is something to run; otherwise the loop.
  int code = hopl::kExitAnswers;
  if (!queries.empty()) code = hopl::run_queries(s, queries, std::cout, std::cerr);
  if (show_model && code != hopl::kExitError) std::cout << s.model(std::cerr);
  if (!interactive && (!queries.empty() || show_model)) return code;
  if (code == hopl::kExitError) return code;
  return hopl::repl(s, std::cin, std::cout, std::cerr, isatty(STDIN_FILENO) != 0);
}
