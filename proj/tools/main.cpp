#include <CLI11.hpp>

#include <iostream>

#include "stagetree/commands.hpp"

namespace cli = stagetree::cli;

int main(int argc, char** argv) {
  CLI::App app{"stagetree: tree search over staged pipeline insights"};
  app.require_subcommand(1);

  std::string config;
  std::uint64_t seed = 0;
  int rollouts = 0;
  std::string output_dir;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "override search.seed");
    sub->add_option("--rollouts", rollouts, "override search.k_rollouts")->check(CLI::PositiveNumber);
    sub->add_option("--output-dir", output_dir, "override output_dir");
  };

  auto* propose = app.add_subcommand("propose", "build the insight search space");
  add_common(propose);
  auto* search = app.add_subcommand("search", "run the tree search");
  add_common(search);

  auto* resume = app.add_subcommand("resume", "continue a search from its journal");
  add_common(resume);
  std::string journal;
  resume->add_option("--journal", journal, "journal.jsonl of the interrupted run")->required();

  auto* report = app.add_subcommand("report", "rank methods from a score table");
  std::string scores, reference, report_dir = "report";
  report->add_option("scores", scores, "CSV: method,dataset,run,metric,raw_score")
      ->required()
      ->check(CLI::ExistingFile);
  report->add_option("--reference", reference, "method the others are compared with")->required();
  report->add_option("--output-dir", report_dir, "where report files go");

  auto* ablation = app.add_subcommand("ablation", "tree search against random sampling");
  add_common(ablation);
  int trials = 20;
  ablation->add_option("--trials", trials, "number of seeded landscapes")->check(CLI::PositiveNumber);

  auto* cache = app.add_subcommand("cache", "inspect the stage cache");
  cache->require_subcommand(1);
  auto* cache_list = cache->add_subcommand("list", "print cached stages");
  cache_list->add_option("--config", config)->required()->check(CLI::ExistingFile);
  auto* cache_clear = cache->add_subcommand("clear", "delete cached stages");
  cache_clear->add_option("--config", config)->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? cli::kSuccess : cli::kUsageError;
  }

  auto overrides = [&](CLI::App* sub) {
    cli::Overrides o;
    if (sub->count("--seed")) o.seed = seed;
    if (sub->count("--rollouts")) o.rollouts = rollouts;
    if (sub->count("--output-dir")) o.output_dir = output_dir;
    return o;
  };

  if (*propose) return cli::cmd_propose(config, overrides(propose), std::cout, std::cerr);
  if (*search) return cli::cmd_search(config, overrides(search), std::cout, std::cerr);
  if (*resume) return cli::cmd_resume(journal, config, overrides(resume), std::cout, std::cerr);
  if (*report) return cli::cmd_report(scores, reference, report_dir, std::cout, std::cerr);
  if (*ablation) return cli::cmd_ablation(config, trials, overrides(ablation), std::cout, std::cerr);
  if (*cache_list) return cli::cmd_cache_list(config, std::cout, std::cerr);
  return cli::cmd_cache_clear(config, std::cout, std::cerr);
}
