#include "stagetree/commands.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <memory>
#include <ostream>

#include "stagetree/ablation.hpp"
#include "stagetree/evaluation.hpp"
#include "stagetree/external_executor.hpp"
#include "stagetree/run_config.hpp"

namespace stagetree::cli {
namespace {

namespace fs = std::filesystem;

constexpr const char* kSpaceFile = "search_space.json";

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidParams:
      return kUsageError;
    case ErrorCode::EndpointError:
    case ErrorCode::IoError:
    case ErrorCode::TransportError:
      return kEnvironmentError;
    default:
      return kExecutionFailure;
  }
}

template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    err << "error: IoError: " << e.what() << '\n';
    return kEnvironmentError;
  }
}

void write_file(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  }
  fs::rename(tmp, path);
}

// One command per run directory at a time.
class DirectoryLock {
 public:
  explicit DirectoryLock(const fs::path& dir) {
    fs::create_directories(dir);
    const std::string path = (dir / ".lock").string();
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) throw Error(ErrorCode::IoError, "cannot open " + path + ": " + std::strerror(errno));
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
      ::close(fd_);
      throw Error(ErrorCode::IoError, dir.string() + " is in use by another search");
    }
  }
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;
  ~DirectoryLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }

 private:
  int fd_ = -1;
};

RunConfig load(const fs::path& config_path, const Overrides& o) {
  RunConfig c = load_run_config(config_path);
  if (o.seed) c.search.rng_seed = *o.seed;
  if (o.rollouts) c.search.k_rollouts = *o.rollouts;
  if (o.output_dir) {
    const bool problem_follows = c.problem.output_dir == c.output_dir;
    c.output_dir = *o.output_dir;
    if (problem_follows) c.problem.output_dir = c.output_dir;
  }
  validate(c.search);
  return c;
}

Proposal propose(const RunConfig& c) {
  if (c.insight_source.kind == InsightSourceKind::File) {
    Proposal p;
    p.space = load_static_insights(c.insight_source.path);
    p.space.insights_per_stage = c.insight_source.insights_per_stage;
    return p;
  }
  return propose_insights(c.problem, *c.llm, c.insight_source.insights_per_stage);
}

// A file source is authoritative; an LLM proposal is reused once saved.
SearchSpace obtain_space(const RunConfig& c, std::ostream& out) {
  const fs::path saved = fs::path(c.output_dir) / kSpaceFile;
  if (c.insight_source.kind == InsightSourceKind::Llm && fs::exists(saved)) {
    return load_static_insights(saved);
  }
  Proposal p = propose(c);
  if (c.insight_source.kind == InsightSourceKind::Llm) {
    write_file(fs::path(c.output_dir) / "transcript.json", serialize_transcript(p.transcript));
    out << "proposed " << p.space.total() << " insights\n";
  }
  write_file(saved, serialize_search_space(p.space));
  return p.space;
}

std::unique_ptr<Executor> make_executor(const RunConfig& c, const SearchSpace& space) {
  if (c.executor.kind == ExecutorKind::Landscape) {
    return std::make_unique<LandscapeExecutor>(
        build_landscape(c.executor.landscape, space, c.search.searchable_stages));
  }
  std::unique_ptr<Transport> transport;
  if (!c.executor.command.empty()) transport = std::make_unique<ProcessTransport>(c.executor.command);
  else transport = std::make_unique<HttpTransport>(c.executor.url);
  return std::make_unique<ExternalExecutor>(std::move(transport), c.executor_timeout(), c.search.rng_seed);
}

int finish(const RunConfig& c, const SearchOutcome& outcome, std::ostream& out, std::ostream& err) {
  const fs::path dir(c.output_dir);
  write_file(dir / "outcome.json", outcome_to_json(outcome));
  write_file(dir / "rollouts.csv", outcome_rollouts_csv(outcome));
  if (!outcome.best_node) {
    err << "error: NoSolution: all " << outcome.rollouts.size() << " simulations failed\n";
    return kExecutionFailure;
  }
  write_file(dir / "best_solution.py", outcome.solution_code);
  out << std::setprecision(17) << "rollouts " << outcome.rollouts.size() << ", failed "
      << outcome.failed_rollouts << "\nbest node " << outcome.best_node->value << ", dev score "
      << outcome.dev_score << '\n';
  if (outcome.test_score) out << "test score " << *outcome.test_score << '\n';
  out << "config";
  for (const auto& id : outcome.config_of_best) out << ' ' << id;
  out << '\n';
  return kSuccess;
}

}  // namespace

int cmd_propose(const fs::path& config_path, const Overrides& overrides, std::ostream& out,
                std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig c = load(config_path, overrides);
    DirectoryLock lock(c.output_dir);
    const Proposal p = propose(c);
    const fs::path dir(c.output_dir);
    write_file(dir / kSpaceFile, serialize_search_space(p.space));
    write_file(dir / "transcript.json", serialize_transcript(p.transcript));
    for (Stage s : kAllStages) {
      const auto n = p.space.pool(s).size();
      if (n > 0) out << stage_name(s) << ' ' << n << '\n';
    }
    out << "total " << p.space.total() << '\n';
    return static_cast<int>(kSuccess);
  });
}

int cmd_search(const fs::path& config_path, const Overrides& overrides, std::ostream& out,
               std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig c = load(config_path, overrides);
    DirectoryLock lock(c.output_dir);
    const SearchSpace space = obtain_space(c, out);
    StageCache cache{fs::path(c.cache_dir)};
    auto executor = make_executor(c, space);
    JournalWriter journal(fs::path(c.output_dir) / "journal.jsonl", 0);
    SearchEngine engine(c.problem, space, *executor, cache, c.search, journal.observer());
    return finish(c, engine.run(), out, err);
  });
}

int cmd_resume(const fs::path& journal_path, const fs::path& config_path, const Overrides& overrides,
               std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig c = load(config_path, overrides);
    DirectoryLock lock(c.output_dir);
    const SearchSpace space = obtain_space(c, out);
    JournalReplay replay = load_journal(journal_path, [&](std::string_view id) { return space.find(id); });
    const auto done = replay.rollouts.size();
    StageCache cache{fs::path(c.cache_dir)};
    auto executor = make_executor(c, space);
    JournalWriter journal(journal_path, replay.complete_bytes);
    SearchEngine engine(c.problem, space, *executor, cache, c.search, std::move(replay), journal.observer());
    out << "resumed after " << done << " rollouts\n";
    return finish(c, engine.run(), out, err);
  });
}

int cmd_report(const fs::path& scores_csv, const std::string& reference_method, const fs::path& output_dir,
               std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ScoreTable table = read_score_csv(scores_csv);
    const RankReport report = compute_ranks(table, reference_method);
    fs::create_directories(output_dir);
    const std::string text = rank_report_table(report);
    write_file(output_dir / "rank_report.json", rank_report_json(report));
    write_file(output_dir / "rank_report.txt", text);
    write_file(output_dir / "rescaled_ns.csv", rescaled_ns_csv(table, reference_method));
    out << text;
    return static_cast<int>(kSuccess);
  });
}

int cmd_ablation(const fs::path& config_path, int trials, const Overrides& overrides, std::ostream& out,
                 std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig c = load(config_path, overrides);
    if (c.executor.kind != ExecutorKind::Landscape) {
      throw Error(ErrorCode::InvalidParams, "ablation needs a landscape executor");
    }
    DirectoryLock lock(c.output_dir);
    const SearchSpace space = obtain_space(c, out);
    const LandscapeSpec base = c.executor.landscape;
    const auto factory = [&](std::uint64_t seed) {
      LandscapeSpec spec = base;
      spec.seed = base.seed + seed;
      return build_landscape(spec, space, c.search.searchable_stages);
    };
    const AblationReport report = run_ablation(space, c.search, trials, c.search.rng_seed, factory);
    write_file(fs::path(c.output_dir) / "ablation.json", ablation_to_json(report));
    out << std::setprecision(6) << "trials " << report.trials.size() << "\nmean best (mcts) "
        << report.mean_mcts << "\nmean best (random) " << report.mean_random << "\nmean difference "
        << report.mean_difference << "\nmcts strict wins " << report.mcts_strict_wins << '\n';
    return static_cast<int>(kSuccess);
  });
}

int cmd_cache_list(const fs::path& config_path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig c = load(config_path, {});
    const StageCache cache{fs::path(c.cache_dir)};
    for (const auto& e : cache.entries()) {
      out << e.fingerprint << ' ' << stage_name(e.stage) << ' ';
      for (std::size_t i = 0; i < e.prefix.size(); ++i) out << (i ? "," : "") << e.prefix[i];
      out << ' ' << e.code.size() << " bytes\n";
    }
    out << cache.size() << " entries\n";
    return static_cast<int>(kSuccess);
  });
}

int cmd_cache_clear(const fs::path& config_path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig c = load(config_path, {});
    StageCache cache{fs::path(c.cache_dir)};
    const std::size_t n = cache.size();
    cache.clear();
    out << "removed " << n << " entries\n";
    return static_cast<int>(kSuccess);
  });
}

}  // namespace stagetree::cli
