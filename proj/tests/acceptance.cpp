// Prints one PASS/FAIL line per acceptance criterion. Exits nonzero when a
// criterion fails, except for failures listed as known blockers in README.md.
#include <boost/multiprecision/cpp_dec_float.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "stagetree/ablation.hpp"
#include "stagetree/evaluation.hpp"
#include "stagetree/journal.hpp"
#include "stagetree/kernels.hpp"
#include "stagetree/landscape.hpp"
#include "stagetree/mcts.hpp"
#include "support.hpp"

using namespace stagetree;
using Big = boost::multiprecision::cpp_dec_float_50;

namespace {

struct Result {
  bool pass = false;
  std::string detail;
  bool known_blocker = false;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int precision = 6) {
  std::ostringstream out;
  out.precision(precision);
  out << v;
  return out.str();
}

// ---------------------------------------------------------------------------

Result case_study() {
  const auto start = Clock::now();
  const testing_support::CaseStudy cs = testing_support::build_case_study();
  const std::vector<std::tuple<std::string, double, std::uint64_t>> printed = {
      {"0", 0.6150206840685731, 10},    {"0-0", 0.6507249985568175, 2},   {"0-1", 0.6464940718972336, 2},
      {"0-2", 0.6296836159165489, 3},   {"0-2-1", 0.6446610772892973, 2}, {"0-3", 0.49056683315196203, 2},
  };
  double worst = 0.0;
  bool ok = true;
  for (const auto& [name, avg, visits] : printed) {
    const NodeId id = cs.ids.at(name);
    worst = std::max(worst, std::abs(subtree_mean(cs.tree, id) - avg));
    ok = ok && cs.tree.node(id).n_visits == visits;
  }
  const NodeId best = best_dev_node(cs.tree);
  const bool best_ok = best == cs.ids.at("0-1-1") && *cs.tree.node(best).sim_score == 0.6944266833187726;
  const double t = seconds_since(start);
  return {ok && worst <= 1e-9 && best_ok && t < 1.0,
          "max |avg error| " + fmt(worst) + ", visits " + (ok ? "match" : "differ") + ", best node " +
              (best_ok ? "0-1-1" : "wrong") + ", " + fmt(t) + " s"};
}

// ---------------------------------------------------------------------------

Big uct_oracle(double value, std::uint64_t visits, std::uint64_t parent, double a_explore, double a_unvisited) {
  const Big n = visits == 0 ? Big(a_unvisited) : Big(visits);
  return Big(value) / n + Big(a_explore) * sqrt(log(Big(parent)) / n);
}

Result uct_oracle_check() {
  std::mt19937_64 rng(20240917);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0, worst_batch = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t parent = 1 + rng() % 100000;
    const std::uint64_t visits = rng() % (parent + 1);
    const double value = visits == 0 ? 0.0 : unit(rng) * static_cast<double>(visits);
    SearchParams p;
    p.alpha_explore = 3.0 * unit(rng);
    p.alpha_unvisited = 1.0 - unit(rng);  // (0, 1]
    const Big want = uct_oracle(value, visits, parent, p.alpha_explore, p.alpha_unvisited);
    const double got = uct_dp(value, visits, parent, p);
    worst = std::max(worst, std::abs(static_cast<double>(Big(got) - want)));

    const kernels::UctBatch b{std::log(static_cast<double>(parent)), p.alpha_explore, p.alpha_unvisited};
    const double v[1] = {value}, n[1] = {static_cast<double>(visits)};
    double out[1];
    kernels::uct_dp_batch(b, v, n, out);
    worst_batch = std::max(worst_batch, std::abs(static_cast<double>(Big(out[0]) - want)));
  }

  bool limits = true;
  SearchParams greedy;
  greedy.alpha_explore = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t visits = 1 + rng() % 1000;
    const double value = unit(rng) * static_cast<double>(visits);
    limits = limits && uct_dp(value, visits, 1 + visits + rng() % 1000, greedy) ==
                           value / static_cast<double>(visits);
    // ln(1) = 0: a parent with one visit contributes no exploration term.
    limits = limits && uct_dp(value, visits, 1, SearchParams{}) == value / static_cast<double>(visits);
  }
  limits = limits && uct_dp(0.0, 0, 1, SearchParams{}) == 0.0;
  return {worst <= 1e-12 && worst_batch <= 1e-12 && limits,
          "max error " + fmt(worst, 3) + " (batch, " + std::string(kernels::isa_name(kernels::active_isa())) +
              ": " + fmt(worst_batch, 3) + "), limits " + (limits ? "exact" : "broken")};
}

// ---------------------------------------------------------------------------

Result ns_oracle_check() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> exponent(-6.0, 6.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double s = std::pow(10.0, exponent(rng));
    const Big want = Big(1) / (Big(1) + log(Big(1) + Big(s)));
    worst = std::max(worst, std::abs(static_cast<double>(Big(normalized_score(s, MetricKind::RMSE)) - want)));
  }
  bool identity = true;
  for (int i = 0; i < 1000; ++i) {
    const double f = unit(rng);
    identity = identity && normalized_score(f, MetricKind::F1) == f && normalized_score(f, MetricKind::F1Weighted) == f;
  }
  const bool zero = normalized_score(0.0, MetricKind::RMSE) == 1.0;
  return {worst <= 1e-12 && identity && zero, "max error " + fmt(worst, 3) + ", F1 identity " +
                                                  (identity ? "exact" : "broken") + ", NS(0) " +
                                                  (zero ? "= 1" : "!= 1")};
}

// ---------------------------------------------------------------------------

// Counts instead of sorting: rank = 1 + #greater + (#equal - 1) / 2.
struct OracleMethod {
  double avg_ns = 0, avg_best_ns = 0, avg_rank = 0, avg_best_rank = 0;
  int wins = 0, losses = 0, top1 = 0;
};

std::map<std::string, OracleMethod> rank_oracle(const ScoreTable& t, const std::string& reference,
                                                std::map<std::tuple<std::string, std::string, int>, double>& ranks) {
  std::set<std::string> datasets, methods;
  for (const auto& e : t.entries) {
    datasets.insert(e.dataset);
    methods.insert(e.method);
  }
  auto ns_of = [](const ScoreEntry& e) {
    return e.metric == MetricKind::RMSE ? 1.0 / (1.0 + std::log1p(e.raw_score)) : e.raw_score;
  };
  std::map<std::string, std::vector<double>> all_ns, all_rank, best_ns, best_rank;
  std::map<std::string, OracleMethod> out;
  for (const auto& d : datasets) {
    std::map<std::string, std::pair<double, double>> best;  // method -> (ns, rank)
    for (const auto& e : t.entries) {
      if (e.dataset != d) continue;
      const double ns = ns_of(e);
      int greater = 0, equal = 0;
      for (const auto& o : t.entries) {
        if (o.dataset != d) continue;
        greater += ns_of(o) > ns;
        equal += ns_of(o) == ns;
      }
      const double rank = 1.0 + greater + (equal - 1) / 2.0;
      ranks[{e.method, d, e.run}] = rank;
      all_ns[e.method].push_back(ns);
      all_rank[e.method].push_back(rank);
      if (!best.contains(e.method) || ns > best[e.method].first) best[e.method] = {ns, rank};
    }
    double top = -1;
    for (const auto& [m, b] : best) top = std::max(top, b.first);
    for (const auto& [m, b] : best) {
      best_ns[m].push_back(b.first);
      best_rank[m].push_back(b.second);
      if (b.first == top) ++out[m].top1;
      if (m != reference && best.contains(reference)) {
        out[m].wins += b.first > best[reference].first;
        out[m].losses += b.first < best[reference].first;
      }
    }
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  for (const auto& m : methods) {
    out[m].avg_ns = mean(all_ns[m]);
    out[m].avg_rank = mean(all_rank[m]);
    out[m].avg_best_ns = mean(best_ns[m]);
    out[m].avg_best_rank = mean(best_rank[m]);
  }
  return out;
}

ScoreTable random_table(std::mt19937_64& rng, bool ties) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n_methods = 1 + static_cast<int>(rng() % 5);
  const int n_datasets = 1 + static_cast<int>(rng() % 10);
  std::vector<int> runs;
  for (int m = 0; m < n_methods; ++m) runs.push_back(1 + static_cast<int>(rng() % 3));
  ScoreTable t;
  for (int d = 0; d < n_datasets; ++d) {
    const MetricKind metric = rng() % 2 ? MetricKind::RMSE : MetricKind::F1;
    for (int m = 0; m < n_methods; ++m) {
      for (int r = 0; r < runs[static_cast<std::size_t>(m)]; ++r) {
        double raw = ties ? static_cast<double>(rng() % 6) / 5.0 : unit(rng);
        if (metric == MetricKind::RMSE) raw *= 10.0;
        t.entries.push_back({"m" + std::to_string(m), "d" + std::to_string(d), r, metric, raw});
      }
    }
  }
  return t;
}

Result rank_oracle_check() {
  const auto start = Clock::now();
  std::mt19937_64 rng(99);
  double worst = 0.0;
  int mismatches = 0, permutation_failures = 0;
  for (int i = 0; i < 200; ++i) {
    const bool ties = i % 2 == 0;
    const ScoreTable t = random_table(rng, ties);
    const std::string reference = "m0";
    const RankReport report = compute_ranks(t, reference);
    std::map<std::tuple<std::string, std::string, int>, double> oracle_ranks;
    const auto oracle = rank_oracle(t, reference, oracle_ranks);
    for (const auto& m : report.methods) {
      const OracleMethod& o = oracle.at(m.method);
      for (double diff : {m.avg_ns - o.avg_ns, m.avg_best_ns - o.avg_best_ns, m.avg_rank - o.avg_rank,
                          m.avg_best_rank - o.avg_best_rank}) {
        worst = std::max(worst, std::abs(diff));
      }
      mismatches += m.top1 != o.top1;
      if (m.method == reference) {
        mismatches += m.wins.has_value() || m.losses.has_value();
      } else {
        mismatches += !m.wins || *m.wins != o.wins || *m.losses != o.losses;
      }
    }
    std::map<std::string, std::vector<double>> per_dataset;
    for (const auto& rr : report.run_ranks) {
      mismatches += rr.rank != oracle_ranks.at({rr.method, rr.dataset, rr.run});
      per_dataset[rr.dataset].push_back(rr.rank);
    }
    if (!ties) {
      for (auto& [d, r] : per_dataset) {
        std::sort(r.begin(), r.end());
        for (std::size_t k = 0; k < r.size(); ++k) permutation_failures += r[k] != static_cast<double>(k + 1);
      }
    }
  }
  const double t = seconds_since(start);
  return {worst <= 1e-12 && mismatches == 0 && permutation_failures == 0 && t < 10.0,
          "200 tables, max average error " + fmt(worst, 3) + ", " + std::to_string(mismatches) +
              " count mismatches, " + std::to_string(permutation_failures) + " permutation failures, " + fmt(t) +
              " s"};
}

// ---------------------------------------------------------------------------

const std::vector<Stage> kAblationStages = {Stage::DataPreprocessing, Stage::FeatureEngineering,
                                            Stage::ModelTraining};

AblationReport ablation(int k) {
  const SearchSpace space = make_synthetic_space(kAblationStages, 5);
  SearchParams params;
  params.k_rollouts = k;
  params.searchable_stages = kAblationStages;
  PlantedLandscapeOptions opts;
  opts.noise_sigma = 0.02;
  return run_ablation(space, params, 20, 1, [&](std::uint64_t seed) {
    return make_planted_landscape(space, kAblationStages, seed, opts).landscape;
  });
}

Result ablation_check() {
  const auto start = Clock::now();
  const AblationReport r = ablation(10);
  const double t = seconds_since(start);
  const bool pass = r.mean_mcts >= r.mean_random && r.mcts_strict_wins >= 12 && t < 30.0;
  return {pass,
          "mean best mcts " + fmt(r.mean_mcts) + " vs random " + fmt(r.mean_random) + ", mcts strict wins " +
              std::to_string(r.mcts_strict_wins) + "/20, " + fmt(t) + " s" +
              (pass ? "" : " (known blocker, see README)"),
          true};
}

Result scaling_check() {
  const AblationReport k1 = ablation(1), k10 = ablation(10), k20 = ablation(20);
  bool monotone = true;
  for (const AblationReport* r : {&k1, &k10, &k20}) {
    for (const auto& trial : r->trials) {
      monotone = monotone && std::is_sorted(trial.mcts_curve.begin(), trial.mcts_curve.end()) &&
                 std::is_sorted(trial.random_curve.begin(), trial.random_curve.end());
    }
  }
  const bool ordered = k20.mean_mcts >= k10.mean_mcts && k10.mean_mcts >= k1.mean_mcts;
  return {monotone && ordered, "mean best mcts k=1 " + fmt(k1.mean_mcts) + ", k=10 " + fmt(k10.mean_mcts) +
                                   ", k=20 " + fmt(k20.mean_mcts) + ", curves " +
                                   (monotone ? "nondecreasing" : "decreasing somewhere")};
}

// ---------------------------------------------------------------------------

ProblemSpec synthetic_problem() {
  ProblemSpec p;
  p.dataset_name = "acceptance";
  p.target_column = "y";
  return p;
}

Result cache_check() {
  const SearchSpace space = make_synthetic_space(kAblationStages, 5);
  const PlantedLandscape planted = make_planted_landscape(space, kAblationStages, 4);
  const ProblemSpec problem = synthetic_problem();
  LandscapeExecutor executor(planted.landscape);
  StageCache cache;
  SearchParams params;
  params.rng_seed = 4;
  SearchEngine engine(problem, space, executor, cache, params);
  const SearchOutcome outcome = engine.run();

  std::set<std::pair<std::vector<std::string>, Stage>> pairs;
  for (const auto& r : outcome.rollouts) {
    const ExperimentConfig cfg = config_path(engine.tree(), r.node);
    for (Stage s : kAllStages) pairs.insert({stage_key(cfg.insights, s), s});
  }
  const std::uint64_t calls = executor.generation_calls();

  bool identical = true;
  for (const auto& r : outcome.rollouts) {
    ExperimentConfig cfg = config_path(engine.tree(), r.node);
    cfg.dataset_fingerprint = dataset_fingerprint(problem);
    const SimulationResult again = executor.simulate(cfg, problem, cache);
    identical = identical && again.cache_hits == 5 && again.solution_code == engine.tree().node(r.node).solution_code;
  }
  const std::uint64_t warm = executor.generation_calls() - calls;
  return {calls == pairs.size() && warm == 0 && identical,
          std::to_string(calls) + " generation calls for " + std::to_string(pairs.size()) +
              " distinct (prefix, stage) pairs, warm re-simulation generated " + std::to_string(warm) +
              ", replays " + (identical ? "byte-identical" : "differ")};
}

// ---------------------------------------------------------------------------

bool same_node(const ExperimentNode& a, const ExperimentNode& b) {
  return a.id == b.id && a.insight == b.insight && a.depth == b.depth && a.value == b.value &&
         a.n_visits == b.n_visits && a.sim_score == b.sim_score && a.test_score == b.test_score &&
         a.solution_code == b.solution_code && a.stage_code == b.stage_code && a.failed == b.failed &&
         a.own_simulations == b.own_simulations && a.sim_sequence == b.sim_sequence && a.children == b.children &&
         a.parent == b.parent;
}

Result determinism_check() {
  const SearchSpace space = make_synthetic_space(kAblationStages, 5);
  const PlantedLandscape planted = make_planted_landscape(space, kAblationStages, 8);
  const ProblemSpec problem = synthetic_problem();
  SearchParams params;
  params.k_rollouts = 20;
  params.rng_seed = 8;

  std::string journals[2], outcomes[2];
  Tree first_tree;
  for (int i = 0; i < 2; ++i) {
    LandscapeExecutor executor(planted.landscape);
    StageCache cache;
    SearchEngine engine(problem, space, executor, cache, params,
                        [&](const TreeEvent& e) { journals[i] += journal_line(e); });
    outcomes[i] = outcome_to_json(engine.run());
    if (i == 0) first_tree = engine.tree();
  }
  const JournalReplay replay = replay_journal(journals[0], [&](std::string_view id) { return space.find(id); });
  bool equal_tree = replay.tree.size() == first_tree.size() && replay.rollouts.size() == 20;
  for (std::size_t i = 0; equal_tree && i < first_tree.size(); ++i) {
    const NodeId id{static_cast<std::uint32_t>(i)};
    equal_tree = same_node(replay.tree.node(id), first_tree.node(id));
  }
  const bool same_journal = journals[0] == journals[1] && !journals[0].empty();
  const bool same_outcome = outcomes[0] == outcomes[1];
  return {same_journal && same_outcome && equal_tree,
          std::string("journals ") + (same_journal ? "identical" : "differ") + ", outcomes " +
              (same_outcome ? "identical" : "differ") + ", replayed tree " + (equal_tree ? "equal" : "differs")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Result()>>> checks = {
      {"case-study golden replay", case_study},
      {"uct-dp oracle", uct_oracle_check},
      {"normalized-score oracle", ns_oracle_check},
      {"rank oracle", rank_oracle_check},
      {"ablation vs random sampling", ablation_check},
      {"rollout scaling", scaling_check},
      {"cache efficiency", cache_check},
      {"determinism", determinism_check},
  };
  int unexpected = 0;
  for (const auto& [name, run] : checks) {
    Result r;
    try {
      r = run();
    } catch (const std::exception& e) {
      r = {false, std::string("threw: ") + e.what()};
    }
    std::cout << (r.pass ? "PASS " : "FAIL ") << name << ": " << r.detail << '\n';
    if (!r.pass && !r.known_blocker) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
