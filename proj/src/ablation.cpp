#include "stagetree/ablation.hpp"

#include <json.hpp>

#include <set>

#include "stagetree/error.hpp"

namespace stagetree {
namespace {

NodeId child_for(Tree& tree, NodeId parent, const Insight& insight) {
  for (NodeId c : tree.node(parent).children) {
    if (tree.node(c).insight->id == insight.id) return c;
  }
  return tree.add_child(parent, insight);
}

ProblemSpec synthetic_problem() {
  ProblemSpec p;
  p.dataset_name = "synthetic";
  p.target_column = "target";
  p.metric = MetricKind::F1;
  return p;
}

}  // namespace

std::uint64_t full_config_count(const SearchSpace& space, std::span<const Stage> stages) {
  std::uint64_t total = 1;
  for (Stage s : stages) total *= space.pool(s).size();
  return stages.empty() ? 0 : total;
}

SearchOutcome random_search(const ProblemSpec& problem, const SearchSpace& space,
                            std::span<const Stage> stages, Executor& executor, StageCache& cache,
                            int k, std::uint64_t seed) {
  if (k < 1) throw Error(ErrorCode::InvalidParams, "k must be >= 1");
  const std::uint64_t total = full_config_count(space, stages);
  if (total == 0) throw Error(ErrorCode::InvalidParams, "search space has an empty stage");
  const std::uint64_t budget = std::min<std::uint64_t>(static_cast<std::uint64_t>(k), total);

  Rng rng(seed);
  std::uniform_int_distribution<std::uint64_t> draw(0, total - 1);
  std::set<std::uint64_t> used;
  Tree tree(dataset_fingerprint(problem));
  SearchOutcome out;
  double best = 0.0;
  while (used.size() < budget) {
    std::uint64_t index = draw(rng);
    if (!used.insert(index).second) continue;

    NodeId node = tree.root();
    for (Stage s : stages) {
      const auto& pool = space.pool(s);
      node = child_for(tree, node, pool[index % pool.size()]);
      index /= pool.size();
    }
    const SimulationResult result = simulate_config(executor, config_path(tree, node), problem, cache);
    tree.record_simulation(node, result);
    const double score = *tree.node(node).sim_score;
    tree.backpropagate(node, score, result.solution_code);
    best = out.rollouts.empty() ? score : std::max(best, score);
    out.rollouts.push_back(RolloutPoint{out.rollouts.size(), node, score, !result.ok(), best});
    out.failed_rollouts += result.ok() ? 0 : 1;
  }

  try {
    const NodeId b = best_dev_node(tree);
    const ExperimentNode& n = tree.node(b);
    out.best_node = b;
    out.dev_score = *n.sim_score;
    out.test_score = n.test_score;
    out.solution_code = n.solution_code.value_or("");
    out.config_of_best = config_path(tree, b).insight_ids();
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoSolution) throw;
  }
  return out;
}

AblationReport run_ablation(const SearchSpace& space, const SearchParams& params, int trials,
                            std::uint64_t base_seed, const LandscapeFactory& make_landscape) {
  validate(params);
  if (trials < 1) throw Error(ErrorCode::InvalidParams, "trials must be >= 1");
  const ProblemSpec problem = synthetic_problem();
  AblationReport report;
  for (int t = 0; t < trials; ++t) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(t);
    const SyntheticLandscape landscape = make_landscape(seed);

    SearchParams p = params;
    p.rng_seed = seed;
    LandscapeExecutor mcts_executor(landscape);
    StageCache mcts_cache;
    const SearchOutcome mcts = run_search(problem, space, mcts_executor, mcts_cache, p);

    LandscapeExecutor random_executor(landscape);
    StageCache random_cache;
    const SearchOutcome random = random_search(problem, space, params.searchable_stages, random_executor,
                                               random_cache, params.k_rollouts, seed);

    AblationTrial trial{seed, mcts.dev_score, random.dev_score, {}, {}};
    for (const auto& r : mcts.rollouts) trial.mcts_curve.push_back(r.best_so_far);
    for (const auto& r : random.rollouts) trial.random_curve.push_back(r.best_so_far);
    report.trials.push_back(std::move(trial));
  }
  double diff = 0.0;
  for (const auto& t : report.trials) {
    report.mean_mcts += t.mcts_best;
    report.mean_random += t.random_best;
    diff += t.mcts_best - t.random_best;
    report.mcts_strict_wins += t.mcts_best > t.random_best ? 1 : 0;
  }
  const auto n = static_cast<double>(report.trials.size());
  report.mean_mcts /= n;
  report.mean_random /= n;
  report.mean_difference = diff / n;
  return report;
}

std::string ablation_to_json(const AblationReport& report) {
  nlohmann::ordered_json j;
  j["mean_mcts"] = report.mean_mcts;
  j["mean_random"] = report.mean_random;
  j["mean_difference"] = report.mean_difference;
  j["mcts_strict_wins"] = report.mcts_strict_wins;
  auto trials = nlohmann::ordered_json::array();
  for (const auto& t : report.trials) {
    trials.push_back({{"seed", t.seed},
                      {"mcts_best", t.mcts_best},
                      {"random_best", t.random_best},
                      {"mcts_curve", t.mcts_curve},
                      {"random_curve", t.random_curve}});
  }
  j["trials"] = std::move(trials);
  return j.dump(2) + "\n";
}

}  // namespace stagetree
