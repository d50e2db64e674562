#include "stagetree/mcts.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "stagetree/error.hpp"
#include "stagetree/evaluation.hpp"
#include "stagetree/kernels.hpp"

namespace stagetree {
namespace {

bool is_executor_failure(ErrorCode code) {
  return code == ErrorCode::ExecutorError || code == ErrorCode::TransportError ||
         code == ErrorCode::ProtocolError || code == ErrorCode::InvalidScore;
}

void check_pools(const SearchSpace& space, const SearchParams& params) {
  for (Stage s : params.searchable_stages) {
    if (space.pool(s).empty()) {
      throw Error(ErrorCode::InvalidParams, "no insights for stage " + std::string(stage_name(s)));
    }
  }
}

std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace

void validate(const SearchParams& p) {
  if (p.k_rollouts < 1) throw Error(ErrorCode::InvalidParams, "k_rollouts must be >= 1");
  if (!(p.alpha_unvisited > 0.0 && p.alpha_unvisited <= 1.0)) {
    throw Error(ErrorCode::InvalidParams, "alpha_unvisited must lie in (0, 1]");
  }
  if (!(p.alpha_explore >= 0.0) || !std::isfinite(p.alpha_explore)) {
    throw Error(ErrorCode::InvalidParams, "alpha_explore must be a finite value >= 0");
  }
  if (p.searchable_stages.empty()) {
    throw Error(ErrorCode::InvalidParams, "at least one searchable stage is required");
  }
  for (std::size_t i = 1; i < p.searchable_stages.size(); ++i) {
    if (ordinal(p.searchable_stages[i]) <= ordinal(p.searchable_stages[i - 1])) {
      throw Error(ErrorCode::InvalidParams, "searchable stages must be strictly increasing");
    }
  }
}

double uct_dp(double value, std::uint64_t visits, std::uint64_t parent_visits,
              const SearchParams& params) {
  if (parent_visits < 1) throw Error(ErrorCode::InvalidParams, "parent_visits must be >= 1");
  const kernels::UctBatch batch{std::log(static_cast<double>(parent_visits)), params.alpha_explore,
                                params.alpha_unvisited};
  const double count = static_cast<double>(visits);
  double out = 0.0;
  kernels::scalar::uct_dp_batch(batch, &value, &count, &out, 1);
  return out;
}

Rng rollout_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

NodeId select(const Tree& tree, const SearchParams& params, Rng& rng) {
  const int max_depth = static_cast<int>(params.searchable_stages.size());
  std::vector<double> values, visits, scores;
  NodeId cur = tree.root();
  for (;;) {
    const ExperimentNode& n = tree.node(cur);
    // A parent with no visits only occurs mid-rollout; treat it as expandable.
    if (n.children.empty() || n.depth >= max_depth || n.n_visits == 0) return cur;

    const std::size_t k = n.children.size();
    values.resize(k);
    visits.resize(k);
    scores.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
      const ExperimentNode& c = tree.node(n.children[i]);
      values[i] = c.value;
      visits[i] = static_cast<double>(c.n_visits);
    }
    const kernels::UctBatch batch{std::log(static_cast<double>(n.n_visits)), params.alpha_explore,
                                  params.alpha_unvisited};
    kernels::uct_dp_batch(batch, values, visits, scores);

    const double best = *std::max_element(scores.begin(), scores.end());
    std::vector<std::size_t> ties;
    for (std::size_t i = 0; i < k; ++i) {
      if (scores[i] == best) ties.push_back(i);
    }
    const std::size_t pick = ties.size() == 1 ? ties.front() : ties[uniform_index(rng, ties.size())];
    cur = n.children[pick];
  }
}

std::vector<NodeId> expand(Tree& tree, NodeId id, const SearchSpace& space,
                           const SearchParams& params) {
  const ExperimentNode& n = tree.node(id);
  const auto depth = static_cast<std::size_t>(n.depth);
  if (depth >= params.searchable_stages.size()) {
    throw Error(ErrorCode::TerminalNode, "node " + std::to_string(id.value) + " is at maximal depth");
  }
  if (!n.children.empty()) return n.children;
  const Stage next = params.searchable_stages[depth];
  const auto& pool = space.pool(next);
  if (pool.empty()) {
    throw Error(ErrorCode::InvalidParams,
                "no insights for stage " + std::string(stage_name(next)));
  }
  std::vector<NodeId> children;
  children.reserve(pool.size());
  for (const auto& insight : pool) children.push_back(tree.add_child(id, insight));
  return children;
}

NodeId best_dev_node(const Tree& tree) {
  const ExperimentNode* best = nullptr;
  for (const auto& n : tree.nodes()) {
    if (!n.simulated() || n.failed || !n.sim_score) continue;
    if (!best || *n.sim_score > *best->sim_score ||
        (*n.sim_score == *best->sim_score && n.sim_sequence < best->sim_sequence)) {
      best = &n;
    }
  }
  if (!best) throw Error(ErrorCode::NoSolution, "no successful simulation in the tree");
  return best->id;
}

std::string outcome_to_json(const SearchOutcome& o) {
  nlohmann::ordered_json j;
  j["best_node"] = o.best_node ? nlohmann::ordered_json(o.best_node->value) : nullptr;
  j["dev_score"] = o.dev_score;
  j["test_score"] = o.test_score ? nlohmann::ordered_json(*o.test_score) : nullptr;
  auto rollouts = nlohmann::ordered_json::array();
  for (const auto& r : o.rollouts) {
    rollouts.push_back({{"index", r.index},
                        {"node", r.node.value},
                        {"score", r.score},
                        {"failed", r.failed},
                        {"best_so_far", r.best_so_far}});
  }
  j["rollouts"] = std::move(rollouts);
  j["config_of_best"] = o.config_of_best;
  j["failed_rollouts"] = o.failed_rollouts;
  return j.dump(2) + "\n";
}

std::string outcome_rollouts_csv(const SearchOutcome& o) {
  std::ostringstream out;
  out.precision(17);
  out << "index,node,score,failed,best_so_far\n";
  for (const auto& r : o.rollouts) {
    out << r.index << ',' << r.node.value << ',' << r.score << ',' << (r.failed ? 1 : 0) << ','
        << r.best_so_far << '\n';
  }
  return out.str();
}

SearchEngine::SearchEngine(const ProblemSpec& problem, const SearchSpace& space, Executor& executor,
                           StageCache& cache, SearchParams params, Tree::Observer observer)
    : problem_(problem),
      space_(space),
      executor_(executor),
      cache_(cache),
      params_(std::move(params)),
      tree_(dataset_fingerprint(problem), std::move(observer)) {
  validate(params_);
  check_pools(space_, params_);
}

SearchEngine::SearchEngine(const ProblemSpec& problem, const SearchSpace& space, Executor& executor,
                           StageCache& cache, SearchParams params, JournalReplay replay,
                           Tree::Observer observer)
    : problem_(problem),
      space_(space),
      executor_(executor),
      cache_(cache),
      params_(std::move(params)),
      tree_(std::move(replay.tree)) {
  validate(params_);
  check_pools(space_, params_);
  if (tree_.fingerprint() != dataset_fingerprint(problem)) {
    throw Error(ErrorCode::FingerprintMismatch,
                "journal fingerprint " + tree_.fingerprint() + " does not match dataset " +
                    dataset_fingerprint(problem));
  }
  double best = 0.0;
  for (const auto& r : replay.rollouts) {
    best = history_.empty() ? r.score : std::max(best, r.score);
    history_.push_back(RolloutPoint{history_.size(), r.node, r.score, r.failed, best});
  }
  tree_.set_observer(std::move(observer));
}

SimulationResult simulate_config(Executor& executor, const ExperimentConfig& config,
                                 const ProblemSpec& problem, StageCache& cache) {
  SimulationResult result;
  try {
    result = executor.simulate(config, problem, cache);
    if (result.ok()) {
      if (!result.dev_score) throw Error(ErrorCode::ProtocolError, "ok result without dev score");
      result.dev_score = normalized_score(*result.dev_score, result.raw_metric);
      if (result.test_score) {
        result.test_score = normalized_score(*result.test_score, result.raw_metric);
      }
    }
  } catch (const Error& e) {
    if (!is_executor_failure(e.code())) throw;
    std::string code = result.solution_code;
    result = failed_result(e.what());
    result.solution_code = std::move(code);
  }
  return result;
}

SimulationResult SearchEngine::simulate_node(NodeId id) {
  return simulate_config(executor_, config_path(tree_, id), problem_, cache_);
}

RolloutRecord SearchEngine::rollout() {
  const auto start = std::chrono::steady_clock::now();
  RolloutRecord record;
  record.index = history_.size();
  Rng rng = rollout_rng(params_.rng_seed, record.index);

  const NodeId selected = select(tree_, params_, rng);
  for (std::optional<NodeId> cur = selected; cur; cur = tree_.node(*cur).parent) {
    record.selected_path.push_back(*cur);
  }
  std::reverse(record.selected_path.begin(), record.selected_path.end());

  if (static_cast<std::size_t>(tree_.node(selected).depth) < params_.searchable_stages.size()) {
    record.expanded_children = expand(tree_, selected, space_, params_);
    record.simulated_node = record.expanded_children[uniform_index(rng, record.expanded_children.size())];
  } else {
    record.simulated_node = selected;
  }

  const SimulationResult result = simulate_node(record.simulated_node);
  tree_.record_simulation(record.simulated_node, result);
  record.score = *tree_.node(record.simulated_node).sim_score;
  record.failed = !result.ok();
  tree_.backpropagate(record.simulated_node, record.score, result.solution_code);

  const double best = history_.empty() ? record.score : std::max(history_.back().best_so_far, record.score);
  history_.push_back(RolloutPoint{record.index, record.simulated_node, record.score, record.failed, best});
  record.duration_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return record;
}

SearchOutcome SearchEngine::run() {
  while (history_.size() < static_cast<std::size_t>(params_.k_rollouts)) rollout();
  return outcome();
}

SearchOutcome SearchEngine::outcome() const {
  SearchOutcome o;
  o.rollouts = history_;
  for (const auto& r : history_) o.failed_rollouts += r.failed ? 1 : 0;
  try {
    const NodeId best = best_dev_node(tree_);
    const ExperimentNode& n = tree_.node(best);
    o.best_node = best;
    o.dev_score = *n.sim_score;
    o.test_score = n.test_score;
    o.solution_code = n.solution_code.value_or("");
    o.config_of_best = config_path(tree_, best).insight_ids();
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoSolution) throw;
  }
  return o;
}

SearchOutcome run_search(const ProblemSpec& problem, const SearchSpace& space, Executor& executor,
                         StageCache& cache, const SearchParams& params, Tree::Observer observer) {
  SearchEngine engine(problem, space, executor, cache, params, std::move(observer));
  return engine.run();
}

}  // namespace stagetree
