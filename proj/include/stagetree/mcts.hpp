#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "stagetree/executor.hpp"
#include "stagetree/insight_space.hpp"
#include "stagetree/journal.hpp"
#include "stagetree/tree.hpp"

namespace stagetree {

struct SearchParams {
  int k_rollouts = 10;
  double alpha_explore = 1.4;
  double alpha_unvisited = 0.8;
  std::vector<Stage> searchable_stages = {Stage::DataPreprocessing, Stage::FeatureEngineering,
                                          Stage::ModelTraining};
  std::uint64_t rng_seed = 0;

  bool operator==(const SearchParams&) const = default;
};

/// Throws InvalidParams unless k >= 1, alpha_unvisited in (0, 1],
/// alpha_explore >= 0 and the stages are non-empty and strictly increasing.
void validate(const SearchParams& params);

/// Depth-preferred UCT:
///   value/n + alpha_explore * sqrt(ln(parent_visits) / n)
/// where n is alpha_unvisited for an unvisited node and its visit count
/// otherwise. Throws InvalidParams when parent_visits < 1.
double uct_dp(double value, std::uint64_t visits, std::uint64_t parent_visits,
              const SearchParams& params);

using Rng = std::mt19937_64;

/// Generator for rollout `index` of a search seeded with `seed`. Rollouts
/// draw from independent streams so an interrupted search resumes exactly.
Rng rollout_rng(std::uint64_t seed, std::uint64_t index);

/// Descends from the root by argmax UCT-DP (ties broken by `rng`) and stops
/// at the first node without children or at maximal searchable depth.
NodeId select(const Tree& tree, const SearchParams& params, Rng& rng);

/// Creates one child per insight of the next searchable stage's pool; a
/// node that already has children is returned unchanged. Throws
/// TerminalNode at maximal depth.
std::vector<NodeId> expand(Tree& tree, NodeId id, const SearchSpace& space,
                           const SearchParams& params);

/// Runs the executor and normalizes its scores. Executor, transport,
/// protocol and score errors become a failed result.
SimulationResult simulate_config(Executor& executor, const ExperimentConfig& config,
                                 const ProblemSpec& problem, StageCache& cache);

/// Highest dev score among simulated, non-failed nodes; ties go to the node
/// simulated first. Throws NoSolution when there is none.
NodeId best_dev_node(const Tree& tree);

struct RolloutRecord {
  std::uint64_t index = 0;
  std::vector<NodeId> selected_path;
  std::vector<NodeId> expanded_children;
  NodeId simulated_node;
  double score = 0.0;
  bool failed = false;
  double duration_seconds = 0.0;
};

struct RolloutPoint {
  std::uint64_t index = 0;
  NodeId node;
  double score = 0.0;
  bool failed = false;
  double best_so_far = 0.0;
};

struct SearchOutcome {
  std::optional<NodeId> best_node;
  double dev_score = 0.0;
  std::optional<double> test_score;
  std::string solution_code;
  std::vector<std::string> config_of_best;
  std::vector<RolloutPoint> rollouts;
  std::uint64_t failed_rollouts = 0;
};

std::string outcome_to_json(const SearchOutcome& outcome);
/// index,node,score,failed,best_so_far
std::string outcome_rollouts_csv(const SearchOutcome& outcome);

/// The rollout loop: select, expand, sample a child uniformly, simulate,
/// record, backpropagate. Executor failures become score-0 failed results.
class SearchEngine {
 public:
  SearchEngine(const ProblemSpec& problem, const SearchSpace& space, Executor& executor,
               StageCache& cache, SearchParams params, Tree::Observer observer = {});

  /// Continues from a tree rebuilt out of a journal.
  SearchEngine(const ProblemSpec& problem, const SearchSpace& space, Executor& executor,
               StageCache& cache, SearchParams params, JournalReplay replay,
               Tree::Observer observer = {});

  RolloutRecord rollout();

  /// Runs rollouts until `params.k_rollouts` are complete.
  SearchOutcome run();

  SearchOutcome outcome() const;

  const Tree& tree() const noexcept { return tree_; }
  Tree& tree() noexcept { return tree_; }
  std::uint64_t completed_rollouts() const noexcept { return history_.size(); }
  const SearchParams& params() const noexcept { return params_; }

 private:
  SimulationResult simulate_node(NodeId id);

  const ProblemSpec& problem_;
  const SearchSpace& space_;
  Executor& executor_;
  StageCache& cache_;
  SearchParams params_;
  Tree tree_;
  std::vector<RolloutPoint> history_;
};

/// run_search as a single call.
SearchOutcome run_search(const ProblemSpec& problem, const SearchSpace& space, Executor& executor,
                         StageCache& cache, const SearchParams& params,
                         Tree::Observer observer = {});

}  // namespace stagetree
