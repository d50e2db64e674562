#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "stagetree/landscape.hpp"
#include "stagetree/mcts.hpp"

namespace stagetree {

/// Simulates up to `k` distinct full configurations (one insight per stage in
/// `stages`) drawn uniformly without replacement. With k at least the number
/// of configurations every one is tried.
SearchOutcome random_search(const ProblemSpec& problem, const SearchSpace& space,
                            std::span<const Stage> stages, Executor& executor, StageCache& cache,
                            int k, std::uint64_t seed);

/// Number of full configurations over `stages`.
std::uint64_t full_config_count(const SearchSpace& space, std::span<const Stage> stages);

struct AblationTrial {
  std::uint64_t seed = 0;
  double mcts_best = 0.0;
  double random_best = 0.0;
  std::vector<double> mcts_curve;
  std::vector<double> random_curve;
};

struct AblationReport {
  std::vector<AblationTrial> trials;
  double mean_mcts = 0.0;
  double mean_random = 0.0;
  double mean_difference = 0.0;  // mean(mcts_best - random_best)
  int mcts_strict_wins = 0;
};

using LandscapeFactory = std::function<SyntheticLandscape(std::uint64_t seed)>;

/// For each trial seed (base_seed + t) builds a landscape and runs MCTS and
/// random sampling with the same budget k = params.k_rollouts.
AblationReport run_ablation(const SearchSpace& space, const SearchParams& params, int trials,
                            std::uint64_t base_seed, const LandscapeFactory& make_landscape);

std::string ablation_to_json(const AblationReport& report);

}  // namespace stagetree
