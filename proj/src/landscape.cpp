#include "stagetree/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "stagetree/hash.hpp"

namespace stagetree {
namespace {

// Portable [0, 1) draw; std::uniform_real_distribution is implementation-defined.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::uint64_t config_seed(std::uint64_t seed, std::span<const std::string> ids) {
  std::string bytes = std::to_string(seed);
  for (const auto& id : ids) {
    bytes.push_back('|');
    bytes += id;
  }
  return std::stoull(sha256_hex(bytes).substr(0, 16), nullptr, 16);
}

std::pair<std::string, std::string> sorted_pair(const std::string& a, const std::string& b) {
  return a < b ? std::pair{a, b} : std::pair{b, a};
}

}  // namespace

void SyntheticLandscape::set_interaction(const std::string& a, const std::string& b, double weight) {
  pairwise_interaction[sorted_pair(a, b)] = weight;
}

double SyntheticLandscape::interaction(const std::string& a, const std::string& b) const {
  auto it = pairwise_interaction.find(sorted_pair(a, b));
  return it == pairwise_interaction.end() ? 0.0 : it->second;
}

double SyntheticLandscape::raw_score(std::span<const std::string> ids) const {
  double score = base;
  for (const auto& id : ids) {
    if (auto it = per_insight_utility.find(id); it != per_insight_utility.end()) score += it->second;
  }
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) score += interaction(ids[i], ids[j]);
  }
  return score;
}

double SyntheticLandscape::noise(std::span<const std::string> ids) const {
  if (noise_sigma == 0.0) return 0.0;
  std::mt19937_64 rng(config_seed(seed, ids));
  // Box-Muller; u1 in (0, 1] keeps the log finite.
  const double u1 = 1.0 - unit(rng);
  const double u2 = unit(rng);
  return noise_sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

SimulationResult landscape_score(const ExperimentConfig& config, const SyntheticLandscape& landscape) {
  const std::vector<std::string> ids = config.insight_ids();
  const double raw = landscape.raw_score(ids);
  SimulationResult result;
  result.dev_score = std::clamp(raw + landscape.noise(ids), 0.0, 1.0);
  result.test_score = std::clamp(raw, 0.0, 1.0);
  result.raw_metric = MetricKind::F1;
  for (const auto& step : draft_plan(config)) {
    result.stages.push_back(StageArtifact{step.stage, step.instruction,
                                          stage_marker(step.stage) + "# " + step.instruction + "\npass\n",
                                          "", RunStatus::Ok});
  }
  result.solution_code = concatenate_stages(result.stages);
  return result;
}

StageArtifact LandscapeExecutor::generate_stage(const StageInstruction& instruction,
                                                const ExperimentConfig& /*config*/,
                                                const std::vector<StageArtifact>& /*previous*/) {
  return StageArtifact{instruction.stage, instruction.instruction,
                       stage_marker(instruction.stage) + "# " + instruction.instruction + "\npass\n",
                       "", RunStatus::Ok};
}

StagedExecutor::Scores LandscapeExecutor::score(const ExperimentConfig& config,
                                                const std::vector<StageArtifact>& /*stages*/) {
  const SimulationResult r = landscape_score(config, landscape_);
  return Scores{*r.dev_score, r.test_score, MetricKind::F1};
}

PlantedLandscape make_planted_landscape(const SearchSpace& space, std::span<const Stage> stages,
                                        std::uint64_t seed, const PlantedLandscapeOptions& options) {
  std::mt19937_64 rng(seed);
  PlantedLandscape out;
  SyntheticLandscape& l = out.landscape;
  l.base = options.base;
  l.noise_sigma = options.noise_sigma;
  l.seed = seed;

  for (Stage s : stages) {
    const auto& pool = space.pool(s);
    if (pool.empty()) continue;
    const auto planted = static_cast<std::size_t>(unit(rng) * static_cast<double>(pool.size()));
    for (std::size_t i = 0; i < pool.size(); ++i) {
      const double u = i == planted
                           ? options.planted_utility
                           : options.utility_low + (options.utility_high - options.utility_low) * unit(rng);
      l.per_insight_utility[pool[i].id] = u;
    }
    out.planted.push_back(pool[planted].id);
  }

  auto is_planted = [&](const std::string& id) {
    return std::find(out.planted.begin(), out.planted.end(), id) != out.planted.end();
  };
  for (std::size_t a = 0; a < stages.size(); ++a) {
    for (std::size_t b = a + 1; b < stages.size(); ++b) {
      for (const auto& x : space.pool(stages[a])) {
        for (const auto& y : space.pool(stages[b])) {
          const double w = is_planted(x.id) && is_planted(y.id)
                               ? options.planted_interaction
                               : options.interaction_spread * (2.0 * unit(rng) - 1.0);
          l.set_interaction(x.id, y.id, w);
        }
      }
    }
  }
  return out;
}

SearchSpace make_synthetic_space(std::span<const Stage> stages, int per_stage) {
  SearchSpace space;
  space.insights_per_stage = per_stage;
  for (Stage s : stages) {
    for (int i = 0; i < per_stage; ++i) {
      space.add(Insight::make(s, std::string(task_type_label(s)) + " option " + std::to_string(i + 1)));
    }
  }
  return space;
}

}  // namespace stagetree
