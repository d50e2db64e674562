#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stagetree/executor.hpp"
#include "stagetree/insight_space.hpp"

namespace stagetree {

/// Seeded scoring function over configurations:
///   clamp(base + sum utility + sum pairwise interaction + noise, 0, 1)
/// Unknown insight ids contribute nothing. The noise draw depends only on
/// (seed, config), so scores are reproducible in any call order.
struct SyntheticLandscape {
  std::map<std::string, double> per_insight_utility;
  std::map<std::pair<std::string, std::string>, double> pairwise_interaction;  // key sorted
  double base = 0.5;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;

  void set_interaction(const std::string& a, const std::string& b, double weight);
  double interaction(const std::string& a, const std::string& b) const;

  /// Score before clamping and noise.
  double raw_score(std::span<const std::string> insight_ids) const;
  /// Zero-mean Gaussian term for this config; 0 when noise_sigma == 0.
  double noise(std::span<const std::string> insight_ids) const;
};

/// Dev score of `config`; stage artifacts carry synthetic code strings.
/// The test score is the noise-free value.
SimulationResult landscape_score(const ExperimentConfig& config, const SyntheticLandscape& landscape);

/// Staged executor backed by a landscape. Every generate call is counted,
/// which makes it the instrumented mock for cache-reuse checks.
class LandscapeExecutor final : public StagedExecutor {
 public:
  explicit LandscapeExecutor(SyntheticLandscape landscape) : landscape_(std::move(landscape)) {}

  const SyntheticLandscape& landscape() const noexcept { return landscape_; }

 protected:
  StageArtifact generate_stage(const StageInstruction& instruction, const ExperimentConfig& config,
                               const std::vector<StageArtifact>& previous) override;
  Scores score(const ExperimentConfig& config, const std::vector<StageArtifact>& stages) override;

 private:
  SyntheticLandscape landscape_;
};

/// Landscape with one planted configuration: one insight per stage gets a
/// large utility and the planted insights reinforce each other pairwise.
/// Everything else gets small random utilities and interactions.
struct PlantedLandscapeOptions {
  double base = 0.5;
  double noise_sigma = 0.02;
  double planted_utility = 0.10;
  double planted_interaction = 0.06;
  double utility_low = -0.08;
  double utility_high = 0.06;
  double interaction_spread = 0.02;
};

struct PlantedLandscape {
  SyntheticLandscape landscape;
  std::vector<std::string> planted;  // insight ids of the planted config, stage order
};

PlantedLandscape make_planted_landscape(const SearchSpace& space, std::span<const Stage> stages,
                                        std::uint64_t seed, const PlantedLandscapeOptions& options = {});

/// Space of `per_stage` generated insights for each stage in `stages`.
SearchSpace make_synthetic_space(std::span<const Stage> stages, int per_stage);

}  // namespace stagetree
