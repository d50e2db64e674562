#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stagetree/error.hpp"
#include "stagetree/problem.hpp"
#include "stagetree/simulation.hpp"
#include "stagetree/stage_cache.hpp"
#include "stagetree/tree.hpp"

namespace stagetree {

/// Failure of one pipeline stage inside an executor.
class ExecutorError : public Error {
 public:
  ExecutorError(std::optional<Stage> stage, const std::string& detail);
  std::optional<Stage> stage() const noexcept { return stage_; }

 private:
  std::optional<Stage> stage_;
};

/// Runs the pipeline described by a configuration and reports raw scores.
/// Implementations must replay cached stage code for the matching prefix
/// before producing anything new.
class Executor {
 public:
  virtual ~Executor() = default;
  virtual SimulationResult simulate(const ExperimentConfig& config, const ProblemSpec& problem,
                                    StageCache& cache) = 0;
};

/// Instruction used for a stage that the config leaves open.
std::string default_instruction(Stage stage);

/// One instruction per stage: the default task, specialized by the config's
/// insight for that stage when it has one.
std::vector<StageInstruction> draft_plan(const ExperimentConfig& config);

/// Plan, then code-and-execute stage by stage, then score. Stages whose code
/// is cached under this config's prefix are replayed instead of generated,
/// as long as the cached run is contiguous from the first stage. A failing
/// stage is retried once before ExecutorError is thrown.
class StagedExecutor : public Executor {
 public:
  SimulationResult simulate(const ExperimentConfig& config, const ProblemSpec& problem,
                            StageCache& cache) final;

  std::uint64_t generation_calls() const noexcept { return generation_calls_; }
  std::uint64_t replayed_stages() const noexcept { return replayed_stages_; }

 protected:
  struct Scores {
    double dev = 0.0;
    std::optional<double> test;
    MetricKind metric = MetricKind::F1;
  };

  /// Writes and runs the code for one stage. Throws ExecutorError on failure.
  virtual StageArtifact generate_stage(const StageInstruction& instruction,
                                       const ExperimentConfig& config,
                                       const std::vector<StageArtifact>& previous) = 0;
  /// Reruns previously saved code. Throws ExecutorError on failure.
  virtual void replay_stage(const StageArtifact& /*artifact*/) {}
  virtual Scores score(const ExperimentConfig& config, const std::vector<StageArtifact>& stages) = 0;

 private:
  std::uint64_t generation_calls_ = 0;
  std::uint64_t replayed_stages_ = 0;
};

/// Test double answering from a table of canned results keyed by the
/// config's joined insight ids. Unknown configs raise ExecutorError.
class ScriptedExecutor final : public Executor {
 public:
  void script(const std::vector<std::string>& insight_ids, SimulationResult result);
  SimulationResult simulate(const ExperimentConfig& config, const ProblemSpec& problem,
                            StageCache& cache) override;
  std::uint64_t calls() const noexcept { return calls_; }

 private:
  std::map<std::vector<std::string>, SimulationResult> table_;
  std::uint64_t calls_ = 0;
};

}  // namespace stagetree
