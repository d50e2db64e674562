#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stagetree/problem.hpp"
#include "stagetree/stage.hpp"

namespace stagetree {

enum class RunStatus { Ok, Failed };

struct StageInstruction {
  Stage stage;
  std::string instruction;
};

struct StageArtifact {
  Stage stage;
  std::string instruction;
  std::string code;  // begins with stage_marker(stage)
  std::string stdout_excerpt;
  RunStatus status = RunStatus::Ok;
};

struct SimulationResult {
  std::optional<double> dev_score;
  std::optional<double> test_score;
  MetricKind raw_metric = MetricKind::F1;
  std::vector<StageArtifact> stages;
  std::string solution_code;
  RunStatus status = RunStatus::Ok;
  int cache_hits = 0;
  std::string error_detail;

  bool ok() const noexcept { return status == RunStatus::Ok; }
};

/// A result with no score, used when an executor gave up on a configuration.
SimulationResult failed_result(std::string detail);

/// Line that opens every stage section of a solution, e.g.
/// "# [stage] FeatureEngineering\n".
std::string stage_marker(Stage s);

/// Prepends the stage marker when `code` does not already start with it.
std::string with_stage_marker(Stage s, std::string_view code);

/// In-order concatenation of the stage codes.
std::string concatenate_stages(const std::vector<StageArtifact>& stages);

/// Leading sections of `solution_code` whose stage ordinal is <= `upto`.
/// nullopt when the code carries no stage markers or the prefix is empty.
std::optional<std::string> stage_code_prefix(std::string_view solution_code, Stage upto);

}  // namespace stagetree
