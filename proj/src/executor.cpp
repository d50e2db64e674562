#include "stagetree/executor.hpp"

#include "stagetree/external_executor.hpp"

namespace stagetree {

ExecutorError::ExecutorError(std::optional<Stage> stage, const std::string& detail)
    : Error(ErrorCode::ExecutorError,
            (stage ? std::string(stage_name(*stage)) + ": " : std::string()) + detail),
      stage_(stage) {}

std::string default_instruction(Stage stage) {
  switch (stage) {
    case Stage::ExploratoryDataAnalysis:
      return "Explore the train and dev data: column types, missing values, target distribution";
    case Stage::DataPreprocessing:
      return "Clean the train, dev and test data consistently: impute, encode and scale features";
    case Stage::FeatureEngineering:
      return "Derive additional features for the train, dev and test data";
    case Stage::ModelTraining:
      return "Fit candidate models on the train data and compare them on the dev data";
    case Stage::ModelEvaluation:
      return "Score the final model on the dev data and write dev and test predictions";
  }
  return {};
}

std::vector<StageInstruction> draft_plan(const ExperimentConfig& config) {
  std::vector<StageInstruction> plan;
  plan.reserve(kAllStages.size());
  for (Stage s : kAllStages) {
    std::string text = default_instruction(s);
    for (const auto& insight : config.insights) {
      if (insight.stage == s) {
        text += ". Apply this approach: " + insight.text;
        break;
      }
    }
    plan.push_back(StageInstruction{s, std::move(text)});
  }
  return plan;
}

SimulationResult StagedExecutor::simulate(const ExperimentConfig& config, const ProblemSpec& /*problem*/,
                                          StageCache& cache) {
  validate_config(config);
  const std::vector<StageInstruction> plan = draft_plan(config);
  const std::vector<CacheEntry> cached = replayable_prefix(cache, config);

  SimulationResult result;
  result.stages.reserve(plan.size());
  auto run_with_retry = [&](auto&& attempt) {
    try {
      attempt();
    } catch (const ExecutorError&) {
      attempt();
    }
  };

  try {
    for (std::size_t i = 0; i < plan.size(); ++i) {
      const StageInstruction& step = plan[i];
      StageArtifact artifact;
      if (i < cached.size()) {
        artifact.stage = step.stage;
        artifact.instruction = cached[i].instruction;
        artifact.code = cached[i].code;
        run_with_retry([&] { replay_stage(artifact); });
        ++replayed_stages_;
        ++result.cache_hits;
      } else {
        run_with_retry([&] {
          ++generation_calls_;
          artifact = generate_stage(step, config, result.stages);
        });
        artifact.stage = step.stage;
        artifact.code = with_stage_marker(step.stage, artifact.code);
      }
      result.stages.push_back(std::move(artifact));
    }
  } catch (const ExecutorError&) {
    result.solution_code = concatenate_stages(result.stages);
    store_stages(cache, config, result);
    throw;
  }

  const Scores scores = score(config, result.stages);
  result.dev_score = scores.dev;
  result.test_score = scores.test;
  result.raw_metric = scores.metric;
  result.solution_code = concatenate_stages(result.stages);
  result.status = RunStatus::Ok;
  store_stages(cache, config, result);
  return result;
}

void ScriptedExecutor::script(const std::vector<std::string>& insight_ids, SimulationResult result) {
  table_[insight_ids] = std::move(result);
}

SimulationResult ScriptedExecutor::simulate(const ExperimentConfig& config, const ProblemSpec&,
                                            StageCache&) {
  ++calls_;
  auto it = table_.find(config.insight_ids());
  if (it == table_.end()) throw ExecutorError(std::nullopt, "no scripted result for this config");
  if (!it->second.ok()) throw ExecutorError(std::nullopt, it->second.error_detail);
  return it->second;
}

}  // namespace stagetree
