#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace stagetree {

/// The five ordered phases of a tabular ML pipeline. Underlying values are the
/// 1-based ordinals.
enum class Stage : std::uint8_t {
  ExploratoryDataAnalysis = 1,
  DataPreprocessing = 2,
  FeatureEngineering = 3,
  ModelTraining = 4,
  ModelEvaluation = 5,
};

inline constexpr std::array<Stage, 5> kAllStages = {
    Stage::ExploratoryDataAnalysis, Stage::DataPreprocessing, Stage::FeatureEngineering,
    Stage::ModelTraining, Stage::ModelEvaluation};

constexpr int ordinal(Stage s) noexcept { return static_cast<int>(s); }

std::optional<Stage> stage_from_ordinal(int ordinal) noexcept;

/// Canonical identifier, e.g. "FeatureEngineering". Used in files and on the wire.
std::string_view stage_name(Stage s) noexcept;
std::optional<Stage> stage_from_name(std::string_view name) noexcept;

/// Task-type label used by the insight proposal format, e.g. "Feature Engineering".
std::string_view task_type_label(Stage s) noexcept;
/// Case-insensitive exact match against the task-type labels. No fuzzy matching.
std::optional<Stage> stage_from_task_type(std::string_view label) noexcept;

}  // namespace stagetree
