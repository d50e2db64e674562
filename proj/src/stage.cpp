#include "stagetree/stage.hpp"

#include <algorithm>
#include <cctype>

namespace stagetree {
namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

}  // namespace

std::optional<Stage> stage_from_ordinal(int ordinal) noexcept {
  if (ordinal < 1 || ordinal > 5) return std::nullopt;
  return static_cast<Stage>(ordinal);
}

std::string_view stage_name(Stage s) noexcept {
  switch (s) {
    case Stage::ExploratoryDataAnalysis: return "ExploratoryDataAnalysis";
    case Stage::DataPreprocessing: return "DataPreprocessing";
    case Stage::FeatureEngineering: return "FeatureEngineering";
    case Stage::ModelTraining: return "ModelTraining";
    case Stage::ModelEvaluation: return "ModelEvaluation";
  }
  return "";
}

std::optional<Stage> stage_from_name(std::string_view name) noexcept {
  for (Stage s : kAllStages) {
    if (stage_name(s) == name) return s;
  }
  return std::nullopt;
}

std::string_view task_type_label(Stage s) noexcept {
  switch (s) {
    case Stage::ExploratoryDataAnalysis: return "EDA";
    case Stage::DataPreprocessing: return "Data Preprocessing";
    case Stage::FeatureEngineering: return "Feature Engineering";
    case Stage::ModelTraining: return "Model Training";
    case Stage::ModelEvaluation: return "Model Evaluation";
  }
  return "";
}

std::optional<Stage> stage_from_task_type(std::string_view label) noexcept {
  for (Stage s : kAllStages) {
    if (iequals(task_type_label(s), label)) return s;
  }
  return std::nullopt;
}

}  // namespace stagetree
