#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace stagetree {

enum class MetricKind { RMSE, F1, F1Weighted };

std::string_view metric_name(MetricKind m) noexcept;
/// Accepts "rmse", "f1", "f1_weighted" / "f1-weighted" / "f1weighted", case-insensitively.
std::optional<MetricKind> metric_from_name(std::string_view name) noexcept;

/// What the search is asked to solve: the task text plus where the data lives.
struct ProblemSpec {
  std::string dataset_name;
  std::string description;
  std::string dataset_info;  // metadata text; sample rows are read from train_path
  std::string target_column;
  MetricKind metric = MetricKind::F1;
  std::string train_path;
  std::string dev_path;
  std::string test_path;
  std::string data_info_path;
  std::string output_dir;

  bool operator==(const ProblemSpec&) const = default;
};

/// Hash of the dataset identity (name, target, metric, split paths).
std::string dataset_fingerprint(const ProblemSpec& problem);

/// Throws ConfigError when a referenced path is missing.
void validate_paths(const ProblemSpec& problem);

/// The executor-facing task prompt: user requirement, data locations and the
/// instruction block about prediction files.
std::string render_task_prompt(const ProblemSpec& problem, std::string_view special_instruction = {});

}  // namespace stagetree
