#include "stagetree/problem.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <string>

#include "stagetree/error.hpp"
#include "stagetree/hash.hpp"

namespace stagetree {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

void replace_all(std::string& text, std::string_view from, std::string_view to) {
  for (std::size_t pos = text.find(from); pos != std::string::npos;
       pos = text.find(from, pos + to.size())) {
    text.replace(pos, from.size(), to);
  }
}

constexpr std::string_view kTaskPrompt = R"(# User requirement
This is a {datasetname} dataset. 
Your goal is to predict the target column `{target_col}`.
Perform data analysis, data preprocessing, feature engineering, and modeling to predict the target. Report {metric} on the eval data. Do not plot or make any visualizations.

# Data dir
train set (with labels): {train_path}
dev set (with labels): {dev_path}
test set (without labels): {test_path}
dataset description: {data_info_path} 
(During EDA, you can use this file 
to get additional information about the dataset)
)";

constexpr std::string_view kInstruction = R"(
## Attention
1. Please do not leak the target label in any form during training.
2. Test set does not have the target column.
3. When conducting data exploration or analysis, print out the results of your findings.
4. You should perform transformations on train, dev, and test sets at the same time (it's a good idea to define functions for this and avoid code repetition).
5. When scaling or transforming features, make sure the target column is not included.
6. You could utilize dev set to validate and improve model training. {special_instruction}

## Saving Dev and Test Predictions
1. Save the prediction results of BOTH the dev set and test set in `dev_predictions.csv` and `test_predictions.csv` respectively in the output directory. 
- Both files should contain a single column named `target` with the predicted values.
2. Make sure the prediction results are in the same format as the target column in the training set. 
- For instance, if the target column is categorical, the prediction results should be categorical as well.

## Output Performance
Print the train and dev set performance in the last step.

# Output dir
{output_dir}
)";

}  // namespace

std::string_view metric_name(MetricKind m) noexcept {
  switch (m) {
    case MetricKind::RMSE: return "rmse";
    case MetricKind::F1: return "f1";
    case MetricKind::F1Weighted: return "f1_weighted";
  }
  return "";
}

std::optional<MetricKind> metric_from_name(std::string_view name) noexcept {
  const std::string n = lower(name);
  if (n == "rmse") return MetricKind::RMSE;
  if (n == "f1") return MetricKind::F1;
  if (n == "f1_weighted" || n == "f1-weighted" || n == "f1weighted" || n == "f1 weighted") {
    return MetricKind::F1Weighted;
  }
  return std::nullopt;
}

std::string dataset_fingerprint(const ProblemSpec& p) {
  std::string identity;
  for (std::string_view part : {std::string_view(p.dataset_name), std::string_view(p.target_column),
                                metric_name(p.metric), std::string_view(p.train_path),
                                std::string_view(p.dev_path), std::string_view(p.test_path)}) {
    identity.append(part);
    identity.push_back('\x1f');
  }
  return short_hash(identity);
}

void validate_paths(const ProblemSpec& p) {
  for (const std::string* path : {&p.train_path, &p.dev_path, &p.test_path, &p.data_info_path}) {
    if (!path->empty() && !std::filesystem::exists(*path)) {
      throw Error(ErrorCode::ConfigError, "dataset path does not exist: " + *path);
    }
  }
}

std::string render_task_prompt(const ProblemSpec& p, std::string_view special_instruction) {
  std::string prompt(kTaskPrompt);
  replace_all(prompt, "{datasetname}", p.dataset_name);
  replace_all(prompt, "{target_col}", p.target_column);
  replace_all(prompt, "{metric}", metric_name(p.metric));
  replace_all(prompt, "{train_path}", p.train_path);
  replace_all(prompt, "{dev_path}", p.dev_path);
  replace_all(prompt, "{test_path}", p.test_path);
  replace_all(prompt, "{data_info_path}", p.data_info_path);
  std::string instruction(kInstruction);
  replace_all(instruction, "{special_instruction}", special_instruction);
  replace_all(instruction, "{output_dir}", p.output_dir);
  return prompt + instruction;
}

}  // namespace stagetree
