#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace stagetree::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 1,
  kEnvironmentError = 2,
  kExecutionFailure = 3,
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> rollouts;
  std::optional<std::string> output_dir;
};

int cmd_propose(const std::filesystem::path& config_path, const Overrides& overrides,
                std::ostream& out, std::ostream& err);
int cmd_search(const std::filesystem::path& config_path, const Overrides& overrides,
               std::ostream& out, std::ostream& err);
int cmd_resume(const std::filesystem::path& journal_path,
               const std::filesystem::path& config_path, const Overrides& overrides,
               std::ostream& out, std::ostream& err);
int cmd_report(const std::filesystem::path& scores_csv, const std::string& reference_method,
               const std::filesystem::path& output_dir, std::ostream& out, std::ostream& err);
int cmd_ablation(const std::filesystem::path& config_path, int trials, const Overrides& overrides,
                 std::ostream& out, std::ostream& err);
int cmd_cache_list(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err);
int cmd_cache_clear(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err);

}  // namespace stagetree::cli
