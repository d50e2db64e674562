#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stagetree/insight_space.hpp"
#include "stagetree/landscape.hpp"
#include "stagetree/mcts.hpp"
#include "stagetree/problem.hpp"

namespace stagetree {

enum class ExecutorKind { Landscape, External };
enum class InsightSourceKind { Llm, File };
enum class LandscapeKind { Planted, Flat, Explicit };

struct LandscapeSpec {
  LandscapeKind kind = LandscapeKind::Planted;
  std::uint64_t seed = 0;
  double base = 0.5;
  double noise_sigma = 0.02;
  /// Explicit kind: keyed by insight id or insight text.
  std::map<std::string, double> utilities;
  struct Interaction {
    std::string a;
    std::string b;
    double weight = 0.0;
    bool operator==(const Interaction&) const = default;
  };
  std::vector<Interaction> interactions;

  bool operator==(const LandscapeSpec&) const = default;
};

struct ExecutorSpec {
  ExecutorKind kind = ExecutorKind::Landscape;
  std::vector<std::string> command;  // external, process transport
  std::string url;                   // external, HTTP transport
  std::optional<double> timeout_seconds;
  LandscapeSpec landscape;

  bool operator==(const ExecutorSpec&) const = default;
};

struct InsightSource {
  InsightSourceKind kind = InsightSourceKind::File;
  std::string path;
  int insights_per_stage = kDefaultInsightsPerStage;

  bool operator==(const InsightSource&) const = default;
};

/// Everything a command needs, read from one JSON document. Relative paths
/// resolve against the config file's directory.
struct RunConfig {
  ProblemSpec problem;
  std::optional<LLMEndpointConfig> llm;
  ExecutorSpec executor;
  SearchParams search;
  InsightSource insight_source;
  std::string output_dir = "out";
  std::string cache_dir = "cache";

  bool operator==(const RunConfig&) const = default;

  std::chrono::milliseconds executor_timeout() const;
};

/// Throws ConfigError on malformed or inconsistent documents.
RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);
std::string serialize_run_config(const RunConfig& config);

/// Builds the landscape a config describes over `space`.
SyntheticLandscape build_landscape(const LandscapeSpec& spec, const SearchSpace& space,
                                   std::span<const Stage> stages);

}  // namespace stagetree
