#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stagetree/problem.hpp"
#include "stagetree/stage.hpp"
#include "stagetree/tree.hpp"

namespace stagetree {

inline constexpr int kDefaultInsightsPerStage = 5;

/// Per-stage pools of insights; the search space the tree is built over.
class SearchSpace {
 public:
  SearchSpace() = default;

  /// Appends unless an insight with the same id is already in the pool.
  /// Returns whether it was added.
  bool add(Insight insight);

  const std::vector<Insight>& pool(Stage stage) const;
  const std::map<Stage, std::vector<Insight>>& per_stage() const noexcept { return per_stage_; }
  std::optional<Insight> find(std::string_view insight_id) const;
  std::size_t total() const noexcept;
  bool empty() const noexcept { return total() == 0; }

  int insights_per_stage = kDefaultInsightsPerStage;

  bool operator==(const SearchSpace& other) const { return per_stage_ == other.per_stage_; }

 private:
  std::map<Stage, std::vector<Insight>> per_stage_;
};

/// Parses the proposal JSON: the first fenced ```json block, or the whole
/// text when no fence exists. Shape: [{"task_type": ..., "insights": [...]}]
/// where an insight is a string or {"text": ..., "id": ...}.
SearchSpace parse_insight_response(std::string_view text);

SearchSpace load_static_insights(const std::filesystem::path& path);

/// Serializes with the same schema, annotating each insight with its id.
std::string serialize_search_space(const SearchSpace& space);
void save_search_space(const SearchSpace& space, const std::filesystem::path& path);

/// The insight proposal prompt filled in for this dataset.
std::string render_insight_prompt(const ProblemSpec& problem, int insights_per_stage);

/// Chat-completion style endpoint description.
struct LLMEndpointConfig {
  std::string base_url;
  std::string model_name;
  double temperature = 0.5;
  std::string api_key_env;
  int max_retries = 2;
  double timeout_seconds = 120.0;

  bool operator==(const LLMEndpointConfig&) const = default;
};

void validate(const LLMEndpointConfig& llm);

struct TranscriptEntry {
  std::string prompt;
  std::string response;  // raw text, or the error description
  bool ok = false;
};

/// Minimal blocking client for an OpenAI-compatible /chat/completions API.
class ChatClient {
 public:
  virtual ~ChatClient() = default;
  /// Returns the first choice's message content. Throws EndpointError.
  virtual std::string complete(const std::string& prompt) = 0;
};

class HttpChatClient final : public ChatClient {
 public:
  explicit HttpChatClient(LLMEndpointConfig config);
  std::string complete(const std::string& prompt) override;

 private:
  LLMEndpointConfig config_;
};

struct Proposal {
  SearchSpace space;
  std::vector<TranscriptEntry> transcript;
};

/// Asks the model for insights, retrying up to llm.max_retries times on
/// endpoint errors or unparseable output. A stage named in the prompt with
/// fewer than `m` insights counts as malformed.
Proposal propose_insights(const ProblemSpec& problem, const LLMEndpointConfig& llm, int m,
                          ChatClient& client);
Proposal propose_insights(const ProblemSpec& problem, const LLMEndpointConfig& llm, int m);

std::string serialize_transcript(const std::vector<TranscriptEntry>& transcript);

}  // namespace stagetree
