#include "stagetree/insight_space.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

#include "stagetree/error.hpp"

namespace stagetree {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::MalformedResponse, what);
}

/// Body of the first ```json fence (or first bare ``` fence); the whole text
/// when there is none.
std::string_view extract_json_block(std::string_view text) {
  std::size_t open = text.find("```json");
  std::size_t body = std::string_view::npos;
  if (open != std::string_view::npos) {
    body = open + 7;
  } else if ((open = text.find("```")) != std::string_view::npos) {
    body = open + 3;
  }
  if (body == std::string_view::npos) return text;
  const std::size_t close = text.find("```", body);
  if (close == std::string_view::npos) malformed("unterminated fenced block");
  return text.substr(body, close - body);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string head_lines(const std::string& path, int n) {
  if (path.empty()) return {};
  std::ifstream in(path);
  std::string out, line;
  for (int i = 0; i < n && std::getline(in, line); ++i) out += line + "\n";
  return out;
}

void replace_all(std::string& text, std::string_view from, std::string_view to) {
  for (std::size_t pos = text.find(from); pos != std::string::npos;
       pos = text.find(from, pos + to.size())) {
    text.replace(pos, from.size(), to);
  }
}

constexpr std::string_view kInsightPrompt = R"(# Dataset Description
{dataset}

# Dataset Metadata
{metadata}

# Dataset Head
{head}

# Instruction
Propose insights to help improve the performance of the model on this dataset.
The insights should be proposed based on the dataset description with different task types.
Each task type should have at least {m} insights.
Make sure each method is diverse enough and can be implemented separately.
Be specific about models' choices, ensemble and tuning techniques, and preprocessing & feature engineering techniques.

# Format
```json
[
    {
        "task_type": "EDA",
        "insights": [
            "insight1",
            "insight2",
            "insight3",
            ...
            "insightN"
        ]
    },
    {
        "task_type": "Data Preprocessing",
        "insights": [
            "insight1",
            "insight2",
            "insight3",
            ...
            "insightN"
        ]
    },
    {
        "task_type": "Feature Engineering",
        "insights": [
            "insight1",
            "insight2",
            "insight3",
            ...
            "insightN"
        ]
    },
    {
        "task_type": "Model Training",
        "insights": [
            "insight1",
            "insight2",
            "insight3",
            ...
            "insightN"
        ]
    }
]
```
)";

// Stages the proposal prompt asks for.
constexpr std::array<Stage, 4> kProposedStages = {Stage::ExploratoryDataAnalysis,
                                                  Stage::DataPreprocessing,
                                                  Stage::FeatureEngineering, Stage::ModelTraining};

}  // namespace

bool SearchSpace::add(Insight insight) {
  auto& pool = per_stage_[insight.stage];
  for (const auto& existing : pool) {
    if (existing.id == insight.id) return false;
  }
  pool.push_back(std::move(insight));
  return true;
}

const std::vector<Insight>& SearchSpace::pool(Stage stage) const {
  static const std::vector<Insight> kEmpty;
  auto it = per_stage_.find(stage);
  return it == per_stage_.end() ? kEmpty : it->second;
}

std::optional<Insight> SearchSpace::find(std::string_view insight_id) const {
  for (const auto& [stage, pool] : per_stage_) {
    for (const auto& i : pool) {
      if (i.id == insight_id) return i;
    }
  }
  return std::nullopt;
}

std::size_t SearchSpace::total() const noexcept {
  std::size_t n = 0;
  for (const auto& [stage, pool] : per_stage_) n += pool.size();
  return n;
}

SearchSpace parse_insight_response(std::string_view text) {
  const std::string_view body = extract_json_block(text);
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::exception& e) {
    malformed(std::string("no parseable JSON: ") + e.what());
  }
  if (!doc.is_array()) malformed("expected a JSON array of task_type blocks");

  SearchSpace space;
  for (const auto& block : doc) {
    if (!block.is_object() || !block.contains("task_type") || !block["task_type"].is_string() ||
        !block.contains("insights") || !block["insights"].is_array()) {
      malformed("each block needs a string task_type and an insights array");
    }
    const std::string tag = block["task_type"].get<std::string>();
    const auto stage = stage_from_task_type(tag);
    if (!stage) malformed("unknown task_type '" + tag + "'");
    for (const auto& item : block["insights"]) {
      std::string insight_text;
      std::optional<std::string> claimed_id;
      if (item.is_string()) {
        insight_text = item.get<std::string>();
      } else if (item.is_object() && item.contains("text") && item["text"].is_string()) {
        insight_text = item["text"].get<std::string>();
        if (item.contains("id")) {
          if (!item["id"].is_string()) malformed("insight id must be a string");
          claimed_id = item["id"].get<std::string>();
        }
      } else {
        malformed("insight entries must be strings or {text, id} objects");
      }
      if (insight_text.empty()) malformed("empty insight under '" + tag + "'");
      Insight insight = Insight::make(*stage, std::move(insight_text));
      if (claimed_id && *claimed_id != insight.id) {
        malformed("insight id " + *claimed_id + " does not match its content");
      }
      space.add(std::move(insight));
    }
  }
  if (space.empty()) malformed("no searchable stage populated");
  return space;
}

SearchSpace load_static_insights(const std::filesystem::path& path) {
  return parse_insight_response(read_file(path));
}

std::string serialize_search_space(const SearchSpace& space) {
  ordered_json doc = ordered_json::array();
  for (const auto& [stage, pool] : space.per_stage()) {
    if (pool.empty()) continue;
    ordered_json block;
    block["task_type"] = task_type_label(stage);
    ordered_json items = ordered_json::array();
    for (const auto& i : pool) items.push_back(ordered_json{{"id", i.id}, {"text", i.text}});
    block["insights"] = std::move(items);
    doc.push_back(std::move(block));
  }
  return doc.dump(2) + "\n";
}

void save_search_space(const SearchSpace& space, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << serialize_search_space(space);
}

std::string render_insight_prompt(const ProblemSpec& problem, int insights_per_stage) {
  std::string prompt(kInsightPrompt);
  std::string metadata = problem.dataset_info;
  if (!problem.data_info_path.empty()) {
    std::ifstream in(problem.data_info_path);
    if (in) {
      std::ostringstream buf;
      buf << in.rdbuf();
      if (!metadata.empty()) metadata += "\n";
      metadata += buf.str();
    }
  }
  replace_all(prompt, "{dataset}", problem.description);
  replace_all(prompt, "{metadata}", metadata);
  replace_all(prompt, "{head}", head_lines(problem.train_path, 6));
  replace_all(prompt, "{m}", std::to_string(insights_per_stage));
  return prompt;
}

void validate(const LLMEndpointConfig& llm) {
  if (llm.temperature < 0.0) throw Error(ErrorCode::ConfigError, "temperature must be >= 0");
  if (llm.max_retries < 0) throw Error(ErrorCode::ConfigError, "max_retries must be >= 0");
  if (llm.base_url.empty()) throw Error(ErrorCode::ConfigError, "llm.base_url is required");
}

Proposal propose_insights(const ProblemSpec& problem, const LLMEndpointConfig& llm, int m,
                          ChatClient& client) {
  if (m < 1) throw Error(ErrorCode::InvalidParams, "insights per stage must be >= 1");
  validate(llm);
  const std::string prompt = render_insight_prompt(problem, m);
  Proposal proposal;
  std::optional<Error> last_error;
  for (int attempt = 0; attempt <= llm.max_retries; ++attempt) {
    std::string response;
    try {
      response = client.complete(prompt);
    } catch (const Error& e) {
      proposal.transcript.push_back({prompt, e.what(), false});
      last_error = e;
      continue;
    }
    try {
      SearchSpace space = parse_insight_response(response);
      for (Stage s : kProposedStages) {
        const auto n = static_cast<int>(space.pool(s).size());
        if (n < m) {
          malformed(std::string(task_type_label(s)) + " has " + std::to_string(n) +
                    " insights, fewer than " + std::to_string(m));
        }
      }
      proposal.transcript.push_back({prompt, response, true});
      space.insights_per_stage = m;
      proposal.space = std::move(space);
      return proposal;
    } catch (const Error& e) {
      proposal.transcript.push_back({prompt, response, false});
      last_error = e;
    }
  }
  throw *last_error;
}

Proposal propose_insights(const ProblemSpec& problem, const LLMEndpointConfig& llm, int m) {
  HttpChatClient client(llm);
  return propose_insights(problem, llm, m, client);
}

std::string serialize_transcript(const std::vector<TranscriptEntry>& transcript) {
  ordered_json doc = ordered_json::array();
  for (const auto& t : transcript) {
    doc.push_back(ordered_json{{"prompt", t.prompt}, {"response", t.response}, {"ok", t.ok}});
  }
  return doc.dump(2) + "\n";
}

}  // namespace stagetree
