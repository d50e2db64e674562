#include "stagetree/wire.hpp"

#include <json.hpp>

#include <cmath>

#include "stagetree/error.hpp"
#include "stagetree/executor.hpp"

namespace stagetree::wire {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void protocol_error(const std::string& what) {
  throw Error(ErrorCode::ProtocolError, what);
}

Stage parse_stage(const json& j, std::string_view field) {
  if (!j.is_string()) protocol_error(std::string(field) + " must be a stage name");
  const auto s = stage_from_name(j.get<std::string>());
  if (!s) protocol_error("unknown stage '" + j.get<std::string>() + "'");
  return *s;
}

double parse_score(const json& j, std::string_view field, MetricKind metric) {
  if (!j.is_number()) protocol_error(std::string(field) + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) protocol_error(std::string(field) + " is not finite");
  if (metric == MetricKind::RMSE ? v < 0.0 : (v < 0.0 || v > 1.0)) {
    protocol_error(std::string(field) + " out of range for " + std::string(metric_name(metric)));
  }
  return v;
}

std::string get_string(const json& obj, const char* key, bool required = true) {
  if (!obj.contains(key) || obj[key].is_null()) {
    if (required) protocol_error(std::string("missing field '") + key + "'");
    return {};
  }
  if (!obj[key].is_string()) protocol_error(std::string("field '") + key + "' must be a string");
  return obj[key].get<std::string>();
}

}  // namespace

std::string encode_request(const SimulationRequest& r) {
  ordered_json problem = {
      {"description", r.problem.description},
      {"target_column", r.problem.target_column},
      {"metric", metric_name(r.problem.metric)},
      {"train_path", r.problem.train_path},
      {"dev_path", r.problem.dev_path},
      {"test_path", r.problem.test_path},
      {"data_info_path", r.problem.data_info_path},
      {"output_dir", r.problem.output_dir},
      {"dataset_name", r.problem.dataset_name},
      {"task_prompt", render_task_prompt(r.problem)},
  };
  ordered_json config = ordered_json::array();
  for (const auto& i : r.config) {
    config.push_back({{"stage", stage_name(i.stage)}, {"insight_id", i.id}, {"text", i.text}});
  }
  ordered_json cached = ordered_json::array();
  for (const auto& c : r.cached_stages) {
    cached.push_back({{"stage", stage_name(c.stage)}, {"code", c.code}});
  }
  ordered_json j = {{"protocol_version", kProtocolVersion},
                    {"problem", std::move(problem)},
                    {"config", std::move(config)},
                    {"cached_stages", std::move(cached)},
                    {"seed", r.seed}};
  return j.dump();
}

SimulationRequest decode_request(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    protocol_error(std::string("request is not JSON: ") + e.what());
  }
  if (!j.is_object() || j.value("protocol_version", 0) != kProtocolVersion) {
    protocol_error("unsupported protocol_version");
  }
  SimulationRequest r;
  try {
    const json& p = j.at("problem");
    r.problem.description = get_string(p, "description", false);
    r.problem.target_column = get_string(p, "target_column");
    const auto metric = metric_from_name(get_string(p, "metric"));
    if (!metric) protocol_error("unknown metric");
    r.problem.metric = *metric;
    r.problem.train_path = get_string(p, "train_path");
    r.problem.dev_path = get_string(p, "dev_path");
    r.problem.test_path = get_string(p, "test_path");
    r.problem.data_info_path = get_string(p, "data_info_path", false);
    r.problem.output_dir = get_string(p, "output_dir");
    r.problem.dataset_name = get_string(p, "dataset_name", false);
    for (const auto& c : j.at("config")) {
      const Stage s = parse_stage(c.at("stage"), "config.stage");
      Insight insight = Insight::make(s, get_string(c, "text"));
      insight.id = get_string(c, "insight_id");
      r.config.push_back(std::move(insight));
    }
    for (const auto& c : j.at("cached_stages")) {
      r.cached_stages.push_back(CachedStage{parse_stage(c.at("stage"), "cached_stages.stage"),
                                            get_string(c, "code")});
    }
    r.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    protocol_error(std::string("malformed request: ") + e.what());
  }
  return r;
}

SimulationResult decode_response(std::string_view text, MetricKind metric) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    protocol_error(std::string("response is not JSON: ") + e.what());
  }
  if (!j.is_object()) protocol_error("response must be a JSON object");
  if (!j.contains("protocol_version") || !j["protocol_version"].is_number_integer() ||
      j["protocol_version"].get<int>() != kProtocolVersion) {
    protocol_error("unsupported or missing protocol_version");
  }
  const std::string status = get_string(j, "status");

  if (status == "error") {
    if (!j.contains("error") || !j["error"].is_object()) protocol_error("error response without error object");
    const json& e = j["error"];
    std::optional<Stage> stage;
    if (e.contains("stage") && !e["stage"].is_null()) stage = parse_stage(e["stage"], "error.stage");
    throw ExecutorError(stage, get_string(e, "message"));
  }
  if (status != "ok") protocol_error("status must be \"ok\" or \"error\"");

  SimulationResult r;
  r.raw_metric = metric;
  if (!j.contains("dev_score") || j["dev_score"].is_null()) protocol_error("ok response without dev_score");
  r.dev_score = parse_score(j["dev_score"], "dev_score", metric);
  if (j.contains("test_score") && !j["test_score"].is_null()) {
    r.test_score = parse_score(j["test_score"], "test_score", metric);
  }
  if (!j.contains("stages") || !j["stages"].is_array()) protocol_error("missing stages array");
  const json& stages = j["stages"];
  if (stages.size() != kAllStages.size()) {
    protocol_error("expected " + std::to_string(kAllStages.size()) + " stages, got " +
                   std::to_string(stages.size()));
  }
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const json& s = stages[i];
    if (!s.is_object()) protocol_error("stage entries must be objects");
    const Stage stage = parse_stage(s.contains("stage") ? s["stage"] : json(), "stages.stage");
    if (stage != kAllStages[i]) protocol_error("stages out of order");
    const std::string stage_status = get_string(s, "status");
    if (stage_status != "ok") protocol_error("ok response contains a failed stage");
    std::string code = get_string(s, "code");
    if (code.empty()) protocol_error("stage " + std::string(stage_name(stage)) + " has no code");
    r.stages.push_back(StageArtifact{stage, get_string(s, "instruction", false),
                                     with_stage_marker(stage, code), "", RunStatus::Ok});
  }
  r.solution_code = concatenate_stages(r.stages);
  r.status = RunStatus::Ok;
  return r;
}

std::string encode_response(const SimulationResult& result) {
  ordered_json stages = ordered_json::array();
  for (const auto& s : result.stages) {
    stages.push_back({{"stage", stage_name(s.stage)},
                      {"instruction", s.instruction},
                      {"code", s.code},
                      {"status", s.status == RunStatus::Ok ? "ok" : "error"}});
  }
  ordered_json j = {{"protocol_version", kProtocolVersion}, {"status", "ok"}};
  j["dev_score"] = result.dev_score ? ordered_json(*result.dev_score) : nullptr;
  if (result.test_score) j["test_score"] = *result.test_score;
  j["stages"] = std::move(stages);
  return j.dump();
}

std::string encode_error_response(std::optional<Stage> stage, std::string_view message) {
  ordered_json j = {{"protocol_version", kProtocolVersion}, {"status", "error"}};
  j["error"] = {{"stage", stage ? ordered_json(stage_name(*stage)) : ordered_json(nullptr)},
                {"message", message}};
  return j.dump();
}

}  // namespace stagetree::wire
