#include "stagetree/run_config.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

#include "stagetree/error.hpp"

namespace stagetree {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr std::chrono::hours kExternalTimeout{1};
constexpr std::chrono::seconds kLandscapeTimeout{5};

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::ConfigError, what); }

void reject_unknown(const json& obj, std::string_view where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) config_error(std::string(where) + " must be an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) config_error("unknown key '" + key + "' in " + std::string(where));
  }
}

template <typename T>
T get(const json& obj, const char* key, std::string_view where, T fallback) {
  if (!obj.contains(key) || obj[key].is_null()) return fallback;
  try {
    return obj[key].get<T>();
  } catch (const json::exception&) {
    config_error(std::string(where) + "." + key + " has the wrong type");
  }
}

template <typename T>
T require(const json& obj, const char* key, std::string_view where) {
  if (!obj.contains(key) || obj[key].is_null()) config_error(std::string(where) + "." + key + " is required");
  return get<T>(obj, key, where, T{});
}

std::string resolve(const std::string& path, const std::filesystem::path& base) {
  if (path.empty() || base.empty()) return path;
  const std::filesystem::path p(path);
  return p.is_absolute() ? path : (base / p).lexically_normal().string();
}

Stage parse_stage(const std::string& name) {
  if (auto s = stage_from_name(name)) return *s;
  if (auto s = stage_from_task_type(name)) return *s;
  config_error("unknown stage '" + name + "'");
}

ProblemSpec parse_problem(const json& j, const std::filesystem::path& base) {
  reject_unknown(j, "problem",
                 {"dataset_name", "description", "dataset_info", "target_column", "metric", "train_path",
                  "dev_path", "test_path", "data_info_path", "output_dir"});
  ProblemSpec p;
  p.dataset_name = require<std::string>(j, "dataset_name", "problem");
  p.description = get<std::string>(j, "description", "problem", "");
  p.dataset_info = get<std::string>(j, "dataset_info", "problem", "");
  p.target_column = require<std::string>(j, "target_column", "problem");
  const auto metric = metric_from_name(require<std::string>(j, "metric", "problem"));
  if (!metric) config_error("problem.metric must be rmse, f1 or f1_weighted");
  p.metric = *metric;
  p.train_path = resolve(get<std::string>(j, "train_path", "problem", ""), base);
  p.dev_path = resolve(get<std::string>(j, "dev_path", "problem", ""), base);
  p.test_path = resolve(get<std::string>(j, "test_path", "problem", ""), base);
  p.data_info_path = resolve(get<std::string>(j, "data_info_path", "problem", ""), base);
  p.output_dir = resolve(get<std::string>(j, "output_dir", "problem", ""), base);
  return p;
}

LLMEndpointConfig parse_llm(const json& j) {
  reject_unknown(j, "llm", {"base_url", "model_name", "temperature", "api_key_env", "max_retries",
                            "timeout_seconds"});
  LLMEndpointConfig c;
  c.base_url = require<std::string>(j, "base_url", "llm");
  c.model_name = require<std::string>(j, "model_name", "llm");
  c.temperature = get<double>(j, "temperature", "llm", c.temperature);
  c.api_key_env = get<std::string>(j, "api_key_env", "llm", "");
  c.max_retries = get<int>(j, "max_retries", "llm", c.max_retries);
  c.timeout_seconds = get<double>(j, "timeout_seconds", "llm", c.timeout_seconds);
  try {
    validate(c);
  } catch (const Error& e) {
    config_error(e.what());
  }
  return c;
}

LandscapeSpec parse_landscape(const json& j) {
  reject_unknown(j, "executor.landscape", {"kind", "seed", "base", "noise_sigma", "utilities", "interactions"});
  LandscapeSpec l;
  const std::string kind = get<std::string>(j, "kind", "executor.landscape", "planted");
  if (kind == "planted") l.kind = LandscapeKind::Planted;
  else if (kind == "flat") l.kind = LandscapeKind::Flat;
  else if (kind == "explicit") l.kind = LandscapeKind::Explicit;
  else config_error("executor.landscape.kind must be planted, flat or explicit");
  l.seed = get<std::uint64_t>(j, "seed", "executor.landscape", 0);
  l.base = get<double>(j, "base", "executor.landscape", l.base);
  l.noise_sigma = get<double>(j, "noise_sigma", "executor.landscape", l.noise_sigma);
  if (l.noise_sigma < 0.0) config_error("executor.landscape.noise_sigma must be >= 0");
  l.utilities = get<std::map<std::string, double>>(j, "utilities", "executor.landscape", {});
  if (j.contains("interactions")) {
    if (!j["interactions"].is_array()) config_error("executor.landscape.interactions must be an array");
    for (const auto& i : j["interactions"]) {
      reject_unknown(i, "executor.landscape.interactions[]", {"a", "b", "weight"});
      l.interactions.push_back({require<std::string>(i, "a", "interaction"),
                                require<std::string>(i, "b", "interaction"),
                                require<double>(i, "weight", "interaction")});
    }
  }
  if (l.kind != LandscapeKind::Explicit && (!l.utilities.empty() || !l.interactions.empty())) {
    config_error("utilities and interactions require landscape kind 'explicit'");
  }
  return l;
}

ExecutorSpec parse_executor(const json& j) {
  reject_unknown(j, "executor", {"kind", "command", "url", "timeout_seconds", "landscape"});
  ExecutorSpec e;
  const std::string kind = get<std::string>(j, "kind", "executor", "landscape");
  if (kind == "landscape") e.kind = ExecutorKind::Landscape;
  else if (kind == "external") e.kind = ExecutorKind::External;
  else config_error("executor.kind must be landscape or external");
  e.command = get<std::vector<std::string>>(j, "command", "executor", {});
  e.url = get<std::string>(j, "url", "executor", "");
  if (j.contains("timeout_seconds") && !j["timeout_seconds"].is_null()) {
    e.timeout_seconds = get<double>(j, "timeout_seconds", "executor", 0.0);
    if (!(*e.timeout_seconds > 0.0)) config_error("executor.timeout_seconds must be > 0");
  }
  if (j.contains("landscape")) e.landscape = parse_landscape(j["landscape"]);
  if (e.kind == ExecutorKind::External && e.command.empty() == e.url.empty()) {
    config_error("external executor needs exactly one of command or url");
  }
  return e;
}

SearchParams parse_search(const json& j) {
  reject_unknown(j, "search", {"k_rollouts", "alpha_explore", "alpha_unvisited", "searchable_stages", "seed"});
  SearchParams p;
  p.k_rollouts = get<int>(j, "k_rollouts", "search", p.k_rollouts);
  p.alpha_explore = get<double>(j, "alpha_explore", "search", p.alpha_explore);
  p.alpha_unvisited = get<double>(j, "alpha_unvisited", "search", p.alpha_unvisited);
  p.rng_seed = get<std::uint64_t>(j, "seed", "search", p.rng_seed);
  if (j.contains("searchable_stages")) {
    p.searchable_stages.clear();
    for (const auto& s : get<std::vector<std::string>>(j, "searchable_stages", "search", {})) {
      p.searchable_stages.push_back(parse_stage(s));
    }
  }
  try {
    validate(p);
  } catch (const Error& e) {
    config_error(e.what());
  }
  return p;
}

InsightSource parse_source(const json& j, const std::filesystem::path& base) {
  reject_unknown(j, "insight_source", {"kind", "path", "insights_per_stage"});
  InsightSource s;
  const std::string kind = get<std::string>(j, "kind", "insight_source", "file");
  if (kind == "llm") s.kind = InsightSourceKind::Llm;
  else if (kind == "file") s.kind = InsightSourceKind::File;
  else config_error("insight_source.kind must be llm or file");
  s.path = resolve(get<std::string>(j, "path", "insight_source", ""), base);
  s.insights_per_stage = get<int>(j, "insights_per_stage", "insight_source", s.insights_per_stage);
  if (s.insights_per_stage < 1) config_error("insight_source.insights_per_stage must be >= 1");
  if (s.kind == InsightSourceKind::File && s.path.empty()) config_error("insight_source.path is required");
  return s;
}

std::string_view landscape_kind_name(LandscapeKind k) {
  switch (k) {
    case LandscapeKind::Planted: return "planted";
    case LandscapeKind::Flat: return "flat";
    case LandscapeKind::Explicit: return "explicit";
  }
  return "planted";
}

}  // namespace

std::chrono::milliseconds RunConfig::executor_timeout() const {
  if (executor.timeout_seconds) {
    return std::chrono::milliseconds(static_cast<std::int64_t>(*executor.timeout_seconds * 1000.0));
  }
  return executor.kind == ExecutorKind::External
             ? std::chrono::duration_cast<std::chrono::milliseconds>(kExternalTimeout)
             : std::chrono::duration_cast<std::chrono::milliseconds>(kLandscapeTimeout);
}

RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    config_error(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(j, "config", {"problem", "llm", "executor", "search", "insight_source", "output_dir", "cache_dir"});
  if (!j.contains("problem")) config_error("config.problem is required");

  RunConfig c;
  c.problem = parse_problem(j["problem"], base_dir);
  if (j.contains("llm") && !j["llm"].is_null()) c.llm = parse_llm(j["llm"]);
  if (j.contains("executor")) c.executor = parse_executor(j["executor"]);
  if (j.contains("search")) c.search = parse_search(j["search"]);
  if (!j.contains("insight_source")) config_error("config.insight_source is required");
  c.insight_source = parse_source(j["insight_source"], base_dir);
  c.output_dir = resolve(get<std::string>(j, "output_dir", "config", c.output_dir), base_dir);
  c.cache_dir = resolve(get<std::string>(j, "cache_dir", "config", c.cache_dir), base_dir);
  if (c.insight_source.kind == InsightSourceKind::Llm && !c.llm) {
    config_error("insight_source.kind 'llm' requires an llm section");
  }
  if (c.problem.output_dir.empty()) c.problem.output_dir = c.output_dir;
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), std::filesystem::absolute(path).parent_path());
}

std::string serialize_run_config(const RunConfig& c) {
  ordered_json j;
  j["problem"] = {
      {"dataset_name", c.problem.dataset_name},   {"description", c.problem.description},
      {"dataset_info", c.problem.dataset_info},   {"target_column", c.problem.target_column},
      {"metric", metric_name(c.problem.metric)},  {"train_path", c.problem.train_path},
      {"dev_path", c.problem.dev_path},           {"test_path", c.problem.test_path},
      {"data_info_path", c.problem.data_info_path}, {"output_dir", c.problem.output_dir},
  };
  if (c.llm) {
    j["llm"] = {{"base_url", c.llm->base_url},       {"model_name", c.llm->model_name},
                {"temperature", c.llm->temperature}, {"api_key_env", c.llm->api_key_env},
                {"max_retries", c.llm->max_retries}, {"timeout_seconds", c.llm->timeout_seconds}};
  }
  ordered_json landscape = {{"kind", landscape_kind_name(c.executor.landscape.kind)},
                            {"seed", c.executor.landscape.seed},
                            {"base", c.executor.landscape.base},
                            {"noise_sigma", c.executor.landscape.noise_sigma}};
  if (c.executor.landscape.kind == LandscapeKind::Explicit) {
    landscape["utilities"] = c.executor.landscape.utilities;
    auto interactions = ordered_json::array();
    for (const auto& i : c.executor.landscape.interactions) {
      interactions.push_back({{"a", i.a}, {"b", i.b}, {"weight", i.weight}});
    }
    landscape["interactions"] = std::move(interactions);
  }
  ordered_json executor = {{"kind", c.executor.kind == ExecutorKind::External ? "external" : "landscape"}};
  if (!c.executor.command.empty()) executor["command"] = c.executor.command;
  if (!c.executor.url.empty()) executor["url"] = c.executor.url;
  if (c.executor.timeout_seconds) executor["timeout_seconds"] = *c.executor.timeout_seconds;
  executor["landscape"] = std::move(landscape);
  j["executor"] = std::move(executor);

  std::vector<std::string> stages;
  for (Stage s : c.search.searchable_stages) stages.emplace_back(stage_name(s));
  j["search"] = {{"k_rollouts", c.search.k_rollouts},
                 {"alpha_explore", c.search.alpha_explore},
                 {"alpha_unvisited", c.search.alpha_unvisited},
                 {"searchable_stages", stages},
                 {"seed", c.search.rng_seed}};
  j["insight_source"] = {{"kind", c.insight_source.kind == InsightSourceKind::Llm ? "llm" : "file"},
                         {"path", c.insight_source.path},
                         {"insights_per_stage", c.insight_source.insights_per_stage}};
  j["output_dir"] = c.output_dir;
  j["cache_dir"] = c.cache_dir;
  return j.dump(2) + "\n";
}

SyntheticLandscape build_landscape(const LandscapeSpec& spec, const SearchSpace& space,
                                   std::span<const Stage> stages) {
  switch (spec.kind) {
    case LandscapeKind::Planted: {
      PlantedLandscapeOptions opts;
      opts.base = spec.base;
      opts.noise_sigma = spec.noise_sigma;
      return make_planted_landscape(space, stages, spec.seed, opts).landscape;
    }
    case LandscapeKind::Flat: {
      SyntheticLandscape l;
      l.base = spec.base;
      l.noise_sigma = spec.noise_sigma;
      l.seed = spec.seed;
      return l;
    }
    case LandscapeKind::Explicit:
      break;
  }
  auto to_id = [&](const std::string& key) -> std::string {
    if (space.find(key)) return key;
    for (const auto& [stage, pool] : space.per_stage()) {
      for (const auto& insight : pool) {
        if (insight.text == key) return insight.id;
      }
    }
    config_error("landscape refers to unknown insight '" + key + "'");
  };
  SyntheticLandscape l;
  l.base = spec.base;
  l.noise_sigma = spec.noise_sigma;
  l.seed = spec.seed;
  for (const auto& [key, u] : spec.utilities) l.per_insight_utility[to_id(key)] = u;
  for (const auto& i : spec.interactions) l.set_interaction(to_id(i.a), to_id(i.b), i.weight);
  return l;
}

}  // namespace stagetree
