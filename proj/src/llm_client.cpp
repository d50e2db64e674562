#include <httplib.h>
#include <json.hpp>

#include <cstdlib>

#include "stagetree/error.hpp"
#include "stagetree/insight_space.hpp"
#include "url.hpp"

namespace stagetree {

HttpChatClient::HttpChatClient(LLMEndpointConfig config) : config_(std::move(config)) {}

std::string HttpChatClient::complete(const std::string& prompt) {
  const auto [origin, path] = detail::split_url(config_.base_url);
  httplib::Client client(origin);
  const auto timeout = std::chrono::duration<double>(config_.timeout_seconds);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::milliseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::milliseconds>(timeout));

  httplib::Headers headers;
  if (!config_.api_key_env.empty()) {
    if (const char* key = std::getenv(config_.api_key_env.c_str())) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }
  const nlohmann::json body = {
      {"model", config_.model_name},
      {"temperature", config_.temperature},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
  };
  auto res = client.Post(path + "/chat/completions", headers, body.dump(), "application/json");
  if (!res) {
    throw Error(ErrorCode::EndpointError,
                config_.base_url + " unreachable: " + httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    throw Error(ErrorCode::EndpointError,
                "HTTP " + std::to_string(res->status) + " from " + config_.base_url);
  }
  try {
    const auto doc = nlohmann::json::parse(res->body);
    return doc.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::EndpointError, std::string("unexpected completion body: ") + e.what());
  }
}

}  // namespace stagetree
