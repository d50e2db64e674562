#include <doctest.h>

#include <json.hpp>

#include <atomic>
#include <cstdlib>
#include <deque>

#include "http_server.hpp"
#include "stagetree/error.hpp"
#include "stagetree/insight_space.hpp"
#include "support.hpp"

using namespace stagetree;
using testing_support::TempDir;

namespace {

std::string proposal_json(int per_stage) {
  nlohmann::json doc = nlohmann::json::array();
  for (const char* tag : {"EDA", "Data Preprocessing", "Feature Engineering", "Model Training"}) {
    nlohmann::json items = nlohmann::json::array();
    for (int i = 0; i < per_stage; ++i) items.push_back(std::string(tag) + " idea " + std::to_string(i));
    doc.push_back({{"task_type", tag}, {"insights", items}});
  }
  return doc.dump();
}

class CannedClient final : public ChatClient {
 public:
  std::deque<std::string> replies;
  int calls = 0;
  std::string complete(const std::string&) override {
    ++calls;
    if (replies.empty()) throw Error(ErrorCode::EndpointError, "no more replies");
    std::string r = replies.front();
    replies.pop_front();
    return r;
  }
};

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::IoError;
}

LLMEndpointConfig llm(std::string url) {
  LLMEndpointConfig c;
  c.base_url = std::move(url);
  c.model_name = "test-model";
  c.api_key_env = "STAGETREE_TEST_KEY";
  c.timeout_seconds = 5;
  return c;
}

}  // namespace

TEST_CASE("parse a fenced proposal") {
  const std::string text = "Here you go:\n```json\n" + proposal_json(2) + "\n```\ntrailing words";
  const SearchSpace space = parse_insight_response(text);
  CHECK(space.total() == 8);
  CHECK(space.pool(Stage::ExploratoryDataAnalysis).size() == 2);
  CHECK(space.pool(Stage::ModelTraining)[1].text == "Model Training idea 1");
  CHECK(space.pool(Stage::ModelEvaluation).empty());
}

TEST_CASE("bare fences and unfenced JSON both parse") {
  CHECK(parse_insight_response("```\n" + proposal_json(1) + "```").total() == 4);
  CHECK(parse_insight_response(proposal_json(1)).total() == 4);
}

TEST_CASE("malformed proposals") {
  auto code = [](const std::string& text) { return code_of([&] { parse_insight_response(text); }); };
  CHECK(code("no json here") == ErrorCode::MalformedResponse);
  CHECK(code("{\"task_type\": \"EDA\"}") == ErrorCode::MalformedResponse);
  CHECK(code("[{\"task_type\": \"Deployment\", \"insights\": [\"x\"]}]") == ErrorCode::MalformedResponse);
  CHECK(code("[]") == ErrorCode::MalformedResponse);
  CHECK(code("```json\n[{\"task_type\": \"EDA\"") == ErrorCode::MalformedResponse);
  CHECK(code("[{\"task_type\": \"EDA\", \"insights\": [{\"text\": \"a\", \"id\": \"0000\"}]}]") ==
        ErrorCode::MalformedResponse);
  try {
    parse_insight_response("[{\"task_type\": \"Deployment\", \"insights\": [\"x\"]}]");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("Deployment") != std::string::npos);
  }
}

TEST_CASE("duplicate insights collapse") {
  const SearchSpace s =
      parse_insight_response("[{\"task_type\": \"EDA\", \"insights\": [\"a\", \"a\", \"b\"]}]");
  CHECK(s.pool(Stage::ExploratoryDataAnalysis).size() == 2);
}

TEST_CASE("serialized spaces load back equal") {
  TempDir dir;
  const SearchSpace s = parse_insight_response(proposal_json(3));
  save_search_space(s, dir / "space.json");
  const SearchSpace back = load_static_insights(dir / "space.json");
  CHECK(back == s);
  CHECK(serialize_search_space(back) == serialize_search_space(s));
}

TEST_CASE("insight prompt carries the dataset and m") {
  TempDir dir;
  testing_support::spit(dir / "train.csv", "a,b,y\n1,2,0\n3,4,1\n5,6,0\n7,8,1\n9,10,0\n11,12,1\n13,14,0\n");
  testing_support::spit(dir / "info.txt", "columns: a b y");
  ProblemSpec p;
  p.description = "predict y";
  p.train_path = (dir / "train.csv").string();
  p.data_info_path = (dir / "info.txt").string();
  const std::string prompt = render_insight_prompt(p, 7);
  CHECK(prompt.find("predict y") != std::string::npos);
  CHECK(prompt.find("columns: a b y") != std::string::npos);
  CHECK(prompt.find("9,10,0") != std::string::npos);
  CHECK(prompt.find("11,12,1") == std::string::npos);
  CHECK(prompt.find("7") != std::string::npos);
  CHECK(prompt.find("{m}") == std::string::npos);
}

TEST_CASE("proposal retries until the response is usable") {
  ProblemSpec p;
  CannedClient client;
  client.replies = {"garbage", proposal_json(2), proposal_json(5)};
  const Proposal out = propose_insights(p, llm("http://unused"), 5, client);
  CHECK(client.calls == 3);
  CHECK(out.transcript.size() == 3);
  CHECK_FALSE(out.transcript[0].ok);
  CHECK_FALSE(out.transcript[1].ok);
  CHECK(out.transcript[2].ok);
  CHECK(out.space.total() >= 20);
}

TEST_CASE("proposal gives up after max_retries") {
  ProblemSpec p;
  CannedClient client;
  client.replies = {"x", "y", "z", proposal_json(5)};
  LLMEndpointConfig c = llm("http://unused");
  c.max_retries = 1;
  CHECK(code_of([&] { propose_insights(p, c, 5, client); }) == ErrorCode::MalformedResponse);
  CHECK(client.calls == 2);
}

TEST_CASE("http client talks to a chat-completions endpoint") {
  testing_support::LocalServer srv;
  std::atomic<int> hits{0};
  std::string auth, model;
  double temperature = -1;
  srv.server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    ++hits;
    auth = req.get_header_value("Authorization");
    const auto body = nlohmann::json::parse(req.body);
    model = body.at("model");
    temperature = body.at("temperature");
    nlohmann::json reply = {{"choices", {{{"message", {{"role", "assistant"}, {"content", proposal_json(5)}}}}}}};
    res.set_content(reply.dump(), "application/json");
  });
  srv.start();
  ::setenv("STAGETREE_TEST_KEY", "sk-test", 1);
  ProblemSpec p;
  const Proposal out = propose_insights(p, llm(srv.url() + "/v1"), 5);
  CHECK(hits == 1);
  CHECK(auth == "Bearer sk-test");
  CHECK(model == "test-model");
  CHECK(temperature == 0.5);
  CHECK(out.space.total() == 20);
}

TEST_CASE("unreachable endpoint is an EndpointError") {
  testing_support::LocalServer srv;  // bound but never listening
  const std::string url = srv.url();
  ProblemSpec p;
  LLMEndpointConfig c = llm(url);
  c.timeout_seconds = 0.5;
  c.max_retries = 0;
  HttpChatClient client(c);
  CHECK(code_of([&] { client.complete("hi"); }) == ErrorCode::EndpointError);
}

TEST_CASE("non-2xx responses are EndpointErrors") {
  testing_support::LocalServer srv;
  srv.server.Post("/chat/completions", [](const httplib::Request&, httplib::Response& res) { res.status = 503; });
  srv.start();
  HttpChatClient client(llm(srv.url()));
  CHECK(code_of([&] { client.complete("hi"); }) == ErrorCode::EndpointError);
}
