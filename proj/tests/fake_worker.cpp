// Stand-in simulation worker speaking the wire protocol on stdin/stdout.
// Mode (argv[1]): ok, echo-cache, error, flaky:<state-file>, garbage, silent,
// sleep, wrong-count.
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>

#include "stagetree/wire.hpp"

using namespace stagetree;

namespace {

SimulationResult answer(const wire::SimulationRequest& req, const std::string& mode) {
  SimulationResult r;
  r.dev_score = req.problem.metric == MetricKind::RMSE ? 0.25 : 0.75;
  r.test_score = 0.5;
  for (std::size_t i = 0; i < kAllStages.size(); ++i) {
    const Stage s = kAllStages[i];
    std::string code = "print('" + std::string(stage_name(s)) + "')\n";
    if (mode == "echo-cache" && i < req.cached_stages.size()) code = req.cached_stages[i].code;
    for (const auto& insight : req.config) {
      if (insight.stage == s && !(mode == "echo-cache" && i < req.cached_stages.size())) {
        code += "# " + insight.text + "\n";
      }
    }
    r.stages.push_back(StageArtifact{s, "do " + std::string(stage_name(s)), code, "", RunStatus::Ok});
  }
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "ok";
  if (mode == "silent") return 0;
  if (mode == "sleep") {
    std::this_thread::sleep_for(std::chrono::seconds(30));
    return 0;
  }
  std::string line;
  std::getline(std::cin, line);
  if (mode == "garbage") {
    std::cout << "this is not json\n";
    return 0;
  }
  if (mode == "error") {
    std::cout << wire::encode_error_response(Stage::ModelTraining, "training crashed") << "\n";
    return 1;
  }
  if (mode.rfind("flaky:", 0) == 0) {
    // Fails on the first call, succeeds afterwards.
    const std::filesystem::path state = mode.substr(6);
    if (!std::filesystem::exists(state)) {
      std::ofstream(state) << "x";
      std::cout << wire::encode_error_response(Stage::FeatureEngineering, "flaky") << "\n";
      return 1;
    }
  }
  const wire::SimulationRequest req = wire::decode_request(line);
  SimulationResult r = answer(req, mode);
  if (mode == "wrong-count") r.stages.pop_back();
  std::cout << wire::encode_response(r) << "\n";
  return 0;
}
