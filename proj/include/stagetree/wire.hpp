#pragma once

// Newline-delimited JSON protocol spoken with external simulation workers.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "stagetree/problem.hpp"
#include "stagetree/simulation.hpp"
#include "stagetree/tree.hpp"

namespace stagetree::wire {

inline constexpr int kProtocolVersion = 1;

struct CachedStage {
  Stage stage;
  std::string code;
};

struct SimulationRequest {
  ProblemSpec problem;
  std::vector<Insight> config;
  std::vector<CachedStage> cached_stages;
  std::uint64_t seed = 0;
};

/// Single-line JSON body (no trailing newline).
std::string encode_request(const SimulationRequest& request);
SimulationRequest decode_request(std::string_view text);

/// Parses a SimulationResponse. Schema violations throw ProtocolError; a
/// well-formed "error" response throws ExecutorError naming the stage.
/// `metric` is the raw metric the scores are expressed in.
SimulationResult decode_response(std::string_view text, MetricKind metric);

/// Encodes a result as a response body; used by test workers.
std::string encode_response(const SimulationResult& result);
std::string encode_error_response(std::optional<Stage> stage, std::string_view message);

}  // namespace stagetree::wire
