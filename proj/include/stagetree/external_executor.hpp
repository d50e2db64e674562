#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <vector>

#include "stagetree/executor.hpp"
#include "stagetree/wire.hpp"

namespace stagetree {

/// Moves one request body to a worker and returns its one response body.
/// Throws TransportError on timeout, spawn failure or broken pipe.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual std::string exchange(const std::string& request, std::chrono::milliseconds timeout) = 0;
};

/// Spawns `argv` per request, writes the request line to its stdin and reads
/// the first line of its stdout. The child is killed on timeout.
class ProcessTransport final : public Transport {
 public:
  explicit ProcessTransport(std::vector<std::string> argv);
  std::string exchange(const std::string& request, std::chrono::milliseconds timeout) override;

 private:
  std::vector<std::string> argv_;
};

/// POSTs the request to <base_url>/simulate.
class HttpTransport final : public Transport {
 public:
  explicit HttpTransport(std::string base_url);
  std::string exchange(const std::string& request, std::chrono::milliseconds timeout) override;

 private:
  std::string base_url_;
};

inline constexpr std::chrono::milliseconds kDefaultWorkerTimeout = std::chrono::hours(1);

/// Delegates whole-pipeline simulation to a worker over the wire protocol.
/// Sends cached stage code for the contiguous cached prefix, stores the
/// returned stage code, and retries once when the worker reports a failure.
class ExternalExecutor final : public Executor {
 public:
  ExternalExecutor(std::unique_ptr<Transport> transport,
                   std::chrono::milliseconds timeout = kDefaultWorkerTimeout,
                   std::uint64_t seed = 0);

  SimulationResult simulate(const ExperimentConfig& config, const ProblemSpec& problem,
                            StageCache& cache) override;

  std::uint64_t requests_sent() const noexcept { return requests_; }

 private:
  std::unique_ptr<Transport> transport_;
  std::chrono::milliseconds timeout_;
  std::uint64_t seed_;
  std::uint64_t requests_ = 0;
};

/// Stage code that `simulate` may replay verbatim: cache entries keyed for
/// this config, contiguous from the first stage.
std::vector<CacheEntry> replayable_prefix(const StageCache& cache, const ExperimentConfig& config);

/// Stores every ok stage of `result` under its stage key.
void store_stages(StageCache& cache, const ExperimentConfig& config, const SimulationResult& result);

}  // namespace stagetree
