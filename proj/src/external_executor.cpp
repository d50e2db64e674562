#include "stagetree/external_executor.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <httplib.h>

#include <cerrno>
#include <cstring>

#include "stagetree/error.hpp"
#include "url.hpp"

namespace stagetree {
namespace {

using Clock = std::chrono::steady_clock;

[[noreturn]] void transport_error(const std::string& what) {
  throw Error(ErrorCode::TransportError, what);
}

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  ~Fd() { reset(); }
  int get() const noexcept { return fd_; }
  void reset() noexcept {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

void make_pipe(int fds[2]) {
  if (::pipe2(fds, O_CLOEXEC) != 0) transport_error(std::string("pipe: ") + std::strerror(errno));
}

void reap(pid_t pid, Clock::time_point deadline) {
  int status = 0;
  while (::waitpid(pid, &status, WNOHANG) == 0) {
    if (Clock::now() >= deadline) {
      ::kill(pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      return;
    }
    ::usleep(1000);
  }
}

}  // namespace

ProcessTransport::ProcessTransport(std::vector<std::string> argv) : argv_(std::move(argv)) {
  if (argv_.empty()) throw Error(ErrorCode::ConfigError, "worker command is empty");
}

std::string ProcessTransport::exchange(const std::string& request, std::chrono::milliseconds timeout) {
  ::signal(SIGPIPE, SIG_IGN);
  int in_fds[2], out_fds[2];
  make_pipe(in_fds);
  Fd child_in_read(in_fds[0]), child_in_write(in_fds[1]);
  make_pipe(out_fds);
  Fd child_out_read(out_fds[0]), child_out_write(out_fds[1]);

  std::vector<char*> args;
  for (auto& a : argv_) args.push_back(a.data());
  args.push_back(nullptr);

  const pid_t pid = ::fork();
  if (pid < 0) transport_error(std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    ::dup2(child_in_read.get(), STDIN_FILENO);
    ::dup2(child_out_write.get(), STDOUT_FILENO);
    ::execvp(args[0], args.data());
    _exit(127);
  }
  child_in_read.reset();
  child_out_write.reset();
  ::fcntl(child_in_write.get(), F_SETFL, O_NONBLOCK);

  const auto deadline = Clock::now() + timeout;
  const std::string payload = request + "\n";
  std::size_t written = 0;
  std::string received;
  bool eof = false;
  while (!eof && received.find('\n') == std::string::npos) {
    const auto remaining =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
    if (remaining <= 0) {
      ::kill(pid, SIGKILL);
      ::waitpid(pid, nullptr, 0);
      transport_error("worker timed out after " + std::to_string(timeout.count()) + " ms");
    }
    pollfd fds[2] = {{child_out_read.get(), POLLIN, 0}, {child_in_write.get(), POLLOUT, 0}};
    const nfds_t count = child_in_write.get() >= 0 ? 2 : 1;
    if (::poll(fds, count, static_cast<int>(std::min<long long>(remaining, 1000))) < 0) {
      if (errno == EINTR) continue;
      transport_error(std::string("poll: ") + std::strerror(errno));
    }
    if (count == 2 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
      const ssize_t n = ::write(child_in_write.get(), payload.data() + written, payload.size() - written);
      if (n < 0 && errno != EAGAIN) {
        child_in_write.reset();  // worker closed stdin; keep reading whatever it says
      } else if (n > 0) {
        written += static_cast<std::size_t>(n);
        if (written == payload.size()) child_in_write.reset();
      }
    }
    if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
      char buf[65536];
      const ssize_t n = ::read(child_out_read.get(), buf, sizeof buf);
      if (n > 0) received.append(buf, static_cast<std::size_t>(n));
      else if (n == 0) eof = true;
      else if (errno != EINTR && errno != EAGAIN) eof = true;
    }
  }
  child_in_write.reset();
  child_out_read.reset();
  reap(pid, deadline);

  const std::size_t nl = received.find('\n');
  if (nl == std::string::npos) {
    if (received.empty()) transport_error("worker exited without a response");
    return received;
  }
  return received.substr(0, nl);
}

HttpTransport::HttpTransport(std::string base_url) : base_url_(std::move(base_url)) {}

std::string HttpTransport::exchange(const std::string& request, std::chrono::milliseconds timeout) {
  const auto [origin, path] = detail::split_url(base_url_);
  httplib::Client client(origin);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  auto res = client.Post(path + "/simulate", request, "application/json");
  if (!res) transport_error(base_url_ + ": " + httplib::to_string(res.error()));
  if (res->status != 200) transport_error("HTTP " + std::to_string(res->status) + " from " + base_url_);
  return res->body;
}

std::vector<CacheEntry> replayable_prefix(const StageCache& cache, const ExperimentConfig& config) {
  std::vector<CacheEntry> found = cache.lookup(config.dataset_fingerprint, config.insights);
  std::vector<CacheEntry> prefix;
  for (std::size_t i = 0; i < found.size() && found[i].stage == kAllStages[i]; ++i) {
    prefix.push_back(std::move(found[i]));
  }
  return prefix;
}

void store_stages(StageCache& cache, const ExperimentConfig& config, const SimulationResult& result) {
  for (const auto& s : result.stages) {
    if (s.status != RunStatus::Ok || s.code.empty()) continue;
    cache.store(config.dataset_fingerprint, stage_key(config.insights, s.stage), s.stage, s.code,
                s.instruction);
  }
}

ExternalExecutor::ExternalExecutor(std::unique_ptr<Transport> transport,
                                   std::chrono::milliseconds timeout, std::uint64_t seed)
    : transport_(std::move(transport)), timeout_(timeout), seed_(seed) {}

SimulationResult ExternalExecutor::simulate(const ExperimentConfig& config, const ProblemSpec& problem,
                                            StageCache& cache) {
  validate_config(config);
  const std::vector<CacheEntry> cached = replayable_prefix(cache, config);
  wire::SimulationRequest request{problem, config.insights, {}, seed_};
  for (const auto& e : cached) request.cached_stages.push_back(wire::CachedStage{e.stage, e.code});
  const std::string body = wire::encode_request(request);

  for (int attempt = 0;; ++attempt) {
    ++requests_;
    const std::string response = transport_->exchange(body, timeout_);
    try {
      SimulationResult result = wire::decode_response(response, problem.metric);
      for (std::size_t i = 0; i < cached.size() && i < result.stages.size(); ++i) {
        if (result.stages[i].code != cached[i].code) {
          throw Error(ErrorCode::ProtocolError, "worker altered cached code of stage " +
                                                    std::string(stage_name(cached[i].stage)));
        }
      }
      result.cache_hits = static_cast<int>(cached.size());
      store_stages(cache, config, result);
      return result;
    } catch (const ExecutorError&) {
      if (attempt >= 1) throw;
    }
  }
}

}  // namespace stagetree
