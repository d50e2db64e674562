#include "stagetree/stage_cache.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <json.hpp>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

#include "stagetree/error.hpp"
#include "stagetree/hash.hpp"

namespace stagetree {
namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::vector<std::string> stage_key(std::span<const Insight> config, Stage stage) {
  std::vector<std::string> key;
  for (const auto& insight : config) {
    if (ordinal(insight.stage) <= ordinal(stage)) key.push_back(insight.id);
  }
  return key;
}

StageCache::StageCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(*dir_, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create cache dir " + dir_->string() + ": " + ec.message());
  const std::string lock_path = (*dir_ / ".lock").string();
  lock_fd_ = ::open(lock_path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (lock_fd_ < 0) throw Error(ErrorCode::IoError, "cannot open " + lock_path + ": " + std::strerror(errno));
  if (::flock(lock_fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(lock_fd_);
    lock_fd_ = -1;
    throw Error(ErrorCode::IoError, "cache directory " + dir_->string() + " is locked by another process");
  }
  load_from_disk();
}

StageCache::~StageCache() {
  if (lock_fd_ >= 0) {
    ::flock(lock_fd_, LOCK_UN);
    ::close(lock_fd_);
  }
}

std::string StageCache::join(const std::vector<std::string>& prefix) {
  std::string out;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (i) out.push_back(',');
    out += prefix[i];
  }
  return out;
}

std::vector<CacheEntry> StageCache::lookup(const std::string& fingerprint,
                                           std::span<const Insight> config) const {
  std::vector<CacheEntry> out;
  for (Stage s : kAllStages) {
    auto it = entries_.find(Key{fingerprint, join(stage_key(config, s)), s});
    if (it != entries_.end()) out.push_back(it->second);
  }
  return out;
}

std::vector<CacheEntry> StageCache::entries_for(const std::string& fingerprint,
                                                const std::vector<std::string>& prefix) const {
  std::vector<CacheEntry> out;
  const std::string joined = join(prefix);
  for (Stage s : kAllStages) {
    auto it = entries_.find(Key{fingerprint, joined, s});
    if (it != entries_.end()) out.push_back(it->second);
  }
  return out;
}

bool StageCache::store(const std::string& fingerprint, const std::vector<std::string>& prefix,
                       Stage stage, const std::string& code, const std::string& instruction) {
  if (code.empty()) return false;
  Key key{fingerprint, join(prefix), stage};
  if (entries_.contains(key)) {
    ++duplicates_;
    return false;
  }
  CacheEntry entry{fingerprint, prefix, stage, code, instruction, utc_now()};
  if (dir_) persist(entry);
  entries_.emplace(std::move(key), std::move(entry));
  return true;
}

std::vector<CacheEntry> StageCache::entries() const {
  std::vector<CacheEntry> out;
  out.reserve(entries_.size());
  for (const auto& [key, entry] : entries_) out.push_back(entry);
  return out;
}

void StageCache::clear() {
  entries_.clear();
  duplicates_ = 0;
  if (!dir_) return;
  for (const auto& child : std::filesystem::directory_iterator(*dir_)) {
    if (child.path().filename() == ".lock") continue;
    std::filesystem::remove_all(child.path());
  }
}

void StageCache::persist(const CacheEntry& entry) const {
  const auto folder = *dir_ / entry.fingerprint / short_hash(join(entry.prefix));
  std::filesystem::create_directories(folder);
  const auto path = folder / (std::string(stage_name(entry.stage)) + ".json");
  const nlohmann::ordered_json j = {
      {"fingerprint", entry.fingerprint}, {"prefix", entry.prefix},
      {"stage", stage_name(entry.stage)}, {"code", entry.code},
      {"instruction", entry.instruction}, {"created_at", entry.created_at},
  };
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << j.dump(2) << '\n';
    if (!out) throw Error(ErrorCode::IoError, "cannot write cache entry " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

void StageCache::load_from_disk() {
  for (const auto& file : std::filesystem::recursive_directory_iterator(*dir_)) {
    if (!file.is_regular_file() || file.path().extension() != ".json") continue;
    std::ifstream in(file.path(), std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
      const auto j = nlohmann::json::parse(buf.str());
      const auto stage = stage_from_name(j.at("stage").get<std::string>());
      if (!stage) throw Error(ErrorCode::IoError, "unknown stage");
      CacheEntry entry{j.at("fingerprint").get<std::string>(),
                       j.at("prefix").get<std::vector<std::string>>(),
                       *stage,
                       j.at("code").get<std::string>(),
                       j.value("instruction", std::string()),
                       j.value("created_at", std::string())};
      if (entry.code.empty()) continue;
      Key key{entry.fingerprint, join(entry.prefix), entry.stage};
      entries_.emplace(std::move(key), std::move(entry));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::IoError, "corrupt cache entry " + file.path().string() + ": " + e.what());
    }
  }
}

}  // namespace stagetree
