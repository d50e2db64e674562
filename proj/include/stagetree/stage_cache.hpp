#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "stagetree/stage.hpp"
#include "stagetree/tree.hpp"

namespace stagetree {

struct CacheEntry {
  std::string fingerprint;
  std::vector<std::string> prefix;  // insight ids, stage order
  Stage stage;
  std::string code;
  std::string instruction;
  std::string created_at;
};

/// Ids of the config insights whose stage is at or before `stage`: the key
/// under which that stage's code is cached.
std::vector<std::string> stage_key(std::span<const Insight> config, Stage stage);

/// Stage-level code cache keyed by (dataset fingerprint, insight prefix,
/// stage). First write wins. With a directory it persists one JSON file per
/// entry under <dir>/<fingerprint>/<prefix-hash>/<stage>.json and holds an
/// exclusive advisory lock on <dir>/.lock for its lifetime.
class StageCache {
 public:
  StageCache() = default;
  explicit StageCache(std::filesystem::path dir);
  ~StageCache();

  StageCache(const StageCache&) = delete;
  StageCache& operator=(const StageCache&) = delete;

  /// For each stage, the entry stored under that stage's key for this
  /// config, if any. Ordered by stage.
  std::vector<CacheEntry> lookup(const std::string& fingerprint,
                                 std::span<const Insight> config) const;

  /// Entries stored under exactly this prefix, ordered by stage.
  std::vector<CacheEntry> entries_for(const std::string& fingerprint,
                                      const std::vector<std::string>& prefix) const;

  /// Returns false (and counts a duplicate) when the key already exists.
  /// Empty code is ignored.
  bool store(const std::string& fingerprint, const std::vector<std::string>& prefix, Stage stage,
             const std::string& code, const std::string& instruction);

  std::vector<CacheEntry> entries() const;
  std::size_t size() const noexcept { return entries_.size(); }
  std::uint64_t duplicate_stores() const noexcept { return duplicates_; }
  void clear();

  const std::optional<std::filesystem::path>& directory() const noexcept { return dir_; }

 private:
  using Key = std::tuple<std::string, std::string, Stage>;
  static std::string join(const std::vector<std::string>& prefix);
  void load_from_disk();
  void persist(const CacheEntry& entry) const;

  std::map<Key, CacheEntry> entries_;
  std::optional<std::filesystem::path> dir_;
  int lock_fd_ = -1;
  std::uint64_t duplicates_ = 0;
};

}  // namespace stagetree
