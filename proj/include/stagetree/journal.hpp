#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stagetree/tree.hpp"

namespace stagetree {

/// One newline-terminated JSON record for the event.
std::string journal_line(const TreeEvent& event);

/// Appends events to a newline-delimited JSON file, flushing each record.
class JournalWriter {
 public:
  /// Opens for append; `truncate_to` first cuts the file to that many bytes.
  explicit JournalWriter(const std::filesystem::path& path,
                         std::optional<std::uintmax_t> truncate_to = std::nullopt);

  void operator()(const TreeEvent& event);
  Tree::Observer observer();

 private:
  std::ofstream out_;
};

using InsightResolver = std::function<std::optional<Insight>(std::string_view insight_id)>;

struct ReplayedRollout {
  NodeId node;
  double score = 0.0;
  bool failed = false;
};

struct JournalReplay {
  Tree tree;
  std::vector<ReplayedRollout> rollouts;  // complete rollouts in order
  /// Byte length of the journal prefix ending at the last complete rollout.
  /// Events of an interrupted rollout past this point are not applied.
  std::uintmax_t complete_bytes = 0;
};

/// Rebuilds a tree from journal text. Rollouts end at their backprop record;
/// a trailing incomplete rollout is ignored. A malformed or truncated record
/// throws JournalCorrupt naming its byte offset.
JournalReplay replay_journal(std::string_view text, const InsightResolver& resolve,
                             Tree::Observer observer = {});

JournalReplay load_journal(const std::filesystem::path& path, const InsightResolver& resolve,
                           Tree::Observer observer = {});

}  // namespace stagetree
