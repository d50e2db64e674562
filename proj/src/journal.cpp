#include "stagetree/journal.hpp"

#include <json.hpp>

#include <sstream>

#include "stagetree/error.hpp"

namespace stagetree {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string_view event_name(TreeEventKind kind) {
  switch (kind) {
    case TreeEventKind::NodeCreated: return "node_created";
    case TreeEventKind::Simulated: return "simulated";
    case TreeEventKind::Backprop: return "backprop";
  }
  return "";
}

[[noreturn]] void corrupt(std::uintmax_t offset, const std::string& what) {
  throw Error(ErrorCode::JournalCorrupt, "record at byte offset " + std::to_string(offset) + ": " + what);
}

struct ParsedRecord {
  TreeEvent event;
  std::uintmax_t offset = 0;
  std::uintmax_t end = 0;
};

TreeEvent parse_record(std::string_view line, std::uintmax_t offset) {
  ordered_json j;
  try {
    j = ordered_json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    corrupt(offset, std::string("invalid JSON: ") + e.what());
  }
  try {
    TreeEvent e{};
    const std::string name = j.at("event").get<std::string>();
    if (name == "node_created") e.kind = TreeEventKind::NodeCreated;
    else if (name == "simulated") e.kind = TreeEventKind::Simulated;
    else if (name == "backprop") e.kind = TreeEventKind::Backprop;
    else corrupt(offset, "unknown event '" + name + "'");
    e.node = NodeId{j.at("node_id").get<std::uint32_t>()};
    if (j.contains("parent_id")) e.parent = NodeId{j["parent_id"].get<std::uint32_t>()};
    if (j.contains("insight_id")) e.insight_id = j["insight_id"].get<std::string>();
    if (j.contains("fingerprint")) e.fingerprint = j["fingerprint"].get<std::string>();
    if (j.contains("score")) e.score = j["score"].get<double>();
    if (j.contains("test_score")) e.test_score = j["test_score"].get<double>();
    if (j.contains("failed")) e.failed = j["failed"].get<bool>();
    if (j.contains("solution_code")) e.solution_code = j["solution_code"].get<std::string>();
    e.timestamp = j.at("timestamp").get<std::uint64_t>();
    return e;
  } catch (const nlohmann::json::exception& ex) {
    corrupt(offset, std::string("bad field: ") + ex.what());
  }
}

}  // namespace

std::string journal_line(const TreeEvent& e) {
  ordered_json j;
  j["event"] = event_name(e.kind);
  j["node_id"] = e.node.value;
  if (e.parent) j["parent_id"] = e.parent->value;
  if (e.insight_id) j["insight_id"] = *e.insight_id;
  if (e.fingerprint) j["fingerprint"] = *e.fingerprint;
  if (e.score) j["score"] = *e.score;
  if (e.kind == TreeEventKind::Simulated) {
    j["failed"] = e.failed;
    if (e.test_score) j["test_score"] = *e.test_score;
    j["solution_code"] = e.solution_code.value_or("");
  }
  j["timestamp"] = e.timestamp;
  return j.dump() + "\n";
}

JournalWriter::JournalWriter(const std::filesystem::path& path,
                             std::optional<std::uintmax_t> truncate_to) {
  if (truncate_to && (*truncate_to > 0 || std::filesystem::exists(path))) {
    std::error_code ec;
    std::filesystem::resize_file(path, *truncate_to, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot truncate journal " + path.string() + ": " + ec.message());
  }
  out_.open(path, std::ios::binary | std::ios::app);
  if (!out_) throw Error(ErrorCode::IoError, "cannot open journal " + path.string());
}

void JournalWriter::operator()(const TreeEvent& event) {
  out_ << journal_line(event);
  out_.flush();
  if (!out_) throw Error(ErrorCode::IoError, "journal write failed");
}

Tree::Observer JournalWriter::observer() {
  return [this](const TreeEvent& e) { (*this)(e); };
}

JournalReplay replay_journal(std::string_view text, const InsightResolver& resolve,
                             Tree::Observer observer) {
  std::vector<ParsedRecord> records;
  std::uintmax_t offset = 0;
  while (offset < text.size()) {
    const std::size_t nl = text.find('\n', offset);
    if (nl == std::string_view::npos) corrupt(offset, "truncated record (no terminating newline)");
    ParsedRecord r;
    r.event = parse_record(text.substr(offset, nl - offset), offset);
    r.offset = offset;
    r.end = nl + 1;
    records.push_back(std::move(r));
    offset = nl + 1;
  }
  if (records.empty()) corrupt(0, "empty journal");
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].event.timestamp != i) corrupt(records[i].offset, "out-of-sequence timestamp");
  }
  const TreeEvent& first = records.front().event;
  if (first.kind != TreeEventKind::NodeCreated || first.node.value != 0 || first.parent) {
    corrupt(0, "journal must start with the root node_created record");
  }

  std::size_t apply_count = 1;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].event.kind == TreeEventKind::Backprop) apply_count = i + 1;
  }

  JournalReplay replay{Tree(first.fingerprint.value_or(""), std::move(observer)), {}, 0};
  Tree& tree = replay.tree;
  std::optional<ReplayedRollout> pending;
  for (std::size_t i = 1; i < apply_count; ++i) {
    const ParsedRecord& r = records[i];
    const TreeEvent& e = r.event;
    try {
      switch (e.kind) {
        case TreeEventKind::NodeCreated: {
          if (!e.parent || !e.insight_id) corrupt(r.offset, "node_created without parent/insight");
          auto insight = resolve(*e.insight_id);
          if (!insight) corrupt(r.offset, "unknown insight id " + *e.insight_id);
          const NodeId id = tree.add_child(*e.parent, *insight);
          if (id != e.node) corrupt(r.offset, "node ids are not dense in creation order");
          break;
        }
        case TreeEventKind::Simulated: {
          if (!e.score) corrupt(r.offset, "simulated record without score");
          SimulationResult result;
          result.status = e.failed ? RunStatus::Failed : RunStatus::Ok;
          if (!e.failed) result.dev_score = *e.score;
          result.test_score = e.test_score;
          result.solution_code = e.solution_code.value_or("");
          tree.record_simulation(e.node, result);
          pending = ReplayedRollout{e.node, *e.score, e.failed};
          break;
        }
        case TreeEventKind::Backprop: {
          const ExperimentNode& n = tree.node(e.node);
          if (!e.score || !n.sim_score || *n.sim_score != *e.score || !pending ||
              pending->node != e.node) {
            corrupt(r.offset, "backprop does not match the preceding simulation");
          }
          tree.backpropagate(e.node, *e.score, n.solution_code.value_or(""));
          replay.rollouts.push_back(*pending);
          pending.reset();
          break;
        }
      }
    } catch (const Error& err) {
      if (err.code() == ErrorCode::JournalCorrupt) throw;
      corrupt(r.offset, err.what());
    }
  }
  replay.complete_bytes = records[apply_count - 1].end;
  return replay;
}

JournalReplay load_journal(const std::filesystem::path& path, const InsightResolver& resolve,
                           Tree::Observer observer) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read journal " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return replay_journal(buf.str(), resolve, std::move(observer));
}

}  // namespace stagetree
