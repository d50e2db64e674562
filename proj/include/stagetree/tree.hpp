#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stagetree/simulation.hpp"
#include "stagetree/stage.hpp"

namespace stagetree {

/// A natural-language technique for one pipeline stage. The id is a content
/// hash of (stage, text), so equal insights always share an id.
struct Insight {
  std::string id;
  Stage stage;
  std::string text;

  static Insight make(Stage stage, std::string text);

  bool operator==(const Insight&) const = default;
};

struct NodeId {
  std::uint32_t value = 0;

  auto operator<=>(const NodeId&) const = default;
};

struct ExperimentNode {
  NodeId id;
  std::optional<Insight> insight;  // nullopt only for the root
  int depth = 0;
  double value = 0.0;  // sum of every simulation score in this subtree
  std::uint64_t n_visits = 0;
  std::optional<double> sim_score;  // latest own simulation, normalized
  std::optional<double> test_score;
  std::optional<std::string> solution_code;
  std::optional<std::string> stage_code;
  bool failed = false;
  std::uint64_t own_simulations = 0;
  std::uint64_t sim_sequence = 0;  // global order of the latest own simulation, 0 = never
  std::vector<NodeId> children;
  std::optional<NodeId> parent;

  bool simulated() const noexcept { return own_simulations > 0; }
  bool is_root() const noexcept { return !parent.has_value(); }
};

/// Root-to-node insight list; the unit handed to executors.
struct ExperimentConfig {
  std::vector<Insight> insights;
  std::string dataset_fingerprint;

  std::vector<std::string> insight_ids() const;
  bool operator==(const ExperimentConfig&) const = default;
};

/// Throws InvalidParams unless insights are strictly increasing by stage.
void validate_config(const ExperimentConfig& config);

enum class TreeEventKind { NodeCreated, Simulated, Backprop };

/// One mutation of the tree, as emitted to the observer (and the journal).
struct TreeEvent {
  TreeEventKind kind = TreeEventKind::NodeCreated;
  NodeId node{};
  std::optional<NodeId> parent{};
  std::optional<std::string> insight_id{};
  std::optional<double> score{};
  std::optional<double> test_score{};
  bool failed = false;
  std::optional<std::string> solution_code{};
  std::optional<std::string> fingerprint{}; // root creation only
  std::uint64_t timestamp = 0;             // logical clock: event sequence number
};

/// The experiment tree. Single writer; node ids are dense in creation order.
class Tree {
 public:
  using Observer = std::function<void(const TreeEvent&)>;

  explicit Tree(std::string dataset_fingerprint = {}, Observer observer = {});

  NodeId root() const noexcept { return NodeId{0}; }
  bool contains(NodeId id) const noexcept { return id.value < nodes_.size(); }
  const ExperimentNode& node(NodeId id) const;
  std::span<const ExperimentNode> nodes() const noexcept { return nodes_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  const std::string& fingerprint() const noexcept { return fingerprint_; }
  std::uint64_t event_count() const noexcept { return clock_; }
  std::uint64_t simulation_count() const noexcept { return simulations_; }

  void set_observer(Observer observer) { observer_ = std::move(observer); }

  /// Appends a child of `parent` carrying `insight` at depth(parent) + 1.
  NodeId add_child(NodeId parent, Insight insight);

  /// Stores a simulation result on `id`. The result's dev score must already
  /// be normalized into [0, 1]; a failed result records score 0 and the
  /// failed flag. Does not touch value/visits (see backpropagate).
  void record_simulation(NodeId id, const SimulationResult& result);

  /// Adds `score` to value and one visit to every node from `id` up to the
  /// root. Ancestors without stage code receive the stage-bounded prefix of
  /// `solution_code` covering their own stage.
  void backpropagate(NodeId id, double score, std::string_view solution_code);

 private:
  ExperimentNode& mutable_node(NodeId id);
  void emit(TreeEvent event);

  std::vector<ExperimentNode> nodes_;
  std::string fingerprint_;
  Observer observer_;
  std::uint64_t clock_ = 0;
  std::uint64_t simulations_ = 0;
};

/// Insights on the root-to-node path ordered by depth; length = depth(node).
ExperimentConfig config_path(const Tree& tree, NodeId id);

/// value / n_visits. Throws NeverVisited when the node has no visits.
double subtree_mean(const Tree& tree, NodeId id);

}  // namespace stagetree
