#include "stagetree/tree.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <string>

#include "stagetree/error.hpp"
#include "stagetree/hash.hpp"

namespace stagetree {

Insight Insight::make(Stage stage, std::string text) {
  std::string content(stage_name(stage));
  content.push_back('\n');
  content += text;
  return Insight{short_hash(content), stage, std::move(text)};
}

std::vector<std::string> ExperimentConfig::insight_ids() const {
  std::vector<std::string> ids;
  ids.reserve(insights.size());
  for (const auto& i : insights) ids.push_back(i.id);
  return ids;
}

void validate_config(const ExperimentConfig& config) {
  for (std::size_t i = 1; i < config.insights.size(); ++i) {
    if (ordinal(config.insights[i].stage) <= ordinal(config.insights[i - 1].stage)) {
      throw Error(ErrorCode::InvalidParams,
                  "config insights must be strictly increasing by stage");
    }
  }
}

Tree::Tree(std::string dataset_fingerprint, Observer observer)
    : fingerprint_(std::move(dataset_fingerprint)), observer_(std::move(observer)) {
  nodes_.push_back(ExperimentNode{});
  TreeEvent e{.kind = TreeEventKind::NodeCreated, .node = root()};
  e.fingerprint = fingerprint_;
  emit(std::move(e));
}

const ExperimentNode& Tree::node(NodeId id) const {
  if (!contains(id)) {
    throw Error(ErrorCode::UnknownNode, "node " + std::to_string(id.value));
  }
  return nodes_[id.value];
}

ExperimentNode& Tree::mutable_node(NodeId id) {
  return const_cast<ExperimentNode&>(std::as_const(*this).node(id));
}

void Tree::emit(TreeEvent event) {
  event.timestamp = clock_++;
  if (observer_) observer_(event);
}

NodeId Tree::add_child(NodeId parent, Insight insight) {
  const int depth = node(parent).depth + 1;
  const NodeId id{static_cast<std::uint32_t>(nodes_.size())};
  ExperimentNode child;
  child.id = id;
  child.insight = std::move(insight);
  child.depth = depth;
  child.parent = parent;
  const std::string insight_id = child.insight->id;
  nodes_.push_back(std::move(child));
  nodes_[parent.value].children.push_back(id);

  TreeEvent e{.kind = TreeEventKind::NodeCreated, .node = id};
  e.parent = parent;
  e.insight_id = insight_id;
  emit(std::move(e));
  return id;
}

void Tree::record_simulation(NodeId id, const SimulationResult& result) {
  ExperimentNode& n = mutable_node(id);
  double score = 0.0;
  if (result.ok()) {
    if (!result.dev_score || !std::isfinite(*result.dev_score) || *result.dev_score < 0.0 ||
        *result.dev_score > 1.0) {
      throw Error(ErrorCode::InvalidScore, "recorded dev score must be a normalized value in [0, 1]");
    }
    score = *result.dev_score;
  }
  n.sim_score = score;
  n.failed = !result.ok();
  n.test_score = result.ok() ? result.test_score : std::nullopt;
  n.solution_code = result.solution_code;
  n.own_simulations += 1;
  n.sim_sequence = ++simulations_;

  TreeEvent e{.kind = TreeEventKind::Simulated, .node = id};
  e.score = score;
  e.test_score = n.test_score;
  e.failed = n.failed;
  e.solution_code = result.solution_code;
  emit(std::move(e));
}

void Tree::backpropagate(NodeId id, double score, std::string_view solution_code) {
  node(id);  // existence check before any mutation
  for (std::optional<NodeId> cur = id; cur; cur = nodes_[cur->value].parent) {
    ExperimentNode& n = nodes_[cur->value];
    n.value += score;
    n.n_visits += 1;
    if (!n.stage_code && n.insight) {
      n.stage_code = stage_code_prefix(solution_code, n.insight->stage);
    }
  }
  TreeEvent e{.kind = TreeEventKind::Backprop, .node = id};
  e.score = score;
  emit(std::move(e));
}

ExperimentConfig config_path(const Tree& tree, NodeId id) {
  ExperimentConfig config;
  config.dataset_fingerprint = tree.fingerprint();
  for (const ExperimentNode* n = &tree.node(id); n->parent; n = &tree.node(*n->parent)) {
    config.insights.push_back(*n->insight);
  }
  std::reverse(config.insights.begin(), config.insights.end());
  return config;
}

double subtree_mean(const Tree& tree, NodeId id) {
  const ExperimentNode& n = tree.node(id);
  if (n.n_visits == 0) {
    throw Error(ErrorCode::NeverVisited, "node " + std::to_string(id.value) + " has no visits");
  }
  return n.value / static_cast<double>(n.n_visits);
}

}  // namespace stagetree
