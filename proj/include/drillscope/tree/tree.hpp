#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "drillscope/chart/dimension.hpp"
#include "drillscope/chart/spec.hpp"
#include "drillscope/tabular/dataset.hpp"

namespace drillscope::tree {

using NodeId = std::string;

inline constexpr std::size_t kLabelLimit = 40;

enum class DimensionKind { Basic, HighLevel };

struct ExplorationNode {
  NodeId id;
  std::optional<NodeId> parent;
  chart::ChartSpec spec;
  // Filters this node added relative to its parent, rendered as text.
  std::vector<std::string> applied_filter_labels;
  std::int64_t created_at = 0;
  std::string label;
  std::vector<chart::DimensionSuggestion> dimensions;
  DimensionKind dimension_kind = DimensionKind::Basic;

  bool operator==(const ExplorationNode&) const = default;
};

struct BreadcrumbEntry {
  NodeId id;
  std::string label;
  bool operator==(const BreadcrumbEntry&) const = default;
};

struct BranchDescriptor {
  NodeId leaf_id;
  std::vector<std::string> path_labels;
  std::string display_label;
  bool operator==(const BranchDescriptor&) const = default;
};

// Rooted tree of chart snapshots with an active node. Node ids are "n<k>" with
// k increasing for the lifetime of the tree; nodes are kept in creation order.
class ExplorationTree {
 public:
  // Throws InvalidSpec when the root spec fails structural checks.
  static ExplorationTree init(chart::ChartSpec root_spec, std::int64_t created_at = 0);

  // Attaches a snapshot under parent_id and makes it active. Labels are
  // derived from the filters the spec adds over the parent's. A dataset, when
  // given, lets temporal bounds render as dates. Throws UnknownParent.
  NodeId add_child(const NodeId& parent_id, chart::ChartSpec spec, std::int64_t created_at,
                   std::vector<chart::DimensionSuggestion> dimensions = {},
                   const tabular::Dataset* dataset = nullptr);

  const NodeId& root_id() const noexcept { return root_id_; }
  const NodeId& active_id() const noexcept { return active_id_; }
  const ExplorationNode& active() const { return node(active_id_); }
  // Throws UnknownNode.
  const ExplorationNode& node(const NodeId& id) const;
  bool contains(const NodeId& id) const { return index_.count(id) > 0; }
  std::size_t size() const noexcept { return nodes_.size(); }
  const std::vector<ExplorationNode>& nodes() const noexcept { return nodes_; }

  std::vector<NodeId> children(const NodeId& id) const;
  bool is_leaf(const NodeId& id) const;
  std::vector<NodeId> leaves() const;

  std::vector<BreadcrumbEntry> breadcrumb() const;
  std::vector<BranchDescriptor> branches() const;

  // Throws UnknownNode.
  void jump_to(const NodeId& id);
  // Throws UnknownNode or NotALeaf.
  void switch_branch(const NodeId& leaf_id);
  // Keeps only the root and makes it active.
  void reset();

  // Replaces the suggestions shown on a node. Throws UnknownNode.
  void set_dimensions(const NodeId& id, std::vector<chart::DimensionSuggestion> dimensions, DimensionKind kind);

  // Drops a non-root leaf and activates its parent. Only used to undo a drill
  // whose chart failed to render. Throws UnknownNode or NotALeaf.
  void remove_leaf(const NodeId& id);

  // Empty when the tree is well formed.
  std::vector<std::string> invariant_violations() const;

  nlohmann::json to_json() const;
  // Throws UnknownNode / UnknownParent / InvalidSpec on malformed input.
  static ExplorationTree from_json(const nlohmann::json& j);

  bool operator==(const ExplorationTree& other) const { return nodes_ == other.nodes_ && root_id_ == other.root_id_ && active_id_ == other.active_id_; }

 private:
  void rebuild_index();

  std::vector<ExplorationNode> nodes_;
  std::map<NodeId, std::size_t> index_;
  NodeId root_id_;
  NodeId active_id_;
  std::uint64_t next_id_ = 0;
};

// Labels for the filters `child` adds over `parent`, in order.
std::vector<std::string> added_filter_labels(const chart::ChartSpec& parent, const chart::ChartSpec& child,
                                             const tabular::Dataset* dataset = nullptr);

// Truncates to kLabelLimit characters, ending in "..." when shortened.
std::string token_label(std::string text);

}  // namespace drillscope::tree
