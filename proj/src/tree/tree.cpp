#include "drillscope/tree/tree.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "drillscope/chart/validate.hpp"
#include "drillscope/error.hpp"

namespace drillscope::tree {

using chart::ChartSpec;
using nlohmann::json;

namespace {

std::uint64_t id_number(const NodeId& id) {
  if (id.size() < 2 || id[0] != 'n') return 0;
  try {
    return std::stoull(id.substr(1));
  } catch (...) {
    return 0;
  }
}

std::string_view kind_name(DimensionKind kind) { return kind == DimensionKind::Basic ? "basic" : "high_level"; }

}  // namespace

std::string token_label(std::string text) {
  if (text.size() <= kLabelLimit) return text;
  std::size_t cut = kLabelLimit - 3;
  // Do not split a UTF-8 sequence.
  while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80) --cut;
  text.resize(cut);
  return text + "...";
}

std::vector<std::string> added_filter_labels(const ChartSpec& parent, const ChartSpec& child,
                                             const tabular::Dataset* dataset) {
  std::vector<std::string> out;
  for (const auto& t : child.transforms) {
    bool inherited = std::any_of(parent.transforms.begin(), parent.transforms.end(),
                                 [&](const tabular::Predicate& p) { return tabular::structurally_equal(p, t); });
    if (!inherited) out.push_back(tabular::describe(t, dataset));
  }
  return out;
}

ExplorationTree ExplorationTree::init(ChartSpec root_spec, std::int64_t created_at) {
  auto issues = chart::structural_issues(root_spec);
  if (!issues.empty()) {
    throw Error(ErrorCode::InvalidSpec, fmt::format("root spec rejected: {} at {}", issues[0].code, issues[0].path));
  }
  ExplorationTree t;
  ExplorationNode root;
  root.id = "n0";
  root.spec = std::move(root_spec);
  root.created_at = created_at;
  root.label = "root";
  t.nodes_.push_back(std::move(root));
  t.next_id_ = 1;
  t.root_id_ = t.active_id_ = "n0";
  t.rebuild_index();
  return t;
}

NodeId ExplorationTree::add_child(const NodeId& parent_id, ChartSpec spec, std::int64_t created_at,
                                  std::vector<chart::DimensionSuggestion> dimensions,
                                  const tabular::Dataset* dataset) {
  auto it = index_.find(parent_id);
  if (it == index_.end()) throw Error(ErrorCode::UnknownParent, fmt::format("no node '{}'", parent_id));
  ExplorationNode n;
  n.id = fmt::format("n{}", next_id_++);
  n.parent = parent_id;
  n.applied_filter_labels = added_filter_labels(nodes_[it->second].spec, spec, dataset);
  n.label = n.applied_filter_labels.empty() ? fmt::format("{} view", chart::to_string(spec.mark))
                                            : token_label(n.applied_filter_labels.back());
  n.spec = std::move(spec);
  n.created_at = created_at;
  n.dimensions = std::move(dimensions);
  index_[n.id] = nodes_.size();
  nodes_.push_back(std::move(n));
  active_id_ = nodes_.back().id;
  return active_id_;
}

const ExplorationNode& ExplorationTree::node(const NodeId& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw Error(ErrorCode::UnknownNode, fmt::format("no node '{}'", id));
  return nodes_[it->second];
}

std::vector<NodeId> ExplorationTree::children(const NodeId& id) const {
  std::vector<NodeId> out;
  for (const auto& n : nodes_) {
    if (n.parent == id) out.push_back(n.id);
  }
  return out;
}

bool ExplorationTree::is_leaf(const NodeId& id) const {
  node(id);
  return std::none_of(nodes_.begin(), nodes_.end(), [&](const ExplorationNode& n) { return n.parent == id; });
}

std::vector<NodeId> ExplorationTree::leaves() const {
  std::set<NodeId> parents;
  for (const auto& n : nodes_) {
    if (n.parent) parents.insert(*n.parent);
  }
  std::vector<NodeId> out;
  for (const auto& n : nodes_) {
    if (!parents.count(n.id)) out.push_back(n.id);
  }
  return out;
}

std::vector<BreadcrumbEntry> ExplorationTree::breadcrumb() const {
  std::vector<BreadcrumbEntry> out;
  const ExplorationNode* n = &node(active_id_);
  while (true) {
    out.push_back({n->id, n->label});
    if (!n->parent) break;
    n = &node(*n->parent);
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<BranchDescriptor> ExplorationTree::branches() const {
  std::vector<BranchDescriptor> out;
  for (const auto& leaf : leaves()) {
    BranchDescriptor b;
    b.leaf_id = leaf;
    const ExplorationNode* n = &node(leaf);
    b.display_label = n->label;
    while (true) {
      b.path_labels.push_back(n->label);
      if (!n->parent) break;
      n = &node(*n->parent);
    }
    std::reverse(b.path_labels.begin(), b.path_labels.end());
    out.push_back(std::move(b));
  }
  return out;
}

void ExplorationTree::jump_to(const NodeId& id) {
  node(id);
  active_id_ = id;
}

void ExplorationTree::switch_branch(const NodeId& leaf_id) {
  if (!is_leaf(leaf_id)) throw Error(ErrorCode::NotALeaf, fmt::format("'{}' is not a leaf", leaf_id));
  active_id_ = leaf_id;
}

void ExplorationTree::reset() {
  ExplorationNode root = node(root_id_);
  nodes_.clear();
  nodes_.push_back(std::move(root));
  active_id_ = root_id_;
  rebuild_index();
}

void ExplorationTree::set_dimensions(const NodeId& id, std::vector<chart::DimensionSuggestion> dimensions,
                                     DimensionKind kind) {
  node(id);
  auto& n = nodes_[index_.at(id)];
  n.dimensions = std::move(dimensions);
  n.dimension_kind = kind;
}

void ExplorationTree::remove_leaf(const NodeId& id) {
  if (id == root_id_ || !is_leaf(id)) throw Error(ErrorCode::NotALeaf, fmt::format("'{}' is not a removable leaf", id));
  const NodeId parent = *node(id).parent;
  nodes_.erase(nodes_.begin() + static_cast<std::ptrdiff_t>(index_.at(id)));
  rebuild_index();
  if (active_id_ == id) active_id_ = parent;
}

void ExplorationTree::rebuild_index() {
  index_.clear();
  for (std::size_t i = 0; i < nodes_.size(); ++i) index_[nodes_[i].id] = i;
}

std::vector<std::string> ExplorationTree::invariant_violations() const {
  std::vector<std::string> out;
  std::size_t roots = 0;
  for (const auto& n : nodes_) {
    if (!n.parent) {
      ++roots;
      if (n.id != root_id_) out.push_back(fmt::format("'{}' has no parent but is not the root", n.id));
      if (!n.applied_filter_labels.empty()) out.push_back("root carries applied filter labels");
    } else if (!index_.count(*n.parent)) {
      out.push_back(fmt::format("'{}' points at missing parent '{}'", n.id, *n.parent));
    }
  }
  if (roots != 1) out.push_back(fmt::format("{} roots", roots));
  if (index_.size() != nodes_.size()) out.push_back("duplicate node ids");
  if (!index_.count(active_id_)) out.push_back(fmt::format("active '{}' is not a node", active_id_));
  if (!out.empty()) return out;

  // Every parent walk must reach the root within |nodes| steps.
  for (const auto& n : nodes_) {
    const ExplorationNode* cur = &n;
    std::size_t steps = 0;
    while (cur->parent && steps <= nodes_.size()) {
      cur = &nodes_[index_.at(*cur->parent)];
      ++steps;
    }
    if (cur->id != root_id_) out.push_back(fmt::format("'{}' does not reach the root", n.id));
  }
  return out;
}

json ExplorationTree::to_json() const {
  json nodes = json::array();
  for (const auto& n : nodes_) {
    nodes.push_back({{"id", n.id},
                     {"parent", n.parent ? json(*n.parent) : json(nullptr)},
                     {"label", n.label},
                     {"applied_filter_labels", n.applied_filter_labels},
                     {"created_at", n.created_at},
                     {"spec", chart::to_vega_lite(n.spec)},
                     {"dimensions", n.dimensions},
                     {"dimension_kind", kind_name(n.dimension_kind)}});
  }
  return {{"root_id", root_id_}, {"active_id", active_id_}, {"nodes", nodes}};
}

ExplorationTree ExplorationTree::from_json(const json& j) {
  ExplorationTree t;
  try {
    t.root_id_ = j.at("root_id").get<std::string>();
    t.active_id_ = j.at("active_id").get<std::string>();
    for (const auto& jn : j.at("nodes")) {
      ExplorationNode n;
      n.id = jn.at("id").get<std::string>();
      if (!jn.at("parent").is_null()) n.parent = jn.at("parent").get<std::string>();
      n.label = jn.at("label").get<std::string>();
      n.applied_filter_labels = jn.at("applied_filter_labels").get<std::vector<std::string>>();
      n.created_at = jn.value("created_at", std::int64_t{0});
      n.spec = chart::parse_spec(jn.at("spec"));
      if (jn.contains("dimensions")) n.dimensions = jn["dimensions"].get<std::vector<chart::DimensionSuggestion>>();
      n.dimension_kind = jn.value("dimension_kind", std::string("basic")) == "high_level" ? DimensionKind::HighLevel
                                                                                          : DimensionKind::Basic;
      t.next_id_ = std::max(t.next_id_, id_number(n.id) + 1);
      t.nodes_.push_back(std::move(n));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidSpec, fmt::format("malformed tree document: {}", e.what()));
  }
  t.rebuild_index();
  auto problems = t.invariant_violations();
  if (!problems.empty()) throw Error(ErrorCode::InvalidSpec, fmt::format("malformed tree: {}", problems.front()));
  return t;
}

}  // namespace drillscope::tree
