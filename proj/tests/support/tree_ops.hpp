#pragma once

#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "drillscope/chart/spec.hpp"
#include "drillscope/tree/tree.hpp"

namespace drillscope::testing {

// Shadow model of a tree kept with plain parent links, used as the oracle
// for random operation sequences.
struct ShadowTree {
  std::map<std::string, std::optional<std::string>> parent;
  std::vector<std::string> order;
  std::string root;
  std::string active;

  std::vector<std::string> leaves() const {
    std::set<std::string> parents;
    for (const auto& [id, p] : parent) {
      if (p) parents.insert(*p);
    }
    std::vector<std::string> out;
    for (const auto& id : order) {
      if (!parents.count(id)) out.push_back(id);
    }
    return out;
  }

  std::vector<std::string> chain(std::string id) const {
    std::vector<std::string> out{id};
    while (parent.at(id)) {
      id = *parent.at(id);
      out.insert(out.begin(), id);
    }
    return out;
  }
};

// Applies one random add / jump / switch / reset to both trees. Returns the
// operation name.
inline std::string random_tree_op(std::mt19937_64& rng, tree::ExplorationTree& t, ShadowTree& shadow,
                                  std::int64_t& clock) {
  int op = std::uniform_int_distribution<int>(0, 99)(rng);
  auto pick = [&](const std::vector<std::string>& v) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
  };
  if (op < 50) {
    // Drill from the active node, or occasionally from a random visited node.
    std::string parent = op < 35 ? shadow.active : pick(shadow.order);
    auto spec = t.node(parent).spec;
    spec.transforms.push_back(
        tabular::Predicate::range("v", static_cast<double>(clock), tabular::kInf));
    auto id = t.add_child(parent, spec, ++clock);
    shadow.parent[id] = parent;
    shadow.order.push_back(id);
    shadow.active = id;
    return "add";
  }
  if (op < 75) {
    auto id = pick(shadow.order);
    t.jump_to(id);
    shadow.active = id;
    return "jump";
  }
  if (op < 97) {
    auto id = pick(shadow.leaves());
    t.switch_branch(id);
    shadow.active = id;
    return "switch";
  }
  t.reset();
  shadow.parent = {{shadow.root, std::nullopt}};
  shadow.order = {shadow.root};
  shadow.active = shadow.root;
  return "reset";
}

inline chart::ChartSpec tree_root_spec() {
  chart::ChartSpec s;
  s.data_ref = "d";
  s.encodings["x"] = chart::Encoding{std::string("v"), "quantitative", std::nullopt, nlohmann::json::object()};
  return s;
}

// Empty when `t` agrees with `shadow` on every tree property checked.
inline std::vector<std::string> tree_disagreements(const tree::ExplorationTree& t, const ShadowTree& shadow) {
  std::vector<std::string> out;
  for (auto& v : t.invariant_violations()) out.push_back(v);
  if (t.size() != shadow.order.size()) out.push_back("node count");
  if (t.active_id() != shadow.active) out.push_back("active node");
  std::size_t roots = 0;
  for (const auto& n : t.nodes()) {
    if (!n.parent) ++roots;
    if (!shadow.parent.count(n.id) || shadow.parent.at(n.id) != n.parent) out.push_back("parent link " + n.id);
  }
  if (roots != 1) out.push_back("root count");
  auto leaves = shadow.leaves();
  auto branches = t.branches();
  if (branches.size() != leaves.size()) out.push_back("branch count != leaf count");
  for (std::size_t i = 0; i < std::min(branches.size(), leaves.size()); ++i) {
    if (branches[i].leaf_id != leaves[i]) out.push_back("branch order");
    if (branches[i].path_labels.size() != shadow.chain(leaves[i]).size()) out.push_back("branch path length");
  }
  auto crumbs = t.breadcrumb();
  auto chain = shadow.chain(shadow.active);
  if (crumbs.size() != chain.size()) {
    out.push_back("breadcrumb length");
  } else {
    for (std::size_t i = 0; i < chain.size(); ++i) {
      if (crumbs[i].id != chain[i]) out.push_back("breadcrumb entry");
    }
  }
  return out;
}

}  // namespace drillscope::testing
