#pragma once

// Rectification of trees and forests by classification rules, and
// theory-aware simplification.

#include <chrono>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "rectx/error.hpp"
#include "rectx/logic.hpp"
#include "rectx/rules.hpp"
#include "rectx/theory.hpp"
#include "rectx/tree.hpp"

namespace rectx {

struct RectificationReport {
  std::size_t rules_applied = 0;
  std::size_t rules_changing_model = 0;
  std::size_t paths_patched = 0;
  std::size_t node_count_before = 0;
  std::size_t node_count_after = 0;
  std::size_t depth_before = 0;
  std::size_t depth_after = 0;
  double elapsed_seconds = 0.0;

  double changed_percentage() const {
    return rules_applied == 0 ? 0.0 : 100.0 * static_cast<double>(rules_changing_model) /
                                          static_cast<double>(rules_applied);
  }
};

namespace detail {

inline void require_car(const AssociationRule& r) {
  if (!r.is_car()) fail(ErrorKind::NotACar, "rectification needs a classification rule");
}

/// Comb testing `missing` in order: success leads to `head`, any failure to
/// `side`. A positive literal succeeds on the right branch.
inline NodeIndex emit_comb(TreeBuilder& b, const std::vector<Literal>& missing, bool head, bool side) {
  NodeIndex cur = b.leaf(head);
  for (auto it = missing.rbegin(); it != missing.rend(); ++it) {
    const NodeIndex off = b.leaf(side);
    cur = it->positive() ? b.internal(it->var(), off, cur) : b.internal(it->var(), cur, off);
  }
  return cur;
}

class TreeRectifier {
 public:
  TreeRectifier(const AssociationRule& r, Propagator& prop) : rule_(r), prop_(prop) {}

  DecisionTree run(const DecisionTree& t) {
    t_ = &t;
    patched_ = 0;
    prop_.propagate_from(rule_.body.literals());
    TreeBuilder b;
    const NodeIndex root = walk(b, t.root());
    prop_.reset();
    if (patched_ == 0) return t;
    return std::move(b).build(root);
  }

  std::size_t patched() const { return patched_; }

 private:
  NodeIndex walk(TreeBuilder& b, NodeIndex i) {
    const Node& n = t_->node(i);
    if (n.is_leaf) {
      const bool head = rule_.head.positive();
      if (n.label == head || prop_.conflict() || !prop_.satisfiable()) return b.leaf(n.label);
      ++patched_;
      std::vector<Literal> missing;
      for (Literal l : rule_.body) {
        if (std::find(path_.begin(), path_.end(), l) == path_.end()) missing.push_back(l);
      }
      return emit_comb(b, missing, head, n.label);
    }
    path_.push_back(Literal::neg(n.condition));
    prop_.assume(path_.back());
    const NodeIndex l = walk(b, n.left);
    prop_.retract();
    path_.back() = Literal::pos(n.condition);
    prop_.assume(path_.back());
    const NodeIndex r = walk(b, n.right);
    prop_.retract();
    path_.pop_back();
    return b.internal(n.condition, l, r);
  }

  const AssociationRule& rule_;
  Propagator& prop_;
  const DecisionTree* t_ = nullptr;
  std::vector<Literal> path_;
  std::size_t patched_ = 0;
};

class Simplifier {
 public:
  explicit Simplifier(Propagator& prop) : prop_(prop) {}

  DecisionTree run(const DecisionTree& t) {
    t_ = &t;
    prop_.reset();
    TreeBuilder b;
    leaf_[0] = b.leaf(false);
    leaf_[1] = b.leaf(true);
    table_.clear();
    const NodeIndex root = walk(b, t.root());
    return std::move(b).build(root);
  }

 private:
  struct Key {
    ConditionId cond;
    NodeIndex left, right;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      std::uint64_t h = k.cond;
      h = h * 0x9e3779b97f4a7c15ull ^ k.left;
      h = h * 0x9e3779b97f4a7c15ull ^ k.right;
      return static_cast<std::size_t>(h ^ (h >> 29));
    }
  };

  bool feasible(Literal l) {
    if (prop_.conflict()) return false;
    const bool ok = prop_.assume(l) && prop_.satisfiable();
    prop_.retract();
    return ok;
  }

  NodeIndex under(TreeBuilder& b, Literal l, NodeIndex child) {
    prop_.assume(l);
    const NodeIndex out = walk(b, child);
    prop_.retract();
    return out;
  }

  NodeIndex walk(TreeBuilder& b, NodeIndex i) {
    const Node& n = t_->node(i);
    if (n.is_leaf) return leaf_[n.label ? 1 : 0];
    const Literal x = Literal::pos(n.condition);
    const bool can_true = feasible(x);
    const bool can_false = feasible(~x);
    if (!can_true) return under(b, ~x, n.left);
    if (!can_false) return under(b, x, n.right);
    const NodeIndex l = under(b, ~x, n.left);
    const NodeIndex r = under(b, x, n.right);
    if (l == r) return l;
    auto [it, fresh] = table_.try_emplace(Key{n.condition, l, r}, 0);
    if (fresh) it->second = b.internal(n.condition, l, r);
    return it->second;
  }

  Propagator& prop_;
  const DecisionTree* t_ = nullptr;
  NodeIndex leaf_[2] = {0, 0};
  std::unordered_map<Key, NodeIndex, KeyHash> table_;
};

}  // namespace detail

/// Replacement for the leaf of `p`: a comb over the body literals missing
/// from p, in canonical order.
inline DecisionTree patch(const PathTerm& p, const AssociationRule& r) {
  detail::require_car(r);
  const bool head = r.head.positive();
  if (p.leaf_class == head) fail(ErrorKind::NoConflict, "path leaf already agrees with the rule head");
  std::vector<Literal> missing;
  for (Literal l : r.body) {
    if (!p.term.contains(l)) missing.push_back(l);
  }
  TreeBuilder b;
  const NodeIndex root = detail::emit_comb(b, missing, head, p.leaf_class);
  return std::move(b).build(root);
}

/// Patches every path p whose leaf disagrees with the head and for which
/// p ∧ b is consistent with the structural theory. Unpatched trees come back
/// unchanged.
inline DecisionTree rectify_tree(const DecisionTree& t, const AssociationRule& r, const DomainTheory& th) {
  detail::require_car(r);
  Propagator prop(th.structural, th.num_conditions);
  return detail::TreeRectifier(r, prop).run(t);
}

/// Prunes branches that contradict the structural theory given the tests
/// above them, then merges nodes whose two subtrees are identical.
/// Predictions on theory-satisfying inputs are unchanged.
inline DecisionTree simplify(const DecisionTree& t, const DomainTheory& th) {
  Propagator prop(th.structural, th.num_conditions);
  return detail::Simplifier(prop).run(t);
}

/// Applies `cars` one by one to every tree, simplifying each tree a rule
/// actually changed.
inline std::pair<RandomForest, RectificationReport> rectify_forest(const RandomForest& f,
                                                                   const std::vector<AssociationRule>& cars,
                                                                   const DomainTheory& th) {
  const auto start = std::chrono::steady_clock::now();
  for (const AssociationRule& r : cars) detail::require_car(r);
  for (std::size_t i = 0; i < cars.size(); ++i) {
    for (std::size_t j = i + 1; j < cars.size(); ++j) {
      if (conflicts(cars[i], cars[j], th.structural)) {
        fail(ErrorKind::ConflictingRuleSet,
             "rules " + std::to_string(i) + " (" + render_rule(cars[i], f.conditions) + ") and " +
                 std::to_string(j) + " (" + render_rule(cars[j], f.conditions) + ") conflict");
      }
    }
  }

  RectificationReport rep;
  rep.node_count_before = f.size();
  rep.depth_before = f.depth();
  RandomForest out = f;
  Propagator prop(th.structural, std::max<ConditionId>(th.num_conditions,
                                                       static_cast<ConditionId>(f.conditions.size())));
  for (const AssociationRule& r : cars) {
    ++rep.rules_applied;
    bool changed = false;
    detail::TreeRectifier rect(r, prop);
    for (DecisionTree& t : out.trees) {
      DecisionTree next = rect.run(t);
      if (rect.patched() == 0) continue;
      rep.paths_patched += rect.patched();
      t = detail::Simplifier(prop).run(next);
      changed = true;
    }
    if (changed) ++rep.rules_changing_model;
  }
  rep.node_count_after = out.size();
  rep.depth_after = out.depth();
  rep.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(out), rep};
}

}  // namespace rectx
