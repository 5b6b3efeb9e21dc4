#pragma once

// Decision trees over the condition set X and random forests of them.
// Left child = condition false, right child = condition true.

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "rectx/condition.hpp"
#include "rectx/error.hpp"
#include "rectx/logic.hpp"

namespace rectx {

using NodeIndex = std::uint32_t;

struct Node {
  bool is_leaf = true;
  bool label = false;         // leaves
  ConditionId condition = 0;  // internal nodes
  NodeIndex left = 0;         // taken when the condition is 0
  NodeIndex right = 0;        // taken when the condition is 1

  friend bool operator==(const Node&, const Node&) = default;
};

class DecisionTree;

/// Assembles a tree bottom-up: children are added before their parent.
class TreeBuilder {
 public:
  NodeIndex leaf(bool label) {
    nodes_.push_back(Node{true, label, 0, 0, 0});
    return last();
  }

  NodeIndex internal(ConditionId condition, NodeIndex left, NodeIndex right) {
    if (left >= nodes_.size() || right >= nodes_.size()) {
      fail(ErrorKind::MalformedModel, "children must be added before their parent");
    }
    nodes_.push_back(Node{false, false, condition, left, right});
    return last();
  }

  /// Deep copy of the subtree of `src` rooted at `at`.
  NodeIndex copy(const DecisionTree& src, NodeIndex at);

  DecisionTree build(NodeIndex root) &&;

  std::size_t size() const { return nodes_.size(); }

 private:
  NodeIndex last() const { return static_cast<NodeIndex>(nodes_.size() - 1); }
  std::vector<Node> nodes_;
};

/// Arena-backed binary tree. Every arena slot is reachable from the root
/// exactly once, so node count == arena size.
class DecisionTree {
 public:
  DecisionTree() : nodes_{Node{}}, root_{0} {}

  static DecisionTree leaf(bool label) {
    DecisionTree t;
    t.nodes_[0].label = label;
    return t;
  }

  DecisionTree(std::vector<Node> nodes, NodeIndex root)
      : nodes_(std::move(nodes)), root_(root) {
    validate();
  }

  NodeIndex root() const { return root_; }
  const Node& node(NodeIndex i) const { return nodes_[i]; }
  std::span<const Node> nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }

  /// Edges on the longest root-to-leaf path.
  std::size_t depth() const {
    std::size_t best = 0;
    std::vector<std::pair<NodeIndex, std::size_t>> stack{{root_, 0}};
    while (!stack.empty()) {
      auto [i, d] = stack.back();
      stack.pop_back();
      const Node& n = nodes_[i];
      if (n.is_leaf) {
        best = std::max(best, d);
      } else {
        stack.emplace_back(n.right, d + 1);
        stack.emplace_back(n.left, d + 1);
      }
    }
    return best;
  }

  bool predict(std::span<const std::uint8_t> bits) const {
    NodeIndex i = root_;
    while (!nodes_[i].is_leaf) {
      const Node& n = nodes_[i];
      if (n.condition >= bits.size()) {
        fail(ErrorKind::InvalidArgument, "instance does not cover condition " + std::to_string(n.condition));
      }
      i = bits[n.condition] ? n.right : n.left;
    }
    return nodes_[i].label;
  }

  /// Conditions tested, pre-order, possibly repeated.
  std::vector<ConditionId> tested_conditions() const {
    std::vector<ConditionId> out;
    for_each_preorder([&](const Node& n) {
      if (!n.is_leaf) out.push_back(n.condition);
    });
    return out;
  }

  /// Visits nodes root first, left subtree before right.
  template <class F>
  void for_each_preorder(F&& f) const {
    std::vector<NodeIndex> stack{root_};
    while (!stack.empty()) {
      const NodeIndex i = stack.back();
      stack.pop_back();
      const Node& n = nodes_[i];
      f(n);
      if (!n.is_leaf) {
        stack.push_back(n.right);
        stack.push_back(n.left);
      }
    }
  }

  /// Same tree with every leaf label flipped (computes the negation).
  DecisionTree negated() const {
    DecisionTree t = *this;
    for (Node& n : t.nodes_) {
      if (n.is_leaf) n.label = !n.label;
    }
    return t;
  }

  bool is_constant() const { return nodes_[root_].is_leaf; }

  /// Structural equality from the roots (arena layout is irrelevant).
  friend bool operator==(const DecisionTree& a, const DecisionTree& b) {
    std::vector<std::pair<NodeIndex, NodeIndex>> stack{{a.root_, b.root_}};
    while (!stack.empty()) {
      auto [i, j] = stack.back();
      stack.pop_back();
      const Node& x = a.nodes_[i];
      const Node& y = b.nodes_[j];
      if (x.is_leaf != y.is_leaf) return false;
      if (x.is_leaf) {
        if (x.label != y.label) return false;
        continue;
      }
      if (x.condition != y.condition) return false;
      stack.emplace_back(x.left, y.left);
      stack.emplace_back(x.right, y.right);
    }
    return true;
  }

  /// Pre-order text such as `(x1 0 (x2 1 0))`.
  std::string serialize() const {
    std::string out;
    serialize_into(root_, out);
    return out;
  }

 private:
  void serialize_into(NodeIndex i, std::string& out) const {
    const Node& n = nodes_[i];
    if (n.is_leaf) {
      out += n.label ? '1' : '0';
      return;
    }
    out += "(x" + std::to_string(n.condition + 1) + ' ';
    serialize_into(n.left, out);
    out += ' ';
    serialize_into(n.right, out);
    out += ')';
  }

  void validate() const {
    if (nodes_.empty() || root_ >= nodes_.size()) {
      fail(ErrorKind::MalformedModel, "tree root out of range");
    }
    std::vector<std::uint8_t> seen(nodes_.size(), 0);
    std::vector<NodeIndex> stack{root_};
    std::size_t visited = 0;
    while (!stack.empty()) {
      const NodeIndex i = stack.back();
      stack.pop_back();
      if (i >= nodes_.size()) fail(ErrorKind::MalformedModel, "child index out of range");
      if (seen[i]) fail(ErrorKind::MalformedModel, "node reachable twice (cycle or shared subtree)");
      seen[i] = 1;
      ++visited;
      if (!nodes_[i].is_leaf) {
        stack.push_back(nodes_[i].right);
        stack.push_back(nodes_[i].left);
      }
    }
    if (visited != nodes_.size()) fail(ErrorKind::MalformedModel, "unreachable nodes in tree");
  }

  std::vector<Node> nodes_;
  NodeIndex root_ = 0;
};

inline NodeIndex TreeBuilder::copy(const DecisionTree& src, NodeIndex at) {
  const Node& n = src.node(at);
  if (n.is_leaf) return leaf(n.label);
  const NodeIndex l = copy(src, n.left);
  const NodeIndex r = copy(src, n.right);
  return internal(n.condition, l, r);
}

inline DecisionTree TreeBuilder::build(NodeIndex root) && {
  if (root >= nodes_.size()) fail(ErrorKind::MalformedModel, "builder root out of range");
  // Re-emit in pre-order from `root`: abandoned nodes are dropped and
  // shared subtrees are duplicated.
  std::vector<Node> out;
  out.reserve(nodes_.size());
  auto emit = [&](auto&& self, NodeIndex i) -> NodeIndex {
    const auto at = static_cast<NodeIndex>(out.size());
    out.push_back(nodes_[i]);
    if (!nodes_[i].is_leaf) {
      const NodeIndex l = self(self, nodes_[i].left);
      const NodeIndex r = self(self, nodes_[i].right);
      out[at].left = l;
      out[at].right = r;
    }
    return at;
  };
  emit(emit, root);
  return DecisionTree(std::move(out), 0);
}

/// Root-to-leaf path read as a term, with the class of its leaf.
struct PathTerm {
  Term term;
  bool leaf_class = false;
  friend bool operator==(const PathTerm&, const PathTerm&) = default;
};

/// One entry per leaf, pre-order. Paths testing a condition both ways are
/// unreachable and skipped.
inline std::vector<PathTerm> enumerate_paths(const DecisionTree& t) {
  std::vector<PathTerm> out;
  std::vector<Literal> path;
  auto walk = [&](auto&& self, NodeIndex i) -> void {
    const Node& n = t.node(i);
    if (n.is_leaf) {
      std::vector<Literal> lits = path;
      std::sort(lits.begin(), lits.end());
      for (std::size_t k = 1; k < lits.size(); ++k) {
        if (lits[k].var() == lits[k - 1].var() && lits[k] != lits[k - 1]) return;
      }
      out.push_back({Term(std::move(lits)), n.label});
      return;
    }
    path.push_back(Literal::neg(n.condition));
    self(self, n.left);
    path.back() = Literal::pos(n.condition);
    self(self, n.right);
    path.pop_back();
  };
  walk(walk, t.root());
  return out;
}

/// Terms of the 1-paths; their disjunction is equivalent to the tree.
inline std::vector<Term> to_dnf(const DecisionTree& t) {
  std::vector<Term> out;
  for (PathTerm& p : enumerate_paths(t)) {
    if (p.leaf_class) out.push_back(std::move(p.term));
  }
  return out;
}

/// Negations of the 0-paths; their conjunction is equivalent to the tree.
inline CnfFormula to_cnf(const DecisionTree& t) {
  CnfFormula out;
  for (const PathTerm& p : enumerate_paths(t)) {
    if (!p.leaf_class) out.add(negation_of(p.term));
  }
  return out;
}

/// F = {T_1..T_m} sharing one condition table X.
struct RandomForest {
  std::vector<DecisionTree> trees;
  std::vector<Condition> conditions;

  std::size_t size() const {
    std::size_t s = 0;
    for (const DecisionTree& t : trees) s += t.size();
    return s;
  }

  std::size_t depth() const {
    std::size_t d = 0;
    for (const DecisionTree& t : trees) d = std::max(d, t.depth());
    return d;
  }

  /// Throws unless m >= 1, ids are dense, and every node's condition exists.
  void validate() const {
    if (trees.empty()) fail(ErrorKind::MalformedModel, "forest has no trees");
    for (std::size_t i = 0; i < conditions.size(); ++i) {
      if (conditions[i].id != i) fail(ErrorKind::MalformedModel, "condition ids must be dense and ordered");
    }
    for (const DecisionTree& t : trees) {
      for (const Node& n : t.nodes()) {
        if (!n.is_leaf && n.condition >= conditions.size()) {
          fail(ErrorKind::DanglingConditionId, "node tests unknown condition id " + std::to_string(n.condition));
        }
      }
    }
  }
};

inline std::size_t count_votes(const RandomForest& f, std::span<const std::uint8_t> bits) {
  std::size_t ones = 0;
  for (const DecisionTree& t : f.trees) ones += t.predict(bits) ? 1 : 0;
  return ones;
}

inline bool predict_tree(const DecisionTree& t, std::span<const std::uint8_t> bits) {
  return t.predict(bits);
}

/// Strict majority of 1-votes; ties go to class 0.
inline bool predict_forest(const RandomForest& f, std::span<const std::uint8_t> bits) {
  return 2 * count_votes(f, bits) > f.trees.size();
}

inline double vote_fraction(const RandomForest& f, std::span<const std::uint8_t> bits) {
  return static_cast<double>(count_votes(f, bits)) / static_cast<double>(f.trees.size());
}

/// Conditions labelling some node, by first appearance (tree order, then
/// pre-order), deduplicated by attribute and predicate.
inline std::vector<Condition> collect_conditions(const RandomForest& f) {
  std::vector<Condition> out;
  std::vector<std::uint8_t> taken(f.conditions.size(), 0);
  std::unordered_set<std::string> seen;
  for (const DecisionTree& t : f.trees) {
    for (ConditionId id : t.tested_conditions()) {
      if (taken[id]) continue;
      taken[id] = 1;
      const Condition& c = f.conditions[id];
      if (seen.insert(to_string(c)).second) out.push_back(c);
    }
  }
  return out;
}

/// Renumbers conditions densely by first appearance, merging duplicate tests
/// and dropping unused entries. Predictions are unchanged.
inline RandomForest canonicalize(const RandomForest& f) {
  RandomForest out;
  std::vector<std::int64_t> remap(f.conditions.size(), -1);
  std::unordered_map<std::string, ConditionId> by_text;
  for (const DecisionTree& t : f.trees) {
    for (ConditionId id : t.tested_conditions()) {
      if (remap[id] >= 0) continue;
      const Condition& c = f.conditions[id];
      auto [it, fresh] = by_text.emplace(to_string(c), static_cast<ConditionId>(out.conditions.size()));
      if (!fresh) {
        remap[id] = it->second;
      } else {
        Condition copy = c;
        copy.id = static_cast<ConditionId>(out.conditions.size());
        remap[id] = copy.id;
        out.conditions.push_back(std::move(copy));
      }
    }
  }
  out.trees.reserve(f.trees.size());
  for (const DecisionTree& t : f.trees) {
    std::vector<Node> nodes(t.nodes().begin(), t.nodes().end());
    for (Node& n : nodes) {
      if (!n.is_leaf) n.condition = static_cast<ConditionId>(remap[n.condition]);
    }
    out.trees.emplace_back(std::move(nodes), t.root());
  }
  return out;
}

}  // namespace rectx
