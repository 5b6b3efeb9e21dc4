#pragma once

// Abductive explanations for forests: direct reasons, greedy UP-majoritary
// reasons, best-of-many orderings, and an exhaustive checking oracle.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rectx/error.hpp"
#include "rectx/logic.hpp"
#include "rectx/tabular.hpp"
#include "rectx/theory.hpp"
#include "rectx/tree.hpp"

namespace rectx {

enum class ExplanationKind { Direct, UpMajoritary, SufficientOracle };
enum class TheoryTag { Th, ThE };

constexpr std::string_view to_string(ExplanationKind k) {
  switch (k) {
    case ExplanationKind::Direct: return "direct";
    case ExplanationKind::UpMajoritary: return "up-majoritary";
    case ExplanationKind::SufficientOracle: return "sufficient-oracle";
  }
  return "?";
}

constexpr std::string_view to_string(TheoryTag t) { return t == TheoryTag::Th ? "Th" : "Th_e"; }

struct Explanation {
  Term term;
  ExplanationKind kind = ExplanationKind::Direct;
  TheoryTag theory = TheoryTag::Th;
  std::optional<std::uint64_t> ordering_seed;
  bool prediction = false;
};

/// Counters for the greedy search.
struct ExplainStats {
  std::uint64_t sweeps = 0;        // removal attempts
  std::uint64_t tree_walks = 0;    // per-tree implicant checks
  std::uint64_t nodes_visited = 0;
  std::uint64_t rule_visits = 0;   // closure maintenance work
};

/// Number of trees that must support the prediction: floor(m/2)+1 for
/// class 1. For class 0 it is m - floor(m/2), which is the same for odd m and
/// is the most a tie-broken class-0 prediction can guarantee for even m.
constexpr std::size_t majority_threshold(std::size_t m, bool prediction) {
  return prediction ? m / 2 + 1 : m - m / 2;
}

/// Union of the literals tested along each tree's path for `bits`.
inline Explanation direct_reason(const RandomForest& f, std::span<const std::uint8_t> bits) {
  std::vector<Literal> lits;
  for (const DecisionTree& t : f.trees) {
    NodeIndex i = t.root();
    while (!t.node(i).is_leaf) {
      const Node& n = t.node(i);
      if (n.condition >= bits.size()) fail(ErrorKind::InvalidArgument, "instance does not cover the model");
      const bool v = bits[n.condition] != 0;
      lits.emplace_back(n.condition, v);
      i = v ? n.right : n.left;
    }
  }
  Explanation e;
  e.term = Term(std::move(lits));
  e.kind = ExplanationKind::Direct;
  e.prediction = predict_forest(f, bits);
  return e;
}

/// Greedy UP-majoritary reasons for one forest and one theory. Building the
/// explainer is cheap; state is per call and the object is not thread-safe.
class UpMajoritaryExplainer {
 public:
  UpMajoritaryExplainer(const RandomForest& f, const DomainTheory& th)
      : f_(f), theory_(th.combined()), tag_(th.extended() ? TheoryTag::ThE : TheoryTag::Th) {
    n_ = static_cast<ConditionId>(f.conditions.size());
    n_ = std::max(n_, theory_.var_bound());
    for (const DecisionTree& t : f.trees) {
      for (const Node& nd : t.nodes()) {
        if (!nd.is_leaf) n_ = std::max(n_, nd.condition + 1);
      }
    }
    words_ = (static_cast<std::size_t>(n_) + 63) / 64;
  }

  /// Single greedy pass in `order`, which must list each literal of t_x
  /// exactly once.
  Explanation explain(std::span<const std::uint8_t> bits, std::span<const Literal> order) {
    prepare(bits);
    check_order(order);
    return run(order);
  }

  /// Shortest result over `num_orderings` seeded shuffles of t_x; ordering k
  /// uses seed + k. Ties keep the first.
  Explanation best(std::span<const std::uint8_t> bits, std::size_t num_orderings, std::uint64_t seed) {
    if (num_orderings == 0) fail(ErrorKind::InvalidArgument, "need at least one ordering");
    prepare(bits);
    std::optional<Explanation> best;
    std::vector<Literal> order;
    for (std::size_t k = 0; k < num_orderings; ++k) {
      random_order(seed + k, order);
      Explanation e = run(order);
      e.ordering_seed = seed + k;
      if (!best || e.term.size() < best->term.size()) best = std::move(e);
      if (best->term.empty()) break;
    }
    return *best;
  }

  /// The order used by best() for ordering seed `s`.
  std::vector<Literal> ordering(std::span<const std::uint8_t> bits, std::uint64_t s) {
    prepare(bits);
    std::vector<Literal> order;
    random_order(s, order);
    return order;
  }

  const ExplainStats& stats() const { return stats_; }
  void reset_stats() { stats_ = {}; }

 private:
  using Words = std::vector<std::uint64_t>;

  // ---- per-instance setup -------------------------------------------------

  void prepare(std::span<const std::uint8_t> bits) {
    if (bits.size() < f_.conditions.size() || bits.size() < n_) {
      fail(ErrorKind::InvalidArgument, "instance does not cover the model's conditions");
    }
    if (!evaluate(theory_, bits)) {
      fail(ErrorKind::InfeasibleInstance, "instance violates the domain theory");
    }
    x_.assign(bits.begin(), bits.begin() + n_);
    prediction_ = predict_forest(f_, bits);
    bad_ = !prediction_;
    threshold_ = majority_threshold(f_.trees.size(), prediction_);

    // A clause can only fire towards its single literal true in x: the
    // others must all be refuted by literals of t_x. Those clauses are Horn
    // rules over the literals of t_x, indexed here by variable.
    rule_head_.clear();
    rule_size_.clear();
    rules_by_head_.assign(n_, {});
    rules_by_body_.assign(n_, {});
    for (const Clause& c : theory_) {
      std::optional<ConditionId> head;
      std::size_t true_lits = 0;
      for (Literal l : c) {
        if ((x_[l.var()] != 0) == l.positive()) {
          ++true_lits;
          head = l.var();
        }
      }
      if (true_lits != 1) continue;
      const auto r = static_cast<std::uint32_t>(rule_head_.size());
      rule_head_.push_back(*head);
      rule_size_.push_back(static_cast<std::uint32_t>(c.size() - 1));
      rules_by_head_[*head].push_back(r);
      for (Literal l : c) {
        if (l.var() != *head) rules_by_body_[l.var()].push_back(r);
      }
    }
  }

  void random_order(std::uint64_t s, std::vector<Literal>& order) const {
    order.clear();
    for (ConditionId v = 0; v < n_; ++v) order.emplace_back(v, x_[v] != 0);
    std::mt19937_64 rng(s);
    std::shuffle(order.begin(), order.end(), rng);
  }

  void check_order(std::span<const Literal> order) const {
    if (order.size() != n_) fail(ErrorKind::InvalidArgument, "ordering must list every literal of t_x");
    std::vector<std::uint8_t> seen(n_, 0);
    for (Literal l : order) {
      if (l.var() >= n_ || (x_[l.var()] != 0) != l.positive() || seen[l.var()]) {
        fail(ErrorKind::InvalidArgument, "ordering is not a permutation of t_x");
      }
      seen[l.var()] = 1;
    }
  }

  // ---- greedy pass ------------------------------------------------------------

  Explanation run(std::span<const Literal> order) {
    const std::size_t m = f_.trees.size();
    fact_.assign(n_, 1);
    in_d_.assign(n_, 1);
    count_.assign(rule_head_.size(), 0);
    for (std::size_t r = 0; r < rule_head_.size(); ++r) count_[r] = rule_size_[r];
    path_.assign(n_, -1);
    used_.assign(m, Words(words_, 0));
    passing_.assign(m, 0);
    std::size_t passing = 0;
    for (std::size_t i = 0; i < m; ++i) {
      passing_[i] = walk(i, used_[i]) ? 1 : 0;
      passing += passing_[i];
    }
    lost_mask_.assign(words_, 0);
    scratch_.assign(m, Words(words_, 0));

    for (Literal l : order) {
      ++stats_.sweeps;
      const ConditionId u = l.var();
      fact_[u] = 0;
      remove_closure(u);
      if (lost_.empty()) continue;  // u is still derived, nothing changes

      for (ConditionId v : lost_) lost_mask_[v / 64] |= std::uint64_t{1} << (v % 64);
      affected_.clear();
      for (std::size_t i = 0; i < m; ++i) {
        if (!passing_[i]) continue;
        for (std::size_t w = 0; w < words_; ++w) {
          if (used_[i][w] & lost_mask_[w]) {
            affected_.push_back(i);
            break;
          }
        }
      }
      std::size_t still = passing - affected_.size();
      still_ok_.assign(affected_.size(), 0);
      std::size_t k = 0;
      for (; k < affected_.size(); ++k) {
        if (still + (affected_.size() - k) < threshold_) break;
        std::fill(scratch_[k].begin(), scratch_[k].end(), 0);
        if (walk(affected_[k], scratch_[k])) {
          still_ok_[k] = 1;
          ++still;
        }
      }
      const bool accept = k == affected_.size() && still >= threshold_;
      if (accept) {
        for (std::size_t j = 0; j < affected_.size(); ++j) {
          const std::size_t i = affected_[j];
          if (still_ok_[j]) {
            used_[i].swap(scratch_[j]);
          } else {
            passing_[i] = 0;
          }
        }
        passing = still;
      }
      for (ConditionId v : lost_) lost_mask_[v / 64] = 0;
      if (!accept) {
        fact_[u] = 1;
        restore_closure();
      }
    }

    std::vector<Literal> kept;
    for (ConditionId v = 0; v < n_; ++v) {
      if (fact_[v]) kept.emplace_back(v, x_[v] != 0);
    }
    Explanation e;
    e.term = Term(std::move(kept));
    e.kind = ExplanationKind::UpMajoritary;
    e.theory = tag_;
    e.prediction = prediction_;
    return e;
  }

  // ---- closure maintenance ----------------------------------------------------
  // in_d_ is the UP closure of the current facts. Removing a fact first
  // withdraws every atom whose derivation may depend on it, then re-derives
  // what is still supported. lost_ receives the atoms that disappear.

  void remove_closure(ConditionId u) {
    suspects_.clear();
    lost_.clear();
    mark_.resize(n_, 0);
    suspects_.push_back(u);
    mark_[u] = 1;
    for (std::size_t k = 0; k < suspects_.size(); ++k) {
      const ConditionId s = suspects_[k];
      for (std::uint32_t r : rules_by_body_[s]) {
        ++stats_.rule_visits;
        const ConditionId h = rule_head_[r];
        if (count_[r] != rule_size_[r] || mark_[h] || fact_[h]) continue;
        mark_[h] = 1;
        suspects_.push_back(h);
      }
    }
    for (ConditionId s : suspects_) {
      in_d_[s] = 0;
      for (std::uint32_t r : rules_by_body_[s]) --count_[r];
    }
    // Re-derive: a suspect comes back once one of its rules is complete.
    queue_.clear();
    for (ConditionId s : suspects_) {
      for (std::uint32_t r : rules_by_head_[s]) {
        ++stats_.rule_visits;
        if (count_[r] == rule_size_[r]) {
          readd(s);
          break;
        }
      }
    }
    for (std::size_t k = 0; k < queue_.size(); ++k) {
      for (std::uint32_t r : rules_by_body_[queue_[k]]) {
        ++stats_.rule_visits;
        const ConditionId h = rule_head_[r];
        if (count_[r] == rule_size_[r] && !in_d_[h]) readd(h);
      }
    }
    for (ConditionId s : suspects_) {
      mark_[s] = 0;
      if (!in_d_[s]) lost_.push_back(s);
    }
  }

  void readd(ConditionId a) {
    if (in_d_[a]) return;
    in_d_[a] = 1;
    for (std::uint32_t r : rules_by_body_[a]) ++count_[r];
    queue_.push_back(a);
  }

  void restore_closure() {
    for (ConditionId a : lost_) {
      in_d_[a] = 1;
      for (std::uint32_t r : rules_by_body_[a]) ++count_[r];
    }
    lost_.clear();
  }

  // ---- tree walks -------------------------------------------------------------
  // A tree supports the prediction iff no leaf of the wrong class is
  // reachable when branches refuted by the closure are cut. `used` collects
  // the variables whose closure value cut a branch.

  bool walk(std::size_t tree, Words& used) {
    ++stats_.tree_walks;
    const DecisionTree& t = f_.trees[tree];
    return walk_from(t, t.root(), used);
  }

  bool walk_from(const DecisionTree& t, NodeIndex i, Words& used) {
    for (;;) {
      ++stats_.nodes_visited;
      const Node& nd = t.node(i);
      if (nd.is_leaf) return nd.label != bad_;
      const ConditionId v = nd.condition;
      if (in_d_[v]) {
        used[v / 64] |= std::uint64_t{1} << (v % 64);
        i = x_[v] ? nd.right : nd.left;
        continue;
      }
      if (path_[v] >= 0) {
        i = path_[v] ? nd.right : nd.left;
        continue;
      }
      path_[v] = 0;
      bool ok = walk_from(t, nd.left, used);
      if (ok) {
        path_[v] = 1;
        ok = walk_from(t, nd.right, used);
      }
      path_[v] = -1;
      return ok;
    }
  }

  const RandomForest& f_;
  CnfFormula theory_;
  TheoryTag tag_;
  ConditionId n_ = 0;
  std::size_t words_ = 0;

  std::vector<std::uint8_t> x_;
  bool prediction_ = false;
  bool bad_ = false;
  std::size_t threshold_ = 0;

  std::vector<ConditionId> rule_head_;
  std::vector<std::uint32_t> rule_size_;
  std::vector<std::vector<std::uint32_t>> rules_by_head_, rules_by_body_;

  std::vector<std::uint8_t> fact_, in_d_, mark_;
  std::vector<std::uint32_t> count_;
  std::vector<std::int8_t> path_;
  std::vector<Words> used_, scratch_;
  std::vector<std::uint8_t> passing_, still_ok_;
  std::vector<std::size_t> affected_;
  Words lost_mask_;
  std::vector<ConditionId> suspects_, lost_, queue_;
  ExplainStats stats_;
};

inline Explanation up_majoritary_reason(const RandomForest& f, const DomainTheory& th,
                                        std::span<const std::uint8_t> bits,
                                        std::span<const Literal> elimination_order) {
  return UpMajoritaryExplainer(f, th).explain(bits, elimination_order);
}

inline Explanation best_reason(const RandomForest& f, const DomainTheory& th, std::span<const std::uint8_t> bits,
                               std::size_t num_orderings = 100, std::uint64_t seed = 0) {
  return UpMajoritaryExplainer(f, th).best(bits, num_orderings, seed);
}

/// Elimination order: `prefer_drop` first, the rest of t_x shuffled with
/// `seed`, `prefer_keep` last. Both sets keep their canonical order.
inline std::vector<Literal> preference_order(const Term& t_x, const Term& prefer_keep, const Term& prefer_drop,
                                             std::uint64_t seed) {
  for (Literal l : prefer_keep) {
    if (prefer_drop.contains(l)) fail(ErrorKind::OverlappingPreferenceSets, "literal in both preference sets");
  }
  if (!t_x.includes(prefer_keep) || !t_x.includes(prefer_drop)) {
    fail(ErrorKind::InvalidArgument, "preference sets must be subsets of t_x");
  }
  std::vector<Literal> out(prefer_drop.begin(), prefer_drop.end());
  std::vector<Literal> middle;
  for (Literal l : t_x) {
    if (!prefer_keep.contains(l) && !prefer_drop.contains(l)) middle.push_back(l);
  }
  std::mt19937_64 rng(seed);
  std::shuffle(middle.begin(), middle.end(), rng);
  out.insert(out.end(), middle.begin(), middle.end());
  out.insert(out.end(), prefer_keep.begin(), prefer_keep.end());
  return out;
}

inline constexpr std::size_t kOracleMaxConditions = 16;

/// Exhaustive check: every assignment covered by `t` that satisfies the
/// theory gets the forest's prediction for `bits`.
inline bool oracle_is_abductive(const Term& t, const RandomForest& f, const DomainTheory& th,
                                std::span<const std::uint8_t> bits) {
  const CnfFormula theory = th.combined();
  const std::size_t n = std::max<std::size_t>(
      {f.conditions.size(), static_cast<std::size_t>(theory.var_bound()), bits.size()});
  if (n > kOracleMaxConditions) {
    fail(ErrorKind::TooLargeForOracle, "exhaustive check limited to " + std::to_string(kOracleMaxConditions) +
                                           " conditions, got " + std::to_string(n));
  }
  const bool target = predict_forest(f, bits);
  std::vector<ConditionId> free_vars;
  BitVector y(n, 0);
  for (ConditionId v = 0; v < n; ++v) {
    if (t.contains(Literal::pos(v))) {
      y[v] = 1;
    } else if (!t.contains(Literal::neg(v))) {
      free_vars.push_back(v);
    }
  }
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << free_vars.size()); ++mask) {
    for (std::size_t k = 0; k < free_vars.size(); ++k) y[free_vars[k]] = (mask >> k) & 1u;
    if (!evaluate(theory, y)) continue;
    if (predict_forest(f, y) != target) return false;
  }
  return true;
}

}  // namespace rectx
