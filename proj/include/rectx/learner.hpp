#pragma once

// CART learning with Gini impurity: single trees and bagged random forests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "rectx/condition.hpp"
#include "rectx/error.hpp"
#include "rectx/tabular.hpp"
#include "rectx/tree.hpp"

namespace rectx {

struct TreeParams {
  std::optional<std::size_t> max_depth;  // unlimited when empty
  std::size_t min_samples_leaf = 1;
  std::uint64_t seed = 0;
};

struct ForestParams {
  std::size_t m = 100;
  std::uint64_t seed = 0;
  bool bootstrap = true;
  /// Fraction of attributes examined per node; ceil(sqrt(p)) when empty.
  std::optional<double> feature_subsample;
  std::optional<std::size_t> max_depth;
  std::size_t min_samples_leaf = 1;
};

namespace detail {

struct Split {
  std::size_t attribute = 0;
  Predicate predicate;
  double score = 0.0;  // weighted Gini of the two children
};

inline double gini_pair(std::size_t n0, std::size_t n1) {
  const double n = static_cast<double>(n0 + n1);
  return n == 0.0 ? 0.0 : 2.0 * static_cast<double>(n0) * static_cast<double>(n1) / n;
}

class CartBuilder {
 public:
  CartBuilder(const Dataset& d, std::optional<std::size_t> max_depth, std::size_t min_leaf)
      : d_(d), max_depth_(max_depth), min_leaf_(std::max<std::size_t>(1, min_leaf)) {}

  /// `features` selects how many attributes to examine per node (0 = all).
  DecisionTree grow(std::vector<std::size_t> rows, std::size_t features, std::mt19937_64* rng) {
    features_ = features;
    rng_ = rng;
    TreeBuilder b;
    const NodeIndex root = node(b, rows, 0);
    return std::move(b).build(root);
  }

  std::vector<Condition>& conditions() { return conditions_; }

 private:
  NodeIndex node(TreeBuilder& b, std::vector<std::size_t>& rows, std::size_t depth) {
    std::size_t ones = 0;
    for (std::size_t r : rows) ones += d_.rows[r].label;
    const bool majority = 2 * ones > rows.size();
    if (ones == 0 || ones == rows.size() || (max_depth_ && depth >= *max_depth_)) {
      return b.leaf(majority);
    }
    const std::optional<Split> s = best_split(rows);
    if (!s) return b.leaf(majority);

    std::vector<std::size_t> left, right;
    for (std::size_t r : rows) (goes_right(*s, r) ? right : left).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    const ConditionId cond = intern(*s);
    const NodeIndex l = node(b, left, depth + 1);
    const NodeIndex r = node(b, right, depth + 1);
    return b.internal(cond, l, r);
  }

  bool goes_right(const Split& s, std::size_t row) const {
    const double v = d_.rows[row].values[s.attribute];
    if (const auto* g = std::get_if<GreaterThan>(&s.predicate)) return v > g->threshold;
    const auto code = d_.schema[s.attribute].category_code(std::get<Equals>(s.predicate).value);
    return code && static_cast<std::size_t>(v) == *code;
  }

  ConditionId intern(const Split& s) {
    Condition c;
    c.attribute = d_.schema[s.attribute].name;
    c.kind = d_.schema[s.attribute].kind;
    c.predicate = s.predicate;
    const std::string key = to_string(c);
    auto [it, fresh] = ids_.try_emplace(key, static_cast<ConditionId>(conditions_.size()));
    if (fresh) {
      c.id = it->second;
      conditions_.push_back(std::move(c));
    }
    return it->second;
  }

  std::optional<Split> best_split(const std::vector<std::size_t>& rows) {
    const std::size_t p = d_.schema.size();
    std::vector<std::size_t> attrs(p);
    std::iota(attrs.begin(), attrs.end(), std::size_t{0});
    std::size_t k = p;
    if (rng_ && features_ > 0 && features_ < p) {
      std::shuffle(attrs.begin(), attrs.end(), *rng_);
      k = features_;
    }
    std::optional<Split> best;
    auto consider = [&](std::size_t a) {
      const std::optional<Split> s = best_on(a, rows);
      if (!s) return;
      if (!best || s->score < best->score - 1e-12 ||
          (s->score <= best->score + 1e-12 && a < best->attribute)) {
        best = s;
      }
    };
    for (std::size_t i = 0; i < k; ++i) consider(attrs[i]);
    // Keep drawing features until one admits a valid split.
    for (std::size_t i = k; !best && i < p; ++i) consider(attrs[i]);
    return best;
  }

  /// Best split on one attribute; ties keep the lowest threshold.
  std::optional<Split> best_on(std::size_t a, const std::vector<std::size_t>& rows) const {
    const AttributeSchema& attr = d_.schema[a];
    const std::size_t n = rows.size();
    std::size_t total1 = 0;
    for (std::size_t r : rows) total1 += d_.rows[r].label;
    std::optional<Split> best;
    auto offer = [&](std::size_t nl, std::size_t l1, Predicate pred) {
      const std::size_t nr = n - nl, r1 = total1 - l1;
      if (nl < min_leaf_ || nr < min_leaf_) return;
      const double score = (gini_pair(nl - l1, l1) + gini_pair(nr - r1, r1)) / static_cast<double>(n);
      if (!best || score < best->score - 1e-12) best = Split{a, std::move(pred), score};
    };

    if (attr.kind == AttributeKind::Numerical) {
      std::vector<std::pair<double, std::uint8_t>> vals;
      vals.reserve(n);
      for (std::size_t r : rows) vals.emplace_back(d_.rows[r].values[a], d_.rows[r].label);
      std::sort(vals.begin(), vals.end());
      std::size_t l1 = 0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        l1 += vals[i].second;
        const double lo = vals[i].first, hi = vals[i + 1].first;
        if (lo == hi) continue;
        double t = std::midpoint(lo, hi);
        if (!(t < hi)) t = lo;
        offer(i + 1, l1, GreaterThan{t});
      }
      return best;
    }

    // One-vs-rest Equals tests in dictionary order; left = value differs.
    const std::size_t nc = attr.categories.size();
    std::vector<std::size_t> cnt(nc, 0), cnt1(nc, 0);
    for (std::size_t r : rows) {
      const auto code = static_cast<std::size_t>(d_.rows[r].values[a]);
      ++cnt[code];
      cnt1[code] += d_.rows[r].label;
    }
    for (std::size_t c = 0; c < nc; ++c) {
      if (cnt[c] == 0 || cnt[c] == n) continue;
      if (attr.kind == AttributeKind::Boolean && attr.categories[c] != "1") continue;
      offer(n - cnt[c], total1 - cnt1[c], Equals{attr.categories[c]});
    }
    return best;
  }

  const Dataset& d_;
  std::optional<std::size_t> max_depth_;
  std::size_t min_leaf_;
  std::size_t features_ = 0;
  std::mt19937_64* rng_ = nullptr;
  std::vector<Condition> conditions_;
  std::unordered_map<std::string, ConditionId> ids_;
};

}  // namespace detail

/// Unrestricted CART by default: splits while a node is impure and some
/// split separates its rows. The result is a forest with one tree.
inline RandomForest learn_tree(const Dataset& train, const TreeParams& params = {}) {
  if (train.empty()) fail(ErrorKind::EmptyTrainingSet, "cannot learn from an empty training set");
  detail::CartBuilder b(train, params.max_depth, params.min_samples_leaf);
  std::vector<std::size_t> rows(train.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  RandomForest f;
  f.trees.push_back(b.grow(std::move(rows), 0, nullptr));
  f.conditions = std::move(b.conditions());
  return canonicalize(f);
}

/// Bagged CART trees; tree i draws from its own generator seeded seed + i.
inline RandomForest learn_forest(const Dataset& train, const ForestParams& params = {}) {
  if (train.empty()) fail(ErrorKind::EmptyTrainingSet, "cannot learn from an empty training set");
  if (params.m == 0) fail(ErrorKind::InvalidArgument, "forest needs at least one tree");
  const std::size_t p = train.schema.size();
  std::size_t features = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(p))));
  if (params.feature_subsample) {
    const double frac = *params.feature_subsample;
    if (!(frac > 0.0 && frac <= 1.0)) fail(ErrorKind::InvalidArgument, "feature subsample must lie in (0, 1]");
    features = static_cast<std::size_t>(std::ceil(frac * static_cast<double>(p)));
  }
  features = std::clamp<std::size_t>(features, 1, std::max<std::size_t>(p, 1));

  detail::CartBuilder b(train, params.max_depth, params.min_samples_leaf);
  RandomForest f;
  f.trees.reserve(params.m);
  for (std::size_t i = 0; i < params.m; ++i) {
    std::mt19937_64 rng(params.seed + i);
    std::vector<std::size_t> rows(train.size());
    if (params.bootstrap) {
      std::uniform_int_distribution<std::size_t> pick(0, train.size() - 1);
      for (std::size_t& r : rows) r = pick(rng);
    } else {
      std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    f.trees.push_back(b.grow(std::move(rows), features, &rng));
  }
  f.conditions = std::move(b.conditions());
  return canonicalize(f);
}

}  // namespace rectx
