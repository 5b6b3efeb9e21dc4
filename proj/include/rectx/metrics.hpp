#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "rectx/error.hpp"

namespace rectx {

struct Confusion {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

  void add(bool predicted, bool actual) {
    if (predicted) {
      ++(actual ? tp : fp);
    } else {
      ++(actual ? fn : tn);
    }
  }
};

/// 2TP / (2TP + FP + FN); 0 when there is nothing to score.
inline double f_score(const Confusion& c) {
  const double den = 2.0 * static_cast<double>(c.tp) + static_cast<double>(c.fp + c.fn);
  return den == 0.0 ? 0.0 : 2.0 * static_cast<double>(c.tp) / den;
}

/// sqrt(TPR * TNR); a rate with an empty denominator counts as 0.
inline double g_mean(const Confusion& c) {
  const auto rate = [](std::size_t hit, std::size_t miss) {
    return hit + miss == 0 ? 0.0 : static_cast<double>(hit) / static_cast<double>(hit + miss);
  };
  return std::sqrt(rate(c.tp, c.fn) * rate(c.tn, c.fp));
}

/// Probability that a random positive outscores a random negative, ties
/// counting one half. Exact, via ranks over sorted scores.
inline double auc(std::span<const std::pair<double, bool>> scored) {
  std::size_t pos = 0, neg = 0;
  for (const auto& [s, y] : scored) ++(y ? pos : neg);
  if (pos == 0 || neg == 0) {
    fail(ErrorKind::DegenerateClassDistribution, "AUC needs at least one positive and one negative");
  }
  std::vector<std::pair<double, bool>> v(scored.begin(), scored.end());
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  // Twice the pair credit, in integers: 2 per won pair, 1 per tie.
  std::uint64_t credit2 = 0;
  std::size_t neg_below = 0;
  for (std::size_t i = 0; i < v.size();) {
    std::size_t j = i, p = 0, n = 0;
    while (j < v.size() && v[j].first == v[i].first) {
      ++(v[j].second ? p : n);
      ++j;
    }
    credit2 += 2 * static_cast<std::uint64_t>(p) * neg_below + static_cast<std::uint64_t>(p) * n;
    neg_below += n;
    i = j;
  }
  return static_cast<double>(credit2) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

inline double auc(const std::vector<std::pair<double, bool>>& scored) {
  return auc(std::span<const std::pair<double, bool>>(scored));
}

}  // namespace rectx
