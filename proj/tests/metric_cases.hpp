#pragma once

// Hand-computed expected values for the classification metrics.

#include <cmath>
#include <utility>
#include <vector>

#include "rectx/metrics.hpp"

namespace rectx::testing {

struct ConfusionCase {
  Confusion c;
  double f;
  double g;
};

inline std::vector<ConfusionCase> confusion_cases() {
  // {tp, fp, fn, tn}
  return {
      {{5, 0, 0, 5}, 1.0, 1.0},
      {{3, 1, 2, 4}, 2.0 / 3.0, std::sqrt(0.48)},
      {{0, 3, 4, 3}, 0.0, 0.0},
      {{10, 5, 5, 80}, 2.0 / 3.0, std::sqrt(32.0 / 51.0)},
      {{1, 0, 9, 90}, 2.0 / 11.0, std::sqrt(0.1)},
      {{7, 2, 1, 0}, 14.0 / 17.0, 0.0},
      {{50, 50, 50, 50}, 0.5, 0.5},
      {{4, 1, 0, 3}, 8.0 / 9.0, std::sqrt(0.75)},
      {{0, 0, 0, 6}, 0.0, 0.0},
      {{2, 3, 1, 4}, 0.5, std::sqrt(8.0 / 21.0)},
  };
}

struct AucCase {
  std::vector<std::pair<double, bool>> scores;
  double auc;
};

inline std::vector<AucCase> auc_cases() {
  return {
      {{{0.9, true}, {0.1, false}}, 1.0},
      {{{0.1, true}, {0.9, false}}, 0.0},
      {{{0.5, true}, {0.5, false}}, 0.5},
      {{{0.8, true}, {0.6, true}, {0.6, false}, {0.2, false}}, 0.875},
      {{{1, true}, {0, true}, {1, false}, {0, false}}, 0.5},
      {{{0.3, false}, {0.7, true}, {0.4, true}, {0.5, false}, {0.9, true}}, 5.0 / 6.0},
      {{{0.5, true}, {0.5, true}, {0.5, true}, {0.5, false}, {0.5, false}}, 0.5},
      {{{2.0 / 3.0, true}, {1.0 / 3.0, false}, {2.0 / 3.0, false}, {1, true}, {0, false}}, 11.0 / 12.0},
      {{{0.1, true}, {0.2, false}, {0.3, true}, {0.4, false}}, 0.25},
      {{{0.5, true}, {0.5, true}, {0.2, false}, {0.5, false}, {0.9, false}}, 0.5},
  };
}

}  // namespace rectx::testing
