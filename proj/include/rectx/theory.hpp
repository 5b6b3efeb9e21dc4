#pragma once

// Structural domain theory Th over X and its extension Th_e by mined rules.

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "rectx/condition.hpp"
#include "rectx/error.hpp"
#include "rectx/logic.hpp"
#include "rectx/rules.hpp"

namespace rectx {

struct DomainTheory {
  CnfFormula structural;
  CnfFormula mined;
  ConditionId num_conditions = 0;

  /// Th_e = structural ∧ mined.
  CnfFormula combined() const { return conjoin(structural, mined); }
  bool extended() const { return !mined.empty(); }
};

/// Threshold chains (A>tb implies A>ta whenever ta < tb, all pairs) and
/// pairwise exclusions between distinct values of one categorical attribute.
inline DomainTheory build_theory(const std::vector<Condition>& conditions) {
  DomainTheory th;
  th.num_conditions = static_cast<ConditionId>(conditions.size());

  // attribute -> ids in first-appearance order
  std::vector<std::string> order;
  std::map<std::string, std::vector<ConditionId>> by_attr;
  for (const Condition& c : conditions) {
    auto [it, fresh] = by_attr.try_emplace(c.attribute);
    if (fresh) order.push_back(c.attribute);
    it->second.push_back(c.id);
  }

  for (const std::string& attr : order) {
    std::vector<ConditionId> thresholds, categories;
    for (ConditionId id : by_attr[attr]) {
      (conditions[id].is_threshold() ? thresholds : categories).push_back(id);
    }
    std::sort(thresholds.begin(), thresholds.end(), [&](ConditionId a, ConditionId b) {
      const double ta = conditions[a].threshold(), tb = conditions[b].threshold();
      return ta != tb ? ta < tb : a < b;
    });
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
      for (std::size_t j = i + 1; j < thresholds.size(); ++j) {
        const ConditionId lo = thresholds[i], hi = thresholds[j];
        if (conditions[lo].threshold() == conditions[hi].threshold()) continue;
        th.structural.add(Clause{Literal::neg(hi), Literal::pos(lo)});
      }
    }
    for (std::size_t i = 0; i < categories.size(); ++i) {
      for (std::size_t j = i + 1; j < categories.size(); ++j) {
        if (conditions[categories[i]].category() == conditions[categories[j]].category()) continue;
        th.structural.add(Clause{Literal::neg(categories[i]), Literal::neg(categories[j])});
      }
    }
  }
  return th;
}

/// Th ∧ (A \ A_c): one clause per rule, appended to the mined part.
inline DomainTheory extend_theory(const DomainTheory& th, const std::vector<AssociationRule>& rules) {
  DomainTheory out = th;
  for (const AssociationRule& r : rules) {
    if (r.is_car()) fail(ErrorKind::CarInTheory, "classification rule cannot enter the domain theory");
    const Clause c = r.as_clause();
    for (Literal l : c) out.num_conditions = std::max(out.num_conditions, l.var() + 1);
    out.mined.add(c);
  }
  return out;
}

inline bool conflicts(const AssociationRule& r1, const AssociationRule& r2, const DomainTheory& th) {
  return conflicts(r1, r2, th.structural);
}

}  // namespace rectx
