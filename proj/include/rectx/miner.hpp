#pragma once

// Exact-confidence association rule mining over a binarized dataset.
//
// With confidence 1 a rule's support equals its body's support, so bodies
// are visited by decreasing cover size and every head implied on all of the
// covered rows is emitted at once.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "rectx/error.hpp"
#include "rectx/logic.hpp"
#include "rectx/rules.hpp"
#include "rectx/tabular.hpp"
#include "rectx/theory.hpp"

namespace rectx {

struct MinerConfig {
  std::size_t max_rule_size = 3;  // body plus head
  std::size_t max_cars = 100;
  std::size_t max_other_rules = 100;
  std::chrono::duration<double> timeout = std::chrono::seconds(3600);
  double min_support = 0.0;  // rules need support > 0 and >= this
};

struct MiningResult {
  std::vector<AssociationRule> cars;
  std::vector<AssociationRule> others;
  bool timed_out = false;
  std::size_t bodies_examined = 0;
  std::size_t conflicts_rejected = 0;
};

namespace detail {

using Words = std::vector<std::uint64_t>;

inline std::size_t popcount(const Words& w) {
  std::size_t n = 0;
  for (std::uint64_t x : w) n += static_cast<std::size_t>(std::popcount(x));
  return n;
}

inline bool subset_of(const Words& a, const Words& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] & ~b[i]) return false;
  }
  return true;
}

/// Kept rules of one output stream, indexed by head for conflict checks.
class RuleStream {
 public:
  RuleStream(std::vector<AssociationRule>& out, std::size_t cap, const CnfFormula& theory)
      : out_(out), cap_(cap), prop_(theory) {}

  bool full() const { return out_.size() >= cap_; }

  /// Appends `r` unless it conflicts with a rule already kept.
  bool offer(AssociationRule r) {
    if (full()) return false;
    auto it = by_head_.find(~r.head);
    if (it != by_head_.end()) {
      for (std::size_t k : it->second) {
        if (compatible(r.body, out_[k].body)) return false;
      }
    }
    by_head_[r.head].push_back(out_.size());
    out_.push_back(std::move(r));
    return true;
  }

 private:
  bool compatible(const Term& a, const Term& b) {
    std::vector<Literal> both(a.begin(), a.end());
    both.insert(both.end(), b.begin(), b.end());
    if (!prop_.propagate_from(both)) return false;
    return prop_.satisfiable();
  }

  std::vector<AssociationRule>& out_;
  std::size_t cap_;
  Propagator prop_;
  std::map<RuleHead, std::vector<std::size_t>> by_head_;
};

}  // namespace detail

/// Rules b => h with 1 <= |b| <= max_rule_size - 1, confidence exactly 1,
/// support > 0, b consistent with the structural theory and h not derived
/// from b by unit propagation. Rules are taken by decreasing support, ties in
/// canonical order, and a rule is kept only if it conflicts with no earlier
/// kept rule. CARs and the other rules are capped separately.
inline MiningResult mine(const BinarizedDataset& d, const DomainTheory& th, const MinerConfig& cfg) {
  if (d.empty()) fail(ErrorKind::EmptyDataset, "cannot mine an empty dataset");
  if (cfg.max_rule_size < 2 || cfg.max_rule_size > 3) {
    fail(ErrorKind::InvalidArgument, "rule size must be 2 or 3");
  }
  using clock = std::chrono::steady_clock;
  const auto deadline = clock::now() + std::chrono::duration_cast<clock::duration>(cfg.timeout);

  const std::size_t n_rows = d.size();
  const auto n_vars = static_cast<ConditionId>(d.conditions.size());
  const std::size_t n_items = 2 * static_cast<std::size_t>(n_vars);
  const std::size_t row_words = (n_rows + 63) / 64;
  const CnfFormula& theory = th.structural;

  // cover[item] = rows where the literal with that code holds.
  std::vector<detail::Words> cover(n_items, detail::Words(row_words, 0));
  detail::Words cover_y(row_words, 0), cover_not_y(row_words, 0), good_rows(row_words, 0);
  for (std::size_t r = 0; r < n_rows; ++r) {
    const BinarizedRow& row = d.rows[r];
    if (row.bits.size() != n_vars) fail(ErrorKind::SchemaMismatch, "row width differs from the condition count");
    const std::uint64_t bit = std::uint64_t{1} << (r % 64);
    for (ConditionId v = 0; v < n_vars; ++v) {
      cover[Literal(v, row.bits[v] != 0).code()][r / 64] |= bit;
    }
    (row.label ? cover_y : cover_not_y)[r / 64] |= bit;
    if (evaluate(theory, row.bits)) good_rows[r / 64] |= bit;
  }

  const auto min_count = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(cfg.min_support * static_cast<double>(n_rows) - 1e-9)));

  struct Body {
    std::uint32_t count;
    std::uint32_t a;
    std::uint32_t b;  // == a for single-literal bodies
  };
  std::vector<Body> bodies;
  for (std::uint32_t a = 0; a < n_items; ++a) {
    const std::size_t ca = detail::popcount(cover[a]);
    if (ca < min_count) continue;
    bodies.push_back({static_cast<std::uint32_t>(ca), a, a});
    if (cfg.max_rule_size < 3) continue;
    for (std::uint32_t b = (a | 1u) + 1; b < n_items; ++b) {
      std::size_t c = 0;
      for (std::size_t w = 0; w < row_words; ++w) {
        c += static_cast<std::size_t>(std::popcount(cover[a][w] & cover[b][w]));
      }
      if (c >= min_count) bodies.push_back({static_cast<std::uint32_t>(c), a, b});
    }
  }
  // Decreasing support; equal supports in lexicographic body order, where
  // {a} precedes {a, b}.
  std::sort(bodies.begin(), bodies.end(), [](const Body& x, const Body& y) {
    if (x.count != y.count) return x.count > y.count;
    if (x.a != y.a) return x.a < y.a;
    const bool xs = x.a == x.b, ys = y.a == y.b;
    if (xs != ys) return xs;
    return x.b < y.b;
  });

  MiningResult res;
  detail::RuleStream cars(res.cars, cfg.max_cars, theory);
  detail::RuleStream others(res.others, cfg.max_other_rules, theory);
  Propagator up(theory, n_vars);

  std::vector<std::uint64_t> closure((n_items + 63) / 64);
  std::vector<std::vector<std::uint64_t>> row_items(n_rows, std::vector<std::uint64_t>(closure.size(), 0));
  for (std::size_t r = 0; r < n_rows; ++r) {
    for (ConditionId v = 0; v < n_vars; ++v) {
      const std::uint32_t code = Literal(v, d.rows[r].bits[v] != 0).code();
      row_items[r][code / 64] |= std::uint64_t{1} << (code % 64);
    }
  }

  detail::Words body_cover(row_words);
  for (const Body& body : bodies) {
    if (cars.full() && others.full()) break;
    if ((res.bodies_examined & 255u) == 0 && clock::now() > deadline) {
      res.timed_out = true;
      break;
    }
    ++res.bodies_examined;

    for (std::size_t w = 0; w < row_words; ++w) {
      body_cover[w] = cover[body.a][w] & (body.a == body.b ? ~std::uint64_t{0} : cover[body.b][w]);
    }
    const bool head_y = !cars.full() && detail::subset_of(body_cover, cover_y);
    const bool head_not_y = !cars.full() && detail::subset_of(body_cover, cover_not_y);
    const bool want_others = !others.full();
    if (!head_y && !head_not_y && !want_others) continue;

    const Literal la = Literal::from_code(body.a), lb = Literal::from_code(body.b);
    Term term = body.a == body.b ? Term{la} : Term{la, lb};

    std::vector<Literal> heads;
    if (want_others) {
      std::fill(closure.begin(), closure.end(), ~std::uint64_t{0});
      for (std::size_t w = 0; w < row_words; ++w) {
        for (std::uint64_t bits = body_cover[w]; bits; bits &= bits - 1) {
          const std::size_t r = w * 64 + static_cast<std::size_t>(std::countr_zero(bits));
          for (std::size_t k = 0; k < closure.size(); ++k) closure[k] &= row_items[r][k];
        }
      }
      for (std::size_t k = 0; k < closure.size(); ++k) {
        for (std::uint64_t bits = closure[k]; bits; bits &= bits - 1) {
          const std::size_t code = k * 64 + static_cast<std::size_t>(std::countr_zero(bits));
          if (code >= n_items) break;
          const Literal h = Literal::from_code(static_cast<std::uint32_t>(code));
          if (h.var() == la.var() || h.var() == lb.var()) continue;
          heads.push_back(h);
        }
      }
    }
    if (heads.empty() && !head_y && !head_not_y) continue;

    // The body must be consistent with the theory; a covered row that
    // satisfies the theory is a witness.
    bool body_sat = false;
    for (std::size_t w = 0; w < row_words && !body_sat; ++w) body_sat = (body_cover[w] & good_rows[w]) != 0;
    if (!body_sat) body_sat = sat(theory, term);
    if (!body_sat) continue;

    const double supp = static_cast<double>(body.count) / static_cast<double>(n_rows);
    if (!heads.empty()) {
      up.propagate_from(term.literals());
      for (Literal h : heads) {
        if (others.full()) break;
        if (up.is_true(h)) continue;
        if (!others.offer({term, RuleHead::condition(h), supp, 1.0})) ++res.conflicts_rejected;
      }
    }
    if (head_y && !cars.offer({term, RuleHead::label(true), supp, 1.0})) ++res.conflicts_rejected;
    if (head_not_y && !cars.offer({term, RuleHead::label(false), supp, 1.0})) ++res.conflicts_rejected;
  }
  return res;
}

}  // namespace rectx
