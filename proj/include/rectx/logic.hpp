#pragma once

// Boolean layer over the condition set X: literals, terms, clauses, CNF
// formulas, unit propagation and a small complete satisfiability check.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "rectx/error.hpp"

namespace rectx {

using ConditionId = std::uint32_t;

/// A condition x_i or its negation. Encoded as 2*i (positive) or 2*i+1
/// (negative), so the natural order is (condition id, positive first).
class Literal {
 public:
  constexpr Literal() = default;
  constexpr Literal(ConditionId var, bool positive)
      : code_{var * 2u + (positive ? 0u : 1u)} {}

  static constexpr Literal pos(ConditionId var) { return {var, true}; }
  static constexpr Literal neg(ConditionId var) { return {var, false}; }
  static constexpr Literal from_code(std::uint32_t code) {
    Literal l;
    l.code_ = code;
    return l;
  }

  constexpr ConditionId var() const { return code_ >> 1; }
  constexpr bool positive() const { return (code_ & 1u) == 0; }
  constexpr std::uint32_t code() const { return code_; }
  constexpr Literal operator~() const { return from_code(code_ ^ 1u); }

  friend constexpr auto operator<=>(Literal, Literal) = default;

 private:
  std::uint32_t code_ = 0;
};

inline std::string to_string(Literal l) {
  return (l.positive() ? "x" : "!x") + std::to_string(l.var() + 1);
}

namespace detail {

struct TermPolicy {
  static constexpr ErrorKind error = ErrorKind::InconsistentTerm;
  static constexpr const char* what = "term contains complementary literals on x";
};

struct ClausePolicy {
  static constexpr ErrorKind error = ErrorKind::ValidClause;
  static constexpr const char* what = "clause contains complementary literals on x";
};

}  // namespace detail

/// Sorted, duplicate-free set of literals with no complementary pair.
/// `Term` reads it conjunctively, `Clause` disjunctively.
template <class Policy>
class LiteralSet {
 public:
  using value_type = Literal;
  using const_iterator = std::vector<Literal>::const_iterator;

  LiteralSet() = default;
  LiteralSet(std::initializer_list<Literal> lits)
      : LiteralSet(std::vector<Literal>(lits)) {}
  explicit LiteralSet(std::vector<Literal> lits) : lits_(std::move(lits)) {
    std::sort(lits_.begin(), lits_.end());
    lits_.erase(std::unique(lits_.begin(), lits_.end()), lits_.end());
    for (std::size_t i = 1; i < lits_.size(); ++i) {
      if (lits_[i].var() == lits_[i - 1].var()) {
        fail(Policy::error, Policy::what + std::to_string(lits_[i].var() + 1));
      }
    }
  }

  std::size_t size() const { return lits_.size(); }
  bool empty() const { return lits_.empty(); }
  const_iterator begin() const { return lits_.begin(); }
  const_iterator end() const { return lits_.end(); }
  Literal operator[](std::size_t i) const { return lits_[i]; }
  std::span<const Literal> literals() const { return lits_; }

  bool contains(Literal l) const {
    return std::binary_search(lits_.begin(), lits_.end(), l);
  }
  bool mentions(ConditionId var) const {
    return contains(Literal::pos(var)) || contains(Literal::neg(var));
  }
  bool includes(const LiteralSet& other) const {
    return std::includes(lits_.begin(), lits_.end(), other.lits_.begin(),
                         other.lits_.end());
  }

  LiteralSet without(Literal l) const {
    LiteralSet out;
    out.lits_.reserve(lits_.size());
    for (Literal x : lits_) {
      if (x != l) out.lits_.push_back(x);
    }
    return out;
  }

  LiteralSet with(Literal l) const {
    std::vector<Literal> v = lits_;
    v.push_back(l);
    return LiteralSet(std::move(v));
  }

  friend bool operator==(const LiteralSet&, const LiteralSet&) = default;
  friend auto operator<=>(const LiteralSet& a, const LiteralSet& b) {
    return std::lexicographical_compare_three_way(a.lits_.begin(), a.lits_.end(),
                                                  b.lits_.begin(), b.lits_.end());
  }

 private:
  std::vector<Literal> lits_;
};

using Term = LiteralSet<detail::TermPolicy>;
using Clause = LiteralSet<detail::ClausePolicy>;

/// Clause equivalent to the negation of `t`.
inline Clause negation_of(const Term& t) {
  std::vector<Literal> lits;
  lits.reserve(t.size());
  for (Literal l : t) lits.push_back(~l);
  return Clause(std::move(lits));
}

inline std::string to_string(const Term& t) {
  std::string out = "{";
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i) out += ", ";
    out += to_string(t[i]);
  }
  return out + "}";
}

struct ClauseHash {
  std::size_t operator()(const Clause& c) const noexcept {
    std::size_t h = 0x9e3779b97f4a7c15ull;
    for (Literal l : c) h = (h ^ l.code()) * 0x100000001b3ull;
    return h;
  }
};

/// Conjunction of clauses, duplicates dropped on insertion. Empty means true.
class CnfFormula {
 public:
  CnfFormula() = default;
  CnfFormula(std::initializer_list<Clause> clauses) {
    for (const Clause& c : clauses) add(c);
  }
  explicit CnfFormula(const std::vector<Clause>& clauses) {
    for (const Clause& c : clauses) add(c);
  }

  /// Returns false when the clause was already present.
  bool add(Clause c) {
    if (!seen_.insert(c).second) return false;
    literal_count_ += c.size();
    clauses_.push_back(std::move(c));
    return true;
  }

  void append(const CnfFormula& other) {
    for (const Clause& c : other.clauses_) add(c);
  }

  bool contains(const Clause& c) const { return seen_.count(c) != 0; }
  const std::vector<Clause>& clauses() const { return clauses_; }
  std::size_t size() const { return clauses_.size(); }
  bool empty() const { return clauses_.empty(); }
  auto begin() const { return clauses_.begin(); }
  auto end() const { return clauses_.end(); }
  const Clause& operator[](std::size_t i) const { return clauses_[i]; }
  std::size_t literal_count() const { return literal_count_; }

  /// One past the largest condition id mentioned.
  ConditionId var_bound() const {
    ConditionId bound = 0;
    for (const Clause& c : clauses_) {
      for (Literal l : c) bound = std::max(bound, l.var() + 1);
    }
    return bound;
  }

  friend bool operator==(const CnfFormula& a, const CnfFormula& b) {
    return a.clauses_ == b.clauses_;
  }

 private:
  std::vector<Clause> clauses_;
  std::unordered_set<Clause, ClauseHash> seen_;
  std::size_t literal_count_ = 0;
};

inline CnfFormula conjoin(const CnfFormula& a, const CnfFormula& b) {
  CnfFormula out = a;
  out.append(b);
  return out;
}

/// Truth value of `f` under a complete assignment (bit i = value of x_i).
inline bool evaluate(const CnfFormula& f, std::span<const std::uint8_t> bits) {
  for (const Clause& c : f) {
    bool sat = false;
    for (Literal l : c) {
      if (l.var() >= bits.size()) {
        fail(ErrorKind::InvalidArgument, "assignment does not cover " + to_string(l));
      }
      if ((bits[l.var()] != 0) == l.positive()) {
        sat = true;
        break;
      }
    }
    if (!sat) return false;
  }
  return true;
}

/// Two-watched-literal unit propagation over a fixed CNF with a stack of
/// assumption levels, plus a DPLL completion for exact satisfiability.
///
/// Not thread-safe: watch lists are rearranged while propagating. Give each
/// thread its own instance; the formula it was built from is only read.
class Propagator {
 public:
  explicit Propagator(const CnfFormula& formula, ConditionId num_vars = 0) {
    ensure_var(std::max(num_vars, formula.var_bound()));
    for (const Clause& c : formula) {
      if (c.empty()) {
        base_conflict_ = true;
      } else if (c.size() == 1) {
        units_.push_back(c[0]);
      } else {
        const auto id = static_cast<std::uint32_t>(start_.size() - 1);
        for (Literal l : c) lits_.push_back(l.code());
        start_.push_back(static_cast<std::uint32_t>(lits_.size()));
        watches_[c[0].code()].push_back(id);
        watches_[c[1].code()].push_back(id);
        if (c.size() >= 3) long_clauses_.push_back(id);
      }
    }
    reset();
  }

  ConditionId num_vars() const { return static_cast<ConditionId>(value_.size()); }

  /// Back to the formula's own consequences (its unit clauses, propagated).
  void reset() {
    undo_to(0);
    levels_.clear();
    conflict_ = base_conflict_;
    if (!conflict_) {
      for (Literal u : units_) {
        if (!enqueue(u)) {
          conflict_ = true;
          break;
        }
      }
      if (!conflict_) conflict_ = !propagate();
    }
  }

  /// Clears everything, then assumes all of `lits` on a single level.
  /// Returns false on conflict.
  bool propagate_from(std::span<const Literal> lits) {
    reset();
    levels_.push_back({trail_.size(), conflict_});
    if (conflict_) return false;
    for (Literal l : lits) {
      ensure_var(l.var() + 1);
      if (!enqueue(l)) {
        conflict_ = true;
        return false;
      }
    }
    conflict_ = !propagate();
    return !conflict_;
  }

  /// Opens a new level asserting `lit`. Returns false if the state is
  /// conflicting afterwards; retract() still undoes the level.
  bool assume(Literal lit) {
    ensure_var(lit.var() + 1);
    levels_.push_back({trail_.size(), conflict_});
    if (conflict_) return false;
    if (!enqueue(lit)) {
      conflict_ = true;
      return false;
    }
    conflict_ = !propagate();
    return !conflict_;
  }

  void retract() {
    const Level lv = levels_.back();
    levels_.pop_back();
    undo_to(lv.trail_size);
    conflict_ = lv.conflict;
  }

  std::size_t depth() const { return levels_.size(); }
  bool conflict() const { return conflict_; }

  bool is_true(Literal l) const { return value(l) > 0; }
  bool is_false(Literal l) const { return value(l) < 0; }
  bool is_assigned(ConditionId v) const { return v < value_.size() && value_[v] != 0; }

  /// Every literal currently true, in assignment order.
  std::span<const Literal> trail() const { return trail_; }

  /// Exact: does the formula have a model extending the current trail?
  /// The propagator is left in the state it had on entry.
  bool satisfiable() {
    if (conflict_) return false;
    const std::size_t d = depth();
    const bool result = search();
    while (depth() > d) retract();
    return result;
  }

  /// Watch visits plus literal inspections since construction or reset_work().
  std::uint64_t work() const { return work_; }
  void reset_work() { work_ = 0; }

 private:
  struct Level {
    std::size_t trail_size;
    bool conflict;
  };

  void ensure_var(ConditionId n) {
    if (n > value_.size()) {
      value_.resize(n, 0);
      watches_.resize(2 * static_cast<std::size_t>(n));
    }
  }

  int value(Literal l) const {
    if (l.var() >= value_.size()) return 0;
    const int v = value_[l.var()];
    return l.positive() ? v : -v;
  }

  bool enqueue(Literal l) {
    ++work_;
    const int v = value(l);
    if (v > 0) return true;
    if (v < 0) return false;
    value_[l.var()] = l.positive() ? 1 : -1;
    trail_.push_back(l);
    return true;
  }

  void undo_to(std::size_t size) {
    while (trail_.size() > size) {
      value_[trail_.back().var()] = 0;
      trail_.pop_back();
    }
    qhead_ = std::min(qhead_, size);
  }

  bool propagate() {
    while (qhead_ < trail_.size()) {
      const Literal falsified = ~trail_[qhead_++];
      auto& ws = watches_[falsified.code()];
      std::size_t i = 0, j = 0;
      while (i < ws.size()) {
        ++work_;
        const std::uint32_t c = ws[i++];
        std::uint32_t* cl = lits_.data() + start_[c];
        const std::uint32_t len = start_[c + 1] - start_[c];
        if (cl[0] == falsified.code()) std::swap(cl[0], cl[1]);
        const Literal first = Literal::from_code(cl[0]);
        if (value(first) > 0) {
          ws[j++] = c;
          continue;
        }
        bool moved = false;
        for (std::uint32_t k = 2; k < len; ++k) {
          ++work_;
          if (value(Literal::from_code(cl[k])) >= 0) {
            std::swap(cl[1], cl[k]);
            watches_[cl[1]].push_back(c);
            moved = true;
            break;
          }
        }
        if (moved) continue;
        ws[j++] = c;
        if (!enqueue(first)) {
          while (i < ws.size()) ws[j++] = ws[i++];
          ws.resize(j);
          qhead_ = trail_.size();
          return false;
        }
      }
      ws.resize(j);
    }
    return true;
  }

  // Residual binary clauses after a conflict-free propagation mention only
  // unassigned variables, so once every longer clause is satisfied the
  // current state extends to a model iff the unit+binary part alone is
  // satisfiable. Branching is therefore only needed on longer clauses.
  bool search() {
    for (std::uint32_t c : long_clauses_) {
      const std::uint32_t* cl = lits_.data() + start_[c];
      const std::uint32_t len = start_[c + 1] - start_[c];
      bool satisfied = false;
      std::optional<Literal> open;
      for (std::uint32_t k = 0; k < len; ++k) {
        const Literal l = Literal::from_code(cl[k]);
        const int v = value(l);
        if (v > 0) {
          satisfied = true;
          break;
        }
        if (v == 0 && !open) open = l;
      }
      if (satisfied) continue;
      const Literal pick = *open;
      if (assume(~pick) && search()) return true;
      retract();
      if (assume(pick) && search()) return true;
      retract();
      return false;
    }
    return binary_part_satisfiable();
  }

  bool binary_part_satisfiable() {
    if (binary_sat_) return *binary_sat_;
    CnfFormula binary;
    for (Literal u : units_) binary.add(Clause{u});
    for (std::size_t c = 0; c + 1 < start_.size(); ++c) {
      if (start_[c + 1] - start_[c] != 2) continue;
      binary.add(Clause{Literal::from_code(lits_[start_[c]]),
                        Literal::from_code(lits_[start_[c] + 1])});
    }
    bool ok = !base_conflict_;
    if (ok) {
      // 2-CNF: a conflict-free propagation of one literal never needs to be
      // revisited, so one trial per variable is complete.
      Propagator p(binary, num_vars());
      ok = !p.conflict();
      for (ConditionId v = 0; ok && v < p.num_vars(); ++v) {
        if (p.is_assigned(v)) continue;
        if (p.assume(Literal::neg(v))) continue;
        p.retract();
        ok = p.assume(Literal::pos(v));
      }
    }
    binary_sat_ = ok;
    return ok;
  }

  std::vector<std::uint32_t> lits_;
  std::vector<std::uint32_t> start_{0};
  std::vector<std::vector<std::uint32_t>> watches_;
  std::vector<std::uint32_t> long_clauses_;
  std::vector<Literal> units_;
  bool base_conflict_ = false;

  std::vector<std::int8_t> value_;
  std::vector<Literal> trail_;
  std::vector<Level> levels_;
  std::size_t qhead_ = 0;
  bool conflict_ = false;
  std::optional<bool> binary_sat_;
  std::uint64_t work_ = 0;
};

struct PropagationResult {
  Term derived;
  bool conflict = false;
};

/// UP closure of `assumptions` under `theory`.
inline PropagationResult unit_propagate(const CnfFormula& theory, const Term& assumptions) {
  Propagator p(theory);
  const bool ok = p.propagate_from(assumptions.literals());
  auto trail = p.trail();
  return {Term(std::vector<Literal>(trail.begin(), trail.end())), !ok};
}

/// True iff every clause of `phi` contains a literal derived by unit
/// propagation from `t` and `theory`. Vacuously true when propagation
/// conflicts.
inline bool is_up_implicant(const Term& t, const CnfFormula& phi, const CnfFormula& theory) {
  Propagator p(theory);
  if (!p.propagate_from(t.literals())) return true;
  return std::all_of(phi.begin(), phi.end(), [&](const Clause& c) {
    return std::any_of(c.begin(), c.end(), [&](Literal l) { return p.is_true(l); });
  });
}

/// Complete consistency check of `assumptions` with `theory`. The
/// assumptions may contain complementary literals (then the answer is false).
inline bool sat(const CnfFormula& theory, std::span<const Literal> assumptions) {
  Propagator p(theory);
  if (!p.propagate_from(assumptions)) return false;
  return p.satisfiable();
}

inline bool sat(const CnfFormula& theory, const Term& assumptions) {
  return sat(theory, assumptions.literals());
}

}  // namespace rectx
