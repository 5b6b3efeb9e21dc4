#pragma once

// Shared fixtures, generators and brute-force oracles for the test suites.
// The oracles deliberately avoid the library's propagator and search code.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rectx/rectx.hpp"

namespace rectx::testing {

// ---- parsing helpers ---------------------------------------------------------

/// Parses the `(x1 0 (x2 1 0))` notation of DecisionTree::serialize().
inline DecisionTree parse_tree(const std::string& text) {
  std::istringstream in(text);
  TreeBuilder b;
  auto next_token = [&]() {
    std::string tok;
    char c;
    while (in.get(c)) {
      if (c == '(' || c == ')') {
        if (!tok.empty()) {
          in.unget();
          return tok;
        }
        return std::string(1, c);
      }
      if (c == ' ') {
        if (!tok.empty()) return tok;
        continue;
      }
      tok += c;
    }
    return tok;
  };
  auto parse = [&](auto&& self) -> NodeIndex {
    const std::string tok = next_token();
    if (tok == "0" || tok == "1") return b.leaf(tok == "1");
    if (tok != "(") throw std::runtime_error("bad tree text: " + text);
    const std::string var = next_token();
    const auto id = static_cast<ConditionId>(std::stoul(var.substr(1)) - 1);
    const NodeIndex l = self(self);
    const NodeIndex r = self(self);
    if (next_token() != ")") throw std::runtime_error("bad tree text: " + text);
    return b.internal(id, l, r);
  };
  const NodeIndex root = parse(parse);
  return std::move(b).build(root);
}

/// `x3` -> positive literal on id 2, `!x3` -> its negation.
inline Literal lit(const std::string& s) {
  const bool neg = s.front() == '!';
  return Literal(static_cast<ConditionId>(std::stoul(s.substr(neg ? 2 : 1)) - 1), !neg);
}

inline Term term(std::initializer_list<const char*> lits) {
  std::vector<Literal> v;
  for (const char* s : lits) v.push_back(lit(s));
  return Term(std::move(v));
}

inline Clause clause(std::initializer_list<const char*> lits) {
  std::vector<Literal> v;
  for (const char* s : lits) v.push_back(lit(s));
  return Clause(std::move(v));
}

inline AssociationRule car(std::initializer_list<const char*> body, bool positive) {
  return {term(body), RuleHead::label(positive), 0.0, 1.0};
}

inline AssociationRule implication(std::initializer_list<const char*> body, const char* head) {
  return {term(body), RuleHead::condition(lit(head)), 0.0, 1.0};
}

// ---- the loan example ----------------------------------------------------------

inline std::vector<Condition> loan_conditions() {
  const char* texts[] = {"A>25", "A>60", "I>30", "I>50", "S=U", "S=TP", "S=PP"};
  std::vector<Condition> out;
  for (ConditionId i = 0; i < 7; ++i) out.push_back(parse_condition(texts[i], i));
  return out;
}

inline const char* kT1 = "(x1 0 (x2 (x3 0 1) (x7 0 1)))";
inline const char* kT2 = "(x5 (x4 0 (x6 0 1)) 0)";
inline const char* kT3 = "(x7 (x4 0 1) (x1 0 1))";

inline RandomForest loan_forest() {
  RandomForest f;
  f.conditions = loan_conditions();
  f.trees = {parse_tree(kT1), parse_tree(kT2), parse_tree(kT3)};
  return f;
}

/// The five clauses of the loan example's domain theory.
inline CnfFormula loan_theory_clauses() {
  return CnfFormula{clause({"!x2", "x1"}), clause({"!x4", "x3"}), clause({"!x5", "!x6"}),
                    clause({"!x5", "!x7"}), clause({"!x6", "!x7"})};
}

inline const BitVector kLoanX{1, 0, 1, 1, 0, 0, 1};

// ---- brute force -------------------------------------------------------------------

/// Calls fn(bits) for all 2^n assignments.
inline void for_each_assignment(std::size_t n, const std::function<void(const BitVector&)>& fn) {
  BitVector bits(n, 0);
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
    for (std::size_t i = 0; i < n; ++i) bits[i] = (m >> i) & 1u;
    fn(bits);
  }
}

inline bool brute_eval(const CnfFormula& f, const BitVector& bits) {
  for (const Clause& c : f) {
    bool ok = false;
    for (Literal l : c) ok = ok || ((bits[l.var()] != 0) == l.positive());
    if (!ok) return false;
  }
  return true;
}

inline bool brute_sat(const CnfFormula& f, const std::vector<Literal>& assumptions, std::size_t n) {
  bool found = false;
  for_each_assignment(n, [&](const BitVector& b) {
    if (found) return;
    for (Literal l : assumptions) {
      if ((b[l.var()] != 0) != l.positive()) return;
    }
    found = brute_eval(f, b);
  });
  return found;
}

/// Does every model of f ∧ assumptions satisfy `l`?
inline bool brute_entails(const CnfFormula& f, const std::vector<Literal>& assumptions, Literal l, std::size_t n) {
  std::vector<Literal> a = assumptions;
  a.push_back(~l);
  return !brute_sat(f, a, n);
}

struct NaiveUp {
  std::set<Literal> derived;
  bool conflict = false;
};

/// Unit resolution to a fixpoint by repeated full scans.
inline NaiveUp naive_up(const CnfFormula& f, const std::vector<Literal>& assumptions) {
  NaiveUp r;
  for (Literal l : assumptions) {
    if (r.derived.count(~l)) r.conflict = true;
    r.derived.insert(l);
  }
  bool changed = true;
  while (changed && !r.conflict) {
    changed = false;
    for (const Clause& c : f) {
      std::size_t open = 0;
      Literal last;
      bool satisfied = false;
      for (Literal l : c) {
        if (r.derived.count(l)) satisfied = true;
        if (!r.derived.count(l) && !r.derived.count(~l)) {
          ++open;
          last = l;
        }
      }
      if (satisfied) continue;
      if (open == 0) {
        r.conflict = true;
        break;
      }
      if (open == 1) {
        r.derived.insert(last);
        changed = true;
      }
    }
  }
  return r;
}

// ---- generators ----------------------------------------------------------------------

using Rng = std::mt19937_64;

inline std::size_t uniform(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline bool coin(Rng& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

/// Random tree over conditions [0, n) with no condition repeated on a path.
inline DecisionTree random_tree(Rng& rng, std::size_t n, std::size_t max_depth, double leaf_prob = 0.25) {
  TreeBuilder b;
  std::vector<std::uint8_t> on_path(n, 0);
  auto grow = [&](auto&& self, std::size_t depth) -> NodeIndex {
    std::vector<ConditionId> free;
    for (ConditionId v = 0; v < n; ++v) {
      if (!on_path[v]) free.push_back(v);
    }
    if (depth >= max_depth || free.empty() || (depth > 0 && coin(rng, leaf_prob))) return b.leaf(coin(rng));
    const ConditionId v = free[uniform(rng, 0, free.size() - 1)];
    on_path[v] = 1;
    const NodeIndex l = self(self, depth + 1);
    const NodeIndex r = self(self, depth + 1);
    on_path[v] = 0;
    return b.internal(v, l, r);
  };
  const NodeIndex root = grow(grow, 0);
  return std::move(b).build(root);
}

/// Conditions over a few numerical and categorical attributes, so that
/// build_theory yields a genuine structural theory.
inline std::vector<Condition> random_conditions(Rng& rng, std::size_t n) {
  std::vector<Condition> out;
  const std::size_t attrs = uniform(rng, 1, std::max<std::size_t>(1, n / 2));
  for (ConditionId i = 0; i < n; ++i) {
    const std::size_t a = uniform(rng, 0, attrs - 1);
    Condition c;
    c.id = i;
    c.attribute = "a" + std::to_string(a);
    if (a % 2 == 0) {
      c.kind = AttributeKind::Numerical;
      c.predicate = GreaterThan{static_cast<double>(i * 10 + uniform(rng, 0, 9))};
    } else {
      c.kind = AttributeKind::Categorical;
      c.predicate = Equals{"v" + std::to_string(i)};
    }
    out.push_back(c);
  }
  return out;
}

inline RandomForest random_forest(Rng& rng, std::size_t n, std::size_t m, std::size_t max_depth) {
  RandomForest f;
  f.conditions = random_conditions(rng, n);
  for (std::size_t i = 0; i < m; ++i) f.trees.push_back(random_tree(rng, n, max_depth));
  return f;
}

/// Random assignment satisfying `th` (rejection sampling with a fallback
/// walk over all assignments).
inline BitVector random_model(Rng& rng, const CnfFormula& th, std::size_t n) {
  BitVector b(n);
  for (int tries = 0; tries < 1000; ++tries) {
    for (auto& v : b) v = coin(rng) ? 1 : 0;
    if (brute_eval(th, b)) return b;
  }
  std::vector<BitVector> models;
  for_each_assignment(n, [&](const BitVector& x) {
    if (brute_eval(th, x)) models.push_back(x);
  });
  return models.at(uniform(rng, 0, models.size() - 1));
}

/// Random term of 1..max_len literals over [0, n).
inline Term random_term(Rng& rng, std::size_t n, std::size_t max_len) {
  std::vector<ConditionId> vars(n);
  std::iota(vars.begin(), vars.end(), ConditionId{0});
  std::shuffle(vars.begin(), vars.end(), rng);
  const std::size_t len = uniform(rng, 1, std::min(max_len, n));
  std::vector<Literal> lits;
  for (std::size_t i = 0; i < len; ++i) lits.emplace_back(vars[i], coin(rng));
  return Term(std::move(lits));
}

/// Up to `count` CARs with Th-consistent bodies and no pairwise conflict
/// (checked by brute force).
inline std::vector<AssociationRule> random_cars(Rng& rng, const CnfFormula& th, std::size_t n, std::size_t count) {
  std::vector<AssociationRule> out;
  for (int tries = 0; tries < 200 && out.size() < count; ++tries) {
    AssociationRule r{random_term(rng, n, 2), RuleHead::label(coin(rng)), 0.0, 1.0};
    const std::vector<Literal> body(r.body.begin(), r.body.end());
    if (!brute_sat(th, body, n)) continue;
    bool ok = true;
    for (const AssociationRule& o : out) {
      if (o.head == r.head) continue;
      std::vector<Literal> both = body;
      both.insert(both.end(), o.body.begin(), o.body.end());
      if (brute_sat(th, both, n)) ok = false;
    }
    if (ok) out.push_back(r);
  }
  return out;
}

/// The defining formula of rectification: a covering CAR decides,
/// otherwise the original prediction stands.
inline bool rectified_prediction(bool original, const std::vector<AssociationRule>& cars, const BitVector& b) {
  bool pos = false, neg = false;
  for (const AssociationRule& r : cars) {
    if (!covers(r.body, b)) continue;
    (r.head.positive() ? pos : neg) = true;
  }
  return (original && !(neg && !pos)) || (pos && !neg);
}

/// Random binarized dataset with a few planted implications and a label
/// that partly follows the bits.
inline BinarizedDataset random_binarized(Rng& rng, std::size_t n, std::size_t rows) {
  BinarizedDataset d;
  for (ConditionId i = 0; i < n; ++i) d.conditions.push_back(parse_condition("b" + std::to_string(i) + "=1", i, AttributeKind::Boolean));
  const ConditionId a = static_cast<ConditionId>(uniform(rng, 0, n - 1));
  const ConditionId c = static_cast<ConditionId>(uniform(rng, 0, n - 1));
  const double density = 0.2 + 0.6 * std::uniform_real_distribution<double>(0, 1)(rng);
  for (std::size_t r = 0; r < rows; ++r) {
    BinarizedRow row;
    row.bits.resize(n);
    for (auto& v : row.bits) v = coin(rng, density) ? 1 : 0;
    if (row.bits[a] && a != c) row.bits[c] = 1;  // planted a => c
    row.label = (row.bits[0] && (n < 2 || row.bits[1])) ? 1 : (coin(rng, 0.3) ? 1 : 0);
    d.rows.push_back(std::move(row));
  }
  return d;
}

// ---- miner oracle ------------------------------------------------------------------------

struct Candidate {
  std::vector<Literal> body;  // sorted
  bool is_class = false;
  Literal head;               // condition heads
  bool positive = true;       // class heads
  std::size_t count = 0;
};

// Head order inside one body: condition heads by literal, then y, then !y.
inline std::pair<int, std::uint32_t> head_key(const Candidate& c) {
  if (c.is_class) return {1, c.positive ? 0u : 1u};
  return {0, c.head.code()};
}

inline bool before(const Candidate& a, const Candidate& b) {
  if (a.count != b.count) return a.count > b.count;
  if (a.body != b.body) return a.body < b.body;  // a proper prefix sorts first
  return head_key(a) < head_key(b);
}

inline bool holds(Literal l, const BinarizedRow& r) { return (r.bits[l.var()] != 0) == l.positive(); }

/// Straight enumeration of every candidate rule with the miner's filters,
/// then a greedy conflict-free selection per stream.
inline std::pair<std::vector<Candidate>, std::vector<Candidate>> naive_mine(const BinarizedDataset& d, const CnfFormula& th,
                                                                     const MinerConfig& cfg) {
  const std::size_t n = d.conditions.size();
  std::vector<std::vector<Literal>> bodies;
  for (ConditionId v = 0; v < n; ++v) {
    for (bool p : {true, false}) {
      bodies.push_back({Literal(v, p)});
      if (cfg.max_rule_size < 3) continue;
      for (ConditionId w = v + 1; w < n; ++w) {
        for (bool q : {true, false}) bodies.push_back({Literal(v, p), Literal(w, q)});
      }
    }
  }
  const double min_count = std::max(1.0, std::ceil(cfg.min_support * static_cast<double>(d.size()) - 1e-9));
  std::vector<Candidate> cars, others;
  for (const auto& body : bodies) {
    std::vector<const BinarizedRow*> covered;
    for (const BinarizedRow& r : d.rows) {
      if (std::all_of(body.begin(), body.end(), [&](Literal l) { return holds(l, r); })) covered.push_back(&r);
    }
    if (static_cast<double>(covered.size()) < min_count) continue;
    if (!brute_sat(th, body, n)) continue;
    const NaiveUp up = naive_up(th, body);
    auto all = [&](auto pred) { return std::all_of(covered.begin(), covered.end(), pred); };
    for (bool p : {true, false}) {
      if (all([&](const BinarizedRow* r) { return (r->label != 0) == p; })) {
        cars.push_back({body, true, Literal{}, p, covered.size()});
      }
    }
    for (ConditionId v = 0; v < n; ++v) {
      if (std::any_of(body.begin(), body.end(), [&](Literal l) { return l.var() == v; })) continue;
      for (bool p : {true, false}) {
        const Literal h(v, p);
        if (!all([&](const BinarizedRow* r) { return holds(h, *r); })) continue;
        if (up.derived.count(h)) continue;
        others.push_back({body, false, h, true, covered.size()});
      }
    }
  }
  auto select = [&](std::vector<Candidate> all, std::size_t cap) {
    std::sort(all.begin(), all.end(), before);
    std::vector<Candidate> kept;
    for (const Candidate& c : all) {
      if (kept.size() >= cap) break;
      bool ok = true;
      for (const Candidate& k : kept) {
        const bool opposite = c.is_class ? c.positive != k.positive : k.head == ~c.head;
        if (!opposite) continue;
        std::vector<Literal> both = c.body;
        both.insert(both.end(), k.body.begin(), k.body.end());
        if (brute_sat(th, both, n)) ok = false;
      }
      if (ok) kept.push_back(c);
    }
    return kept;
  };
  return {select(cars, cfg.max_cars), select(others, cfg.max_other_rules)};
}

inline bool same(const Candidate& c, const AssociationRule& r) {
  if (std::vector<Literal>(r.body.begin(), r.body.end()) != c.body) return false;
  if (r.head.is_class() != c.is_class) return false;
  if (c.is_class) return r.head.positive() == c.positive;
  return r.head.literal() == c.head;
}

/// Rows drawn from attribute values (so they satisfy the structural theory)
/// or, for some datasets, raw random bits that may violate it.
inline BinarizedDataset random_dataset(Rng& rng, const std::vector<Condition>& conds, std::size_t rows, bool raw) {
  if (raw) {
    BinarizedDataset d = random_binarized(rng, conds.size(), rows);
    d.conditions = conds;
    return d;
  }
  Dataset d;
  std::map<std::string, std::size_t> col;
  for (const Condition& c : conds) {
    if (col.count(c.attribute)) continue;
    col[c.attribute] = d.schema.size();
    AttributeSchema a{c.attribute, c.kind, {}, {}};
    if (c.kind == AttributeKind::Categorical) {
      for (const Condition& o : conds) {
        if (o.attribute == c.attribute) a.categories.push_back(o.category());
      }
      a.categories.push_back("zz");
      std::sort(a.categories.begin(), a.categories.end());
    }
    d.schema.push_back(a);
  }
  const double noise = coin(rng) ? 0.0 : 0.2;
  for (std::size_t r = 0; r < rows; ++r) {
    Row row;
    for (const AttributeSchema& a : d.schema) {
      row.values.push_back(a.kind == AttributeKind::Numerical ? static_cast<double>(uniform(rng, 0, 90))
                                                               : static_cast<double>(uniform(rng, 0, a.categories.size() - 1)));
    }
    row.label = (row.values[0] > 40) != coin(rng, noise) ? 1 : 0;
    d.rows.push_back(row);
  }
  return binarize(d, conds);
}

inline MinerConfig random_config(Rng& rng) {
  MinerConfig cfg;
  cfg.max_rule_size = coin(rng, 0.8) ? 3 : 2;
  cfg.max_cars = coin(rng) ? 100 : uniform(rng, 1, 6);
  cfg.max_other_rules = coin(rng) ? 100 : uniform(rng, 1, 10);
  cfg.min_support = coin(rng, 0.7) ? 0.0 : 0.1;
  return cfg;
}

// ---- explanation oracles ---------------------------------------------------------------


inline bool up_implicant(const std::vector<Literal>& t, const CnfFormula& phi, const CnfFormula& th) {
  const NaiveUp up = naive_up(th, t);
  if (up.conflict) return true;
  for (const Clause& c : phi) {
    if (std::none_of(c.begin(), c.end(), [&](Literal l) { return up.derived.count(l) > 0; })) return false;
  }
  return true;
}

/// Independent majority UP-implicant test over materialized tree CNFs.
struct MajorityOracle {
  std::vector<CnfFormula> cnfs;
  CnfFormula theory;
  std::size_t needed = 0;

  MajorityOracle(const RandomForest& f, const CnfFormula& th, bool prediction) : theory(th) {
    for (const DecisionTree& t : f.trees) cnfs.push_back(to_cnf(prediction ? t : t.negated()));
    const std::size_t m = f.trees.size();
    needed = prediction ? m / 2 + 1 : m - m / 2;
  }

  bool operator()(const std::vector<Literal>& t) const {
    std::size_t ok = 0;
    for (const CnfFormula& c : cnfs) ok += up_implicant(t, c, theory);
    return ok >= needed;
  }
};

inline std::vector<Literal> minus(const std::vector<Literal>& t, Literal l) {
  std::vector<Literal> out;
  for (Literal x : t) {
    if (x != l) out.push_back(x);
  }
  return out;
}

inline std::vector<Literal> naive_greedy(const MajorityOracle& ok, const BitVector& x, const std::vector<Literal>& order) {
  std::vector<Literal> t;
  for (ConditionId v = 0; v < x.size(); ++v) t.emplace_back(v, x[v] != 0);
  for (Literal l : order) {
    std::vector<Literal> smaller = minus(t, l);
    if (ok(smaller)) t = std::move(smaller);
  }
  return t;
}

inline bool brute_abductive(const std::vector<Literal>& t, const RandomForest& f, const CnfFormula& th, bool target,
                     std::size_t n) {
  bool ok = true;
  for_each_assignment(n, [&](const BitVector& b) {
    if (!ok || !brute_eval(th, b)) return;
    if (std::all_of(t.begin(), t.end(), [&](Literal l) { return (b[l.var()] != 0) == l.positive(); })) {
      ok = predict_forest(f, b) == target;
    }
  });
  return ok;
}

struct Triple {
  RandomForest forest;
  CnfFormula theory;
  BitVector x;
  std::size_t n = 0;
};

/// Forest over n <= 12 conditions, binary-clause theory satisfied by x.
inline Triple random_triple(Rng& rng) {
  Triple c;
  c.n = uniform(rng, 1, 12);
  const std::size_t m = std::array<std::size_t, 3>{1, 3, 5}[uniform(rng, 0, 2)];
  c.forest = random_forest(rng, c.n, m, 6);
  c.x.resize(c.n);
  for (auto& v : c.x) v = coin(rng) ? 1 : 0;
  const std::size_t clauses = uniform(rng, 0, c.n);
  for (std::size_t i = 0; i < clauses; ++i) {
    const Term t = random_term(rng, c.n, 2);
    const Clause cl(std::vector<Literal>(t.begin(), t.end()));
    if (brute_eval(CnfFormula{cl}, c.x)) c.theory.add(cl);
  }
  return c;
}

inline DomainTheory as_theory(const CnfFormula& structural, std::size_t n) {
  DomainTheory th;
  th.structural = structural;
  th.num_conditions = static_cast<ConditionId>(n);
  return th;
}

// ---- rectification cases ---------------------------------------------------------------

struct Case {
  RandomForest forest;
  DomainTheory theory;
  std::vector<AssociationRule> cars;
  std::size_t n = 0;
};

inline Case random_case(Rng& rng) {
  Case c;
  c.n = uniform(rng, 2, 10);
  const std::size_t m = std::array<std::size_t, 3>{1, 3, 5}[uniform(rng, 0, 2)];
  c.forest = random_forest(rng, c.n, m, 5);
  c.theory = build_theory(c.forest.conditions);
  c.cars = random_cars(rng, c.theory.structural, c.n, uniform(rng, 0, 5));
  return c;
}

}  // namespace rectx::testing
