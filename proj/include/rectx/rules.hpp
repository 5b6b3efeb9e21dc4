#pragma once

// Association rules b => h over X plus the class variable y.

#include <compare>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "rectx/condition.hpp"
#include "rectx/error.hpp"
#include "rectx/logic.hpp"
#include "rectx/tabular.hpp"

namespace rectx {

/// Conclusion of a rule: a literal over X, or y / !y.
class RuleHead {
 public:
  static RuleHead condition(Literal l) { return RuleHead(false, l); }
  static RuleHead label(bool positive) { return RuleHead(true, Literal(0, positive)); }

  bool is_class() const { return is_class_; }
  bool positive() const { return lit_.positive(); }
  Literal literal() const {
    if (is_class_) fail(ErrorKind::InvalidArgument, "class head has no condition literal");
    return lit_;
  }

  RuleHead operator~() const { return RuleHead(is_class_, ~lit_); }

  /// Condition heads order before class heads; then by literal order.
  friend auto operator<=>(const RuleHead&, const RuleHead&) = default;

 private:
  RuleHead(bool is_class, Literal l) : is_class_(is_class), lit_(l) {}
  bool is_class_ = false;
  Literal lit_;
};

struct AssociationRule {
  Term body;
  RuleHead head = RuleHead::label(true);
  double support = 0.0;
  double confidence = 0.0;

  bool is_car() const { return head.is_class(); }

  /// Clause form (!b_1 v ... v h) of a non-classification rule.
  Clause as_clause() const {
    std::vector<Literal> lits;
    for (Literal l : body) lits.push_back(~l);
    lits.push_back(head.literal());
    return Clause(std::move(lits));
  }

  /// True unless the row satisfies the body and falsifies the head.
  bool holds_on(const BinarizedRow& row) const {
    if (!covers(body, row.bits)) return true;
    return head_true(row);
  }

  bool head_true(const BinarizedRow& row) const {
    if (head.is_class()) return (row.label != 0) == head.positive();
    const Literal h = head.literal();
    return (row.bits.at(h.var()) != 0) == h.positive();
  }

  /// Canonical order: body literals lexicographically, then head.
  friend std::strong_ordering canonical_order(const AssociationRule& a, const AssociationRule& b) {
    if (auto c = a.body <=> b.body; c != 0) return c;
    return a.head <=> b.head;
  }

  friend bool operator==(const AssociationRule& a, const AssociationRule& b) {
    return a.body == b.body && a.head == b.head;
  }
};

/// Throws MalformedRule if the head's condition also occurs in the body or
/// the body is empty.
inline void check_rule_shape(const AssociationRule& r) {
  if (r.body.empty()) fail(ErrorKind::MalformedRule, "rule body must not be empty");
  if (!r.head.is_class() && r.body.mentions(r.head.literal().var())) {
    fail(ErrorKind::MalformedRule, "rule head condition also occurs in its body");
  }
}

struct RuleCounts {
  std::size_t body = 0;  // rows satisfying b
  std::size_t both = 0;  // rows satisfying b and h
};

inline RuleCounts count_rule(const AssociationRule& r, const BinarizedDataset& d) {
  RuleCounts c;
  for (const BinarizedRow& row : d.rows) {
    if (!covers(r.body, row.bits)) continue;
    ++c.body;
    if (r.head_true(row)) ++c.both;
  }
  return c;
}

/// |rows satisfying b and h| / |rows|.
inline double support(const AssociationRule& r, const BinarizedDataset& d) {
  if (d.empty()) fail(ErrorKind::EmptyDataset, "support on an empty dataset");
  return static_cast<double>(count_rule(r, d).both) / static_cast<double>(d.size());
}

/// |rows satisfying b and h| / |rows satisfying b|.
inline double confidence(const AssociationRule& r, const BinarizedDataset& d) {
  const RuleCounts c = count_rule(r, d);
  if (c.body == 0) fail(ErrorKind::ZeroBodySupport, "no row satisfies the rule body");
  return static_cast<double>(c.both) / static_cast<double>(c.body);
}

/// Complementary heads on the same variable and bodies jointly consistent
/// with `theory` (complete check).
inline bool conflicts(const AssociationRule& r1, const AssociationRule& r2, const CnfFormula& theory) {
  if (r1.head != ~r2.head) return false;
  std::vector<Literal> both(r1.body.begin(), r1.body.end());
  both.insert(both.end(), r2.body.begin(), r2.body.end());
  return sat(theory, both);
}

namespace detail {

inline std::string fraction_text(double v) {
  std::string s = format_number(v);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

}  // namespace detail

inline std::string render_rule(const AssociationRule& r, const std::vector<Condition>& conditions) {
  std::string out = render_term(r.body, conditions) + " => ";
  if (r.head.is_class()) {
    out += r.head.positive() ? "y" : "!y";
  } else {
    out += render_literal(r.head.literal(), conditions);
  }
  out += "  support=" + detail::fraction_text(r.support);
  out += " conf=" + detail::fraction_text(r.confidence);
  return out;
}

inline void write_rules(std::ostream& out, const std::vector<AssociationRule>& rules,
                        const std::vector<Condition>& conditions) {
  for (const AssociationRule& r : rules) out << render_rule(r, conditions) << '\n';
}

/// Parses one `b1[,b2] => h  support=.. conf=..` line; literals are
/// condition texts, optionally `!`-prefixed, and `y` / `!y` for the class.
inline AssociationRule parse_rule(std::string_view line, const ConditionIndex& index) {
  const auto arrow = line.find("=>");
  if (arrow == std::string_view::npos) {
    fail(ErrorKind::MalformedRule, "missing '=>' in '" + std::string(line) + "'");
  }
  AssociationRule r;
  std::vector<Literal> body;
  std::string_view lhs = line.substr(0, arrow);
  while (!lhs.empty()) {
    const auto comma = lhs.find(',');
    const std::string tok = detail::trim(lhs.substr(0, comma));
    if (!tok.empty()) body.push_back(index.literal(tok));
    if (comma == std::string_view::npos) break;
    lhs.remove_prefix(comma + 1);
  }
  try {
    r.body = Term(std::move(body));
  } catch (const Error& e) {
    fail(ErrorKind::MalformedRule, std::string("inconsistent rule body: ") + e.what());
  }

  std::istringstream rest{std::string(line.substr(arrow + 2))};
  std::string head;
  if (!(rest >> head)) fail(ErrorKind::MalformedRule, "missing rule head in '" + std::string(line) + "'");
  if (head == "y" || head == "!y") {
    r.head = RuleHead::label(head == "y");
  } else {
    r.head = RuleHead::condition(index.literal(head));
  }
  std::string kv;
  while (rest >> kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) fail(ErrorKind::MalformedRule, "bad field '" + kv + "'");
    const auto value = parse_number(std::string_view(kv).substr(eq + 1));
    if (!value) fail(ErrorKind::MalformedRule, "bad number in '" + kv + "'");
    const std::string key = kv.substr(0, eq);
    if (key == "support") {
      r.support = *value;
    } else if (key == "conf") {
      r.confidence = *value;
    } else {
      fail(ErrorKind::MalformedRule, "unknown field '" + key + "'");
    }
  }
  check_rule_shape(r);
  return r;
}

inline std::vector<AssociationRule> read_rules(std::istream& in, const ConditionIndex& index) {
  std::vector<AssociationRule> out;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    out.push_back(parse_rule(t, index));
  }
  return out;
}

}  // namespace rectx
