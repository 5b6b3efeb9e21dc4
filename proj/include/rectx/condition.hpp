#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

#include "rectx/error.hpp"
#include "rectx/logic.hpp"

namespace rectx {

enum class AttributeKind { Numerical, Categorical, Boolean };

constexpr std::string_view to_string(AttributeKind k) {
  switch (k) {
    case AttributeKind::Numerical: return "numerical";
    case AttributeKind::Categorical: return "categorical";
    case AttributeKind::Boolean: return "boolean";
  }
  return "?";
}

inline AttributeKind parse_attribute_kind(std::string_view s) {
  if (s == "numerical") return AttributeKind::Numerical;
  if (s == "categorical") return AttributeKind::Categorical;
  if (s == "boolean") return AttributeKind::Boolean;
  fail(ErrorKind::InvalidArgument, "unknown attribute kind '" + std::string(s) + "'");
}

struct GreaterThan {
  double threshold = 0.0;
  friend bool operator==(const GreaterThan&, const GreaterThan&) = default;
};

struct Equals {
  std::string value;
  friend bool operator==(const Equals&, const Equals&) = default;
};

using Predicate = std::variant<GreaterThan, Equals>;

/// One Boolean test x_i over a single attribute.
struct Condition {
  ConditionId id = 0;
  std::string attribute;
  AttributeKind kind = AttributeKind::Numerical;
  Predicate predicate;

  bool is_threshold() const { return std::holds_alternative<GreaterThan>(predicate); }
  double threshold() const { return std::get<GreaterThan>(predicate).threshold; }
  const std::string& category() const { return std::get<Equals>(predicate).value; }

  /// Same attribute and predicate, regardless of id.
  bool same_test(const Condition& o) const {
    return attribute == o.attribute && predicate == o.predicate;
  }
};

/// Shortest decimal text that reads back to the same double.
inline std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) fail(ErrorKind::InvalidArgument, "unprintable number");
  return std::string(buf, end);
}

inline std::optional<double> parse_number(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

/// `A>25` for thresholds, `S=PP` for category tests.
inline std::string to_string(const Condition& c) {
  if (c.is_threshold()) return c.attribute + ">" + format_number(c.threshold());
  return c.attribute + "=" + c.category();
}

/// Inverse of to_string(Condition). The kind is inferred from the operator
/// (`>` numerical, `=` categorical) unless given.
inline Condition parse_condition(std::string_view text, ConditionId id,
                                 std::optional<AttributeKind> kind = std::nullopt) {
  const auto pos = text.find_first_of(">=");
  if (pos == std::string_view::npos || pos == 0 || pos + 1 == text.size()) {
    fail(ErrorKind::InvalidArgument, "malformed condition '" + std::string(text) + "'");
  }
  Condition c;
  c.id = id;
  c.attribute = std::string(text.substr(0, pos));
  const auto rhs = text.substr(pos + 1);
  if (text[pos] == '>') {
    const auto v = parse_number(rhs);
    if (!v) fail(ErrorKind::InvalidArgument, "bad threshold in '" + std::string(text) + "'");
    c.kind = AttributeKind::Numerical;
    c.predicate = GreaterThan{*v};
  } else {
    c.kind = kind.value_or(AttributeKind::Categorical);
    c.predicate = Equals{std::string(rhs)};
  }
  return c;
}

/// Renders `x` as its condition text and `!x` for the negation.
inline std::string render_literal(Literal l, const std::vector<Condition>& conditions) {
  if (l.var() >= conditions.size()) {
    fail(ErrorKind::DanglingConditionId, "literal on unknown condition " + std::to_string(l.var()));
  }
  return (l.positive() ? "" : "!") + to_string(conditions[l.var()]);
}

inline std::string render_term(const Term& t, const std::vector<Condition>& conditions) {
  std::string out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i) out += ",";
    out += render_literal(t[i], conditions);
  }
  return out;
}

/// Text → condition id lookup for parsing rules and explanations.
class ConditionIndex {
 public:
  explicit ConditionIndex(const std::vector<Condition>& conditions) {
    for (const Condition& c : conditions) by_text_.emplace(to_string(c), c.id);
  }

  std::optional<ConditionId> find(std::string_view text) const {
    auto it = by_text_.find(std::string(text));
    if (it == by_text_.end()) return std::nullopt;
    return it->second;
  }

  Literal literal(std::string_view text) const {
    const bool negated = !text.empty() && text.front() == '!';
    if (negated) text.remove_prefix(1);
    const auto id = find(text);
    if (!id) fail(ErrorKind::DanglingConditionId, "unknown condition '" + std::string(text) + "'");
    return {*id, !negated};
  }

 private:
  std::map<std::string, ConditionId, std::less<>> by_text_;
};

}  // namespace rectx
