#pragma once

// Tabular data: CSV ingestion with attribute typing, seeded train/test
// splits, and binarization of instances onto a model's condition set.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rectx/condition.hpp"
#include "rectx/error.hpp"
#include "rectx/logic.hpp"

namespace rectx {

struct AttributeSchema {
  std::string name;
  AttributeKind kind = AttributeKind::Numerical;
  std::vector<double> numeric_domain;   // sorted, numerical attributes
  std::vector<std::string> categories;  // sorted, categorical/Boolean attributes

  std::optional<std::size_t> category_code(std::string_view value) const {
    auto it = std::lower_bound(categories.begin(), categories.end(), value);
    if (it == categories.end() || *it != value) return std::nullopt;
    return static_cast<std::size_t>(it - categories.begin());
  }
};

/// Numerical cells hold the value; categorical and Boolean cells hold the
/// index of the value in the attribute's sorted category list.
struct Row {
  std::vector<double> values;
  std::uint8_t label = 0;
};

struct Dataset {
  std::vector<AttributeSchema> schema;
  std::vector<Row> rows;

  std::size_t size() const { return rows.size(); }
  bool empty() const { return rows.empty(); }

  std::optional<std::size_t> attribute_index(std::string_view name) const {
    for (std::size_t i = 0; i < schema.size(); ++i) {
      if (schema[i].name == name) return i;
    }
    return std::nullopt;
  }

  Dataset subset(std::span<const std::size_t> indices) const {
    Dataset out{schema, {}};
    out.rows.reserve(indices.size());
    for (std::size_t i : indices) out.rows.push_back(rows.at(i));
    return out;
  }

  bool has_both_classes() const {
    bool pos = false, neg = false;
    for (const Row& r : rows) (r.label ? pos : neg) = true;
    return pos && neg;
  }
};

struct CsvOptions {
  std::string label_column = "y";
  std::set<std::string> categorical;  // force these columns to Categorical
};

namespace detail {

inline std::string trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return std::string(s);
}

/// Splits one CSV record; double quotes may enclose fields containing commas.
inline std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (quoted) fail(ErrorKind::MalformedCsv, "line " + std::to_string(line_no) + ": unterminated quote");
  fields.push_back(trim(cur));
  return fields;
}

inline bool is_missing(const std::string& v) { return v.empty() || v == "?"; }

}  // namespace detail

/// Reads a header + rows CSV. Columns that parse as numbers everywhere are
/// Numerical (Boolean if every value is 0 or 1); anything else is
/// Categorical. Rows with missing cells are rejected, not imputed.
inline Dataset load_csv(std::istream& in, const CsvOptions& options = {}) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    header = detail::split_csv_line(line, line_no);
    break;
  }
  if (header.empty()) fail(ErrorKind::MalformedCsv, "missing header row");

  std::optional<std::size_t> label_col;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == options.label_column) label_col = i;
  }
  if (!label_col) {
    fail(ErrorKind::UnknownLabelColumn, "no column named '" + options.label_column + "'");
  }

  std::vector<std::vector<std::string>> cells;
  std::vector<std::size_t> line_of;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto fields = detail::split_csv_line(line, line_no);
    if (fields.size() != header.size()) {
      fail(ErrorKind::MalformedCsv, "line " + std::to_string(line_no) + ": expected " +
                                        std::to_string(header.size()) + " fields, got " +
                                        std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (detail::is_missing(fields[c])) {
        fail(ErrorKind::MissingValue,
             "line " + std::to_string(line_no) + ", column '" + header[c] + "': missing value");
      }
    }
    cells.push_back(std::move(fields));
    line_of.push_back(line_no);
  }

  Dataset d;
  std::vector<std::size_t> columns;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == *label_col) continue;
    columns.push_back(c);
    AttributeSchema a;
    a.name = header[c];
    bool numeric = !options.categorical.count(a.name);
    bool boolean = numeric;
    std::set<double> nums;
    std::set<std::string> cats;
    for (const auto& row : cells) {
      cats.insert(row[c]);
      if (!numeric) continue;
      const auto v = parse_number(row[c]);
      if (!v) {
        numeric = boolean = false;
        continue;
      }
      nums.insert(*v);
      if (*v != 0.0 && *v != 1.0) boolean = false;
    }
    if (numeric && boolean && !cells.empty()) {
      a.kind = AttributeKind::Boolean;
      a.categories = {"0", "1"};
    } else if (numeric) {
      a.kind = AttributeKind::Numerical;
      a.numeric_domain.assign(nums.begin(), nums.end());
    } else {
      a.kind = AttributeKind::Categorical;
      a.categories.assign(cats.begin(), cats.end());
    }
    d.schema.push_back(std::move(a));
  }

  d.rows.reserve(cells.size());
  for (std::size_t r = 0; r < cells.size(); ++r) {
    Row row;
    row.values.reserve(columns.size());
    for (std::size_t k = 0; k < columns.size(); ++k) {
      const std::string& text = cells[r][columns[k]];
      const AttributeSchema& a = d.schema[k];
      switch (a.kind) {
        case AttributeKind::Numerical:
          row.values.push_back(*parse_number(text));
          break;
        case AttributeKind::Boolean:
          row.values.push_back(*parse_number(text));
          break;
        case AttributeKind::Categorical:
          row.values.push_back(static_cast<double>(*a.category_code(text)));
          break;
      }
    }
    const auto y = parse_number(cells[r][*label_col]);
    if (!y || (*y != 0.0 && *y != 1.0)) {
      fail(ErrorKind::MalformedCsv, "line " + std::to_string(line_of[r]) + ", column '" +
                                        options.label_column + "': label must be 0 or 1");
    }
    row.label = *y == 1.0 ? 1 : 0;
    d.rows.push_back(std::move(row));
  }
  return d;
}

inline Dataset load_csv_file(const std::string& path, const CsvOptions& options = {}) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path + "'");
  return load_csv(in, options);
}

/// Seeded random partition; the first part holds round(fraction * |d|) rows.
inline std::pair<Dataset, Dataset> split(const Dataset& d, double train_fraction,
                                         std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    fail(ErrorKind::InvalidArgument, "train fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(d.size())));
  std::span<const std::size_t> all(order);
  return {d.subset(all.first(n_train)), d.subset(all.subspan(n_train))};
}

using BitVector = std::vector<std::uint8_t>;

struct BinarizedRow {
  BitVector bits;
  std::uint8_t label = 0;
};

struct BinarizedDataset {
  std::vector<Condition> conditions;
  std::vector<BinarizedRow> rows;

  std::size_t size() const { return rows.size(); }
  bool empty() const { return rows.empty(); }
};

/// Truth value of `c` on row `r` of `d`, where `column` is c's attribute.
inline bool evaluate_condition(const Condition& c, const AttributeSchema& a, const Row& r,
                               std::size_t column) {
  const double v = r.values[column];
  if (c.is_threshold()) return v > c.threshold();
  const auto code = a.category_code(c.category());
  return code && static_cast<std::size_t>(v) == *code;
}

/// Re-expresses every row as the truth values of `conditions`.
/// Attributes are matched by name, so the dataset's column order is free.
inline BinarizedDataset binarize(const Dataset& d, const std::vector<Condition>& conditions) {
  std::vector<std::size_t> column(conditions.size());
  for (std::size_t j = 0; j < conditions.size(); ++j) {
    const Condition& c = conditions[j];
    const auto col = d.attribute_index(c.attribute);
    if (!col) fail(ErrorKind::SchemaMismatch, "condition " + to_string(c) + ": no such attribute");
    const AttributeKind k = d.schema[*col].kind;
    const bool ok = c.is_threshold() ? k == AttributeKind::Numerical : k != AttributeKind::Numerical;
    if (!ok) {
      fail(ErrorKind::SchemaMismatch, "condition " + to_string(c) + ": attribute '" + c.attribute +
                                          "' is " + std::string(to_string(k)));
    }
    column[j] = *col;
  }
  BinarizedDataset out;
  out.conditions = conditions;
  out.rows.reserve(d.size());
  for (const Row& r : d.rows) {
    BinarizedRow b;
    b.label = r.label;
    b.bits.resize(conditions.size());
    for (std::size_t j = 0; j < conditions.size(); ++j) {
      b.bits[j] = evaluate_condition(conditions[j], d.schema[column[j]], r, column[j]) ? 1 : 0;
    }
    out.rows.push_back(std::move(b));
  }
  return out;
}

/// Canonical term t_x: x_i for every 1-bit, !x_i for every 0-bit.
inline Term instance_to_term(std::span<const std::uint8_t> bits) {
  std::vector<Literal> lits;
  lits.reserve(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    lits.emplace_back(static_cast<ConditionId>(i), bits[i] != 0);
  }
  return Term(std::move(lits));
}

/// Inverse of instance_to_term for complete terms over n conditions.
inline BitVector term_to_instance(const Term& t, std::size_t n) {
  if (t.size() != n) fail(ErrorKind::InvalidArgument, "term is not a complete instance");
  BitVector bits(n, 0);
  for (Literal l : t) {
    if (l.var() >= n) fail(ErrorKind::InvalidArgument, "term mentions condition beyond range");
    bits[l.var()] = l.positive() ? 1 : 0;
  }
  return bits;
}

/// Does the complete assignment `bits` satisfy every literal of `t`?
inline bool covers(const Term& t, std::span<const std::uint8_t> bits) {
  return std::all_of(t.begin(), t.end(), [&](Literal l) {
    return l.var() < bits.size() && (bits[l.var()] != 0) == l.positive();
  });
}

/// 0/1 columns named by condition text, then `y`.
inline void write_binarized_csv(std::ostream& out, const BinarizedDataset& d) {
  for (const Condition& c : d.conditions) out << to_string(c) << ',';
  out << "y\n";
  for (const BinarizedRow& r : d.rows) {
    for (std::uint8_t b : r.bits) out << (b ? '1' : '0') << ',';
    out << (r.label ? '1' : '0') << '\n';
  }
}

inline BinarizedDataset read_binarized_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  BinarizedDataset d;
  std::optional<std::size_t> label_col;
  std::vector<std::size_t> cond_col;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv_line(line, line_no);
    if (!label_col) {
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (fields[i] == "y") {
          label_col = i;
        } else {
          d.conditions.push_back(parse_condition(fields[i], static_cast<ConditionId>(cond_col.size())));
          cond_col.push_back(i);
        }
      }
      if (!label_col) fail(ErrorKind::UnknownLabelColumn, "binarized CSV has no 'y' column");
      continue;
    }
    if (fields.size() != cond_col.size() + 1) {
      fail(ErrorKind::MalformedCsv, "line " + std::to_string(line_no) + ": wrong field count");
    }
    BinarizedRow r;
    for (std::size_t i : cond_col) {
      if (fields[i] != "0" && fields[i] != "1") {
        fail(ErrorKind::MalformedCsv, "line " + std::to_string(line_no) + ": expected 0/1");
      }
      r.bits.push_back(fields[i] == "1" ? 1 : 0);
    }
    if (fields[*label_col] != "0" && fields[*label_col] != "1") {
      fail(ErrorKind::MalformedCsv, "line " + std::to_string(line_no) + ": label must be 0 or 1");
    }
    r.label = fields[*label_col] == "1" ? 1 : 0;
    d.rows.push_back(std::move(r));
  }
  if (!label_col) fail(ErrorKind::MalformedCsv, "missing header row");
  return d;
}

}  // namespace rectx
