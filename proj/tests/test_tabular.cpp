#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"

using namespace rectx;
using namespace rectx::testing;

namespace {

Dataset loan_csv() { return load_csv_file(std::string(RECTX_DATA_DIR) + "/loan.csv"); }

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST(Condition, TextRoundTrip) {
  for (const char* s : {"A>25", "I>30.5", "S=PP", "x>-1.25"}) {
    EXPECT_EQ(to_string(parse_condition(s, 0)), s);
  }
  EXPECT_EQ(format_number(25.0), "25");
  EXPECT_EQ(kind_of([] { parse_condition("A>abc", 0); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { parse_condition("noop", 0); }), ErrorKind::InvalidArgument);
}

TEST(LoadCsv, InfersKinds) {
  const Dataset d = loan_csv();
  ASSERT_EQ(d.schema.size(), 3u);
  EXPECT_EQ(d.schema[0].kind, AttributeKind::Numerical);
  EXPECT_EQ(d.schema[2].kind, AttributeKind::Categorical);
  EXPECT_EQ(d.schema[2].categories, (std::vector<std::string>{"PP", "TP", "U"}));
  EXPECT_EQ(d.size(), 12u);
  EXPECT_TRUE(d.has_both_classes());
}

TEST(LoadCsv, BooleanColumns) {
  std::istringstream in("f,g,y\n0,3,1\n1,4,0\n");
  const Dataset d = load_csv(in);
  EXPECT_EQ(d.schema[0].kind, AttributeKind::Boolean);
  EXPECT_EQ(d.schema[1].kind, AttributeKind::Numerical);
}

TEST(LoadCsv, Errors) {
  EXPECT_EQ(kind_of([] {
              std::istringstream in("a,b\n1,2\n");
              load_csv(in);
            }),
            ErrorKind::UnknownLabelColumn);
  EXPECT_EQ(kind_of([] {
              std::istringstream in("a,y\n1\n");
              load_csv(in);
            }),
            ErrorKind::MalformedCsv);
  EXPECT_EQ(kind_of([] {
              std::istringstream in("a,y\n?,1\n");
              load_csv(in);
            }),
            ErrorKind::MissingValue);
  EXPECT_EQ(kind_of([] { load_csv_file("/nonexistent/file.csv"); }), ErrorKind::Io);
}

TEST(Binarize, LoanApplicant) {
  const Dataset d = loan_csv();
  const BinarizedDataset b = binarize(d, loan_conditions());
  // First row: age 33, income 52, status PP.
  EXPECT_EQ(b.rows[0].bits, kLoanX);
  EXPECT_EQ(b.rows[0].label, 0);
}

TEST(Binarize, SchemaMismatch) {
  const Dataset d = loan_csv();
  EXPECT_EQ(kind_of([&] { binarize(d, {parse_condition("Z>1", 0)}); }), ErrorKind::SchemaMismatch);
  EXPECT_EQ(kind_of([&] { binarize(d, {parse_condition("S>1", 0)}); }), ErrorKind::SchemaMismatch);
}

TEST(Binarize, NeverSatisfiesTwoCategories) {
  const Dataset d = loan_csv();
  const BinarizedDataset b = binarize(d, loan_conditions());
  for (const BinarizedRow& r : b.rows) EXPECT_LE(r.bits[4] + r.bits[5] + r.bits[6], 1);
}

TEST(Split, SizesAndDeterminism) {
  Dataset d;
  d.schema.push_back({"a", AttributeKind::Numerical, {}, {}});
  for (int i = 0; i < 690; ++i) d.rows.push_back({{static_cast<double>(i)}, static_cast<std::uint8_t>(i % 2)});
  const auto [tr, te] = split(d, 0.7, 3);
  EXPECT_EQ(tr.size(), 483u);
  EXPECT_EQ(te.size(), 207u);
  const auto [tr2, te2] = split(d, 0.7, 3);
  for (std::size_t i = 0; i < tr.size(); ++i) EXPECT_EQ(tr.rows[i].values, tr2.rows[i].values);
  std::set<double> all;
  for (const Row& r : tr.rows) all.insert(r.values[0]);
  for (const Row& r : te.rows) all.insert(r.values[0]);
  EXPECT_EQ(all.size(), 690u);
  EXPECT_EQ(kind_of([&] { split(d, 1.0, 0); }), ErrorKind::InvalidArgument);
}

TEST(InstanceTerm, RoundTrip) {
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    BitVector b(uniform(rng, 1, 20));
    for (auto& v : b) v = coin(rng) ? 1 : 0;
    const Term t = instance_to_term(b);
    EXPECT_EQ(t.size(), b.size());
    EXPECT_EQ(term_to_instance(t, b.size()), b);
    EXPECT_TRUE(covers(t, b));
  }
  EXPECT_EQ(to_string(instance_to_term(kLoanX)), "{x1, !x2, x3, x4, !x5, !x6, x7}");
}

TEST(BinarizedCsv, RoundTrip) {
  const BinarizedDataset b = binarize(loan_csv(), loan_conditions());
  std::stringstream s;
  write_binarized_csv(s, b);
  const BinarizedDataset back = read_binarized_csv(s);
  ASSERT_EQ(back.size(), b.size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    EXPECT_EQ(back.rows[i].bits, b.rows[i].bits);
    EXPECT_EQ(back.rows[i].label, b.rows[i].label);
  }
  for (std::size_t j = 0; j < b.conditions.size(); ++j) EXPECT_EQ(to_string(back.conditions[j]), to_string(b.conditions[j]));
}
