#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"

using namespace rectx;
using namespace rectx::testing;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::InvalidArgument;
}

std::set<Clause> as_set(const CnfFormula& f) { return {f.begin(), f.end()}; }

}  // namespace

TEST(BuildTheory, LoanExampleHasFiveClauses) {
  const DomainTheory th = build_theory(loan_conditions());
  EXPECT_EQ(as_set(th.structural), as_set(loan_theory_clauses()));
  EXPECT_EQ(th.structural.size(), 5u);
  EXPECT_TRUE(th.mined.empty());
  EXPECT_FALSE(th.extended());
  EXPECT_EQ(th.num_conditions, 7u);
}

TEST(BuildTheory, ThresholdChainsAreTransitive) {
  std::vector<Condition> cs;
  for (ConditionId i = 0; i < 4; ++i) cs.push_back(parse_condition("a>" + std::to_string(40 - 10 * i), i));
  const DomainTheory th = build_theory(cs);
  // Every ordered pair, not only neighbours.
  EXPECT_EQ(th.structural.size(), 6u);
  EXPECT_TRUE(th.structural.contains(clause({"!x1", "x4"})));
}

TEST(BuildTheory, SoundOnEveryBinarizedRow) {
  Rng rng(31);
  for (int iter = 0; iter < 100; ++iter) {
    const std::size_t n = uniform(rng, 1, 10);
    const auto conds = random_conditions(rng, n);
    const DomainTheory th = build_theory(conds);
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
        a.categories.push_back("other");
        std::sort(a.categories.begin(), a.categories.end());
      }
      d.schema.push_back(a);
    }
    for (int r = 0; r < 30; ++r) {
      Row row;
      for (const AttributeSchema& a : d.schema) {
        row.values.push_back(a.kind == AttributeKind::Numerical ? static_cast<double>(uniform(rng, 0, 120))
                                                                 : static_cast<double>(uniform(rng, 0, a.categories.size() - 1)));
      }
      d.rows.push_back(row);
    }
    for (const BinarizedRow& r : binarize(d, conds).rows) ASSERT_TRUE(evaluate(th.structural, r.bits));
  }
}

TEST(ExtendTheory, AddsRuleClauses) {
  const DomainTheory th = build_theory(loan_conditions());
  const DomainTheory e = extend_theory(th, {implication({"x1", "!x2"}, "x4")});
  EXPECT_TRUE(e.extended());
  EXPECT_EQ(e.mined.size(), 1u);
  EXPECT_TRUE(e.combined().contains(clause({"!x1", "x2", "x4"})));
  EXPECT_EQ(e.combined().size(), 6u);
  EXPECT_EQ(kind_of([&] { extend_theory(th, {car({"x1"}, true)}); }), ErrorKind::CarInTheory);
}

TEST(Conflicts, LoanRules) {
  const DomainTheory th = build_theory(loan_conditions());
  // Bodies that can hold together with opposite heads.
  EXPECT_TRUE(conflicts(car({"x4", "x7"}, true), car({"x1"}, false), th));
  // S=U and S=PP exclude each other.
  EXPECT_FALSE(conflicts(car({"x4", "x7"}, true), car({"x5"}, false), th));
  // Same head never conflicts.
  EXPECT_FALSE(conflicts(car({"x4"}, true), car({"x1"}, true), th));
}

TEST(Rules, SupportAndConfidence) {
  BinarizedDataset d;
  d.conditions = {parse_condition("a=1", 0, AttributeKind::Boolean), parse_condition("b=1", 1, AttributeKind::Boolean)};
  d.rows = {{{1, 1}, 1}, {{1, 0}, 1}, {{0, 1}, 0}, {{1, 1}, 0}};
  const auto r = car({"x1"}, true);
  EXPECT_DOUBLE_EQ(support(r, d), 0.5);
  EXPECT_DOUBLE_EQ(confidence(r, d), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(confidence(implication({"x1"}, "x2"), d), 2.0 / 3.0);
  EXPECT_EQ(kind_of([&] { confidence(car({"x1", "!x2"}, false), BinarizedDataset{d.conditions, {{{0, 0}, 1}}}); }),
            ErrorKind::ZeroBodySupport);
  EXPECT_EQ(kind_of([&] { support(r, BinarizedDataset{}); }), ErrorKind::EmptyDataset);
}

TEST(Rules, TextRoundTrip) {
  const auto conds = loan_conditions();
  const ConditionIndex index(conds);
  AssociationRule r = car({"x4", "x7"}, true);
  r.support = 0.25;
  EXPECT_EQ(render_rule(r, conds), "I>50,S=PP => y  support=0.25 conf=1.0");
  AssociationRule o = implication({"x1", "!x2"}, "x4");
  o.support = 0.5;
  std::stringstream s;
  s << "# comment\n\n";
  write_rules(s, {r, o}, conds);
  const auto back = read_rules(s, index);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0], r);
  EXPECT_EQ(back[1], o);
  EXPECT_DOUBLE_EQ(back[1].support, 0.5);
}

TEST(Rules, Malformed) {
  const auto conds = loan_conditions();
  const ConditionIndex index(conds);
  EXPECT_EQ(kind_of([&] { parse_rule("A>25 y", index); }), ErrorKind::MalformedRule);
  EXPECT_EQ(kind_of([&] { parse_rule("=> y", index); }), ErrorKind::MalformedRule);
  EXPECT_EQ(kind_of([&] { parse_rule("A>25 => A>25", index); }), ErrorKind::MalformedRule);
  EXPECT_EQ(kind_of([&] { parse_rule("Q>1 => y", index); }), ErrorKind::DanglingConditionId);
}

TEST(Dimacs, TheoryRoundTrip) {
  const auto conds = loan_conditions();
  const DomainTheory e = extend_theory(build_theory(conds), {implication({"x1", "!x2"}, "x4")});
  std::stringstream s;
  write_theory(s, e, conds);
  const std::string text = s.str();
  EXPECT_NE(text.find("p cnf 7 6"), std::string::npos);
  EXPECT_NE(text.find("c var 7 S=PP"), std::string::npos);
  const DomainTheory back = read_theory(s);
  EXPECT_EQ(back.structural, e.structural);
  EXPECT_EQ(back.mined, e.mined);
}

TEST(Dimacs, RemapsByConditionText) {
  const auto conds = loan_conditions();
  std::stringstream s;
  write_theory(s, build_theory(conds), conds);
  std::vector<Condition> reordered(conds.rbegin(), conds.rend());
  for (ConditionId i = 0; i < reordered.size(); ++i) reordered[i].id = i;
  const DomainTheory back = read_theory(s, &reordered);
  // A>60 => A>25 now reads x6 => x7.
  EXPECT_TRUE(back.structural.contains(clause({"!x6", "x7"})));
  std::stringstream t;
  write_theory(t, build_theory(conds), conds);
  const std::vector<Condition> fewer(conds.begin(), conds.begin() + 3);
  EXPECT_EQ(kind_of([&] { read_theory(t, &fewer); }), ErrorKind::DanglingConditionId);
}

TEST(Dimacs, Malformed) {
  for (const char* text : {"p cnf 2 1\n1 -2\n", "p cnf x y\n", "p cnf 2 1\n1 3 0\n", "1 2 0\n"}) {
    std::istringstream in(text);
    EXPECT_EQ(kind_of([&] { read_theory(in); }), ErrorKind::MalformedTheory) << text;
  }
}
