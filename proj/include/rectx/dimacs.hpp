#pragma once

// DIMACS-style CNF text. Variable v stands for condition id v-1; `c var`
// comment lines name the conditions and `c section` lines split a theory
// into its structural and mined parts.
//
//   c var 1 A>25
//   c var 2 A>60
//   p cnf 2 1
//   c section structural
//   -2 1 0
//   c section mined

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "rectx/condition.hpp"
#include "rectx/error.hpp"
#include "rectx/logic.hpp"
#include "rectx/theory.hpp"

namespace rectx {

namespace detail {

inline void write_clauses(std::ostream& out, const CnfFormula& f) {
  for (const Clause& c : f) {
    for (Literal l : c) {
      out << (l.positive() ? "" : "-") << (l.var() + 1) << ' ';
    }
    out << "0\n";
  }
}

inline void write_header(std::ostream& out, const std::vector<Condition>& conditions,
                         ConditionId vars, std::size_t clauses) {
  for (const Condition& c : conditions) out << "c var " << (c.id + 1) << ' ' << to_string(c) << '\n';
  out << "p cnf " << vars << ' ' << clauses << '\n';
}

}  // namespace detail

inline void write_dimacs(std::ostream& out, const CnfFormula& f, const std::vector<Condition>& conditions = {}) {
  const ConditionId vars = std::max<ConditionId>(f.var_bound(), static_cast<ConditionId>(conditions.size()));
  detail::write_header(out, conditions, vars, f.size());
  detail::write_clauses(out, f);
}

inline void write_theory(std::ostream& out, const DomainTheory& th, const std::vector<Condition>& conditions) {
  const ConditionId vars = std::max({th.num_conditions, th.structural.var_bound(), th.mined.var_bound(),
                                     static_cast<ConditionId>(conditions.size())});
  detail::write_header(out, conditions, vars, th.structural.size() + th.mined.size());
  out << "c section structural\n";
  detail::write_clauses(out, th.structural);
  out << "c section mined\n";
  detail::write_clauses(out, th.mined);
}

/// Clauses before any `c section` line count as structural. When
/// `conditions` is given, variables are remapped through their `c var`
/// names onto those condition ids.
inline DomainTheory read_theory(std::istream& in, const std::vector<Condition>* conditions = nullptr) {
  DomainTheory th;
  CnfFormula* target = &th.structural;
  std::map<long, ConditionId> remap;
  std::optional<ConditionIndex> index;
  if (conditions) {
    index.emplace(*conditions);
    th.num_conditions = static_cast<ConditionId>(conditions->size());
  }
  bool header = false;
  std::vector<Literal> pending;
  std::string line;
  std::size_t line_no = 0;
  auto bad = [&](const std::string& why) -> void {
    fail(ErrorKind::MalformedTheory, "line " + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    if (tok == "c") {
      std::string kind;
      ls >> kind;
      if (kind == "section") {
        std::string name;
        ls >> name;
        if (name == "structural") {
          target = &th.structural;
        } else if (name == "mined") {
          target = &th.mined;
        } else {
          bad("unknown section '" + name + "'");
        }
      } else if (kind == "var") {
        long v = 0;
        std::string text;
        if (!(ls >> v) || v < 1) bad("malformed var line");
        std::getline(ls, text);
        text = detail::trim(text);
        if (text.empty()) bad("malformed var line");
        if (index) {
          const auto id = index->find(text);
          if (!id) fail(ErrorKind::DanglingConditionId, "theory names unknown condition '" + text + "'");
          remap[v] = *id;
        }
      }
      continue;
    }
    if (tok == "p") {
      std::string fmt;
      long vars = 0, clauses = 0;
      if (!(ls >> fmt >> vars >> clauses) || fmt != "cnf" || vars < 0 || clauses < 0) bad("malformed problem line");
      if (!conditions) th.num_conditions = static_cast<ConditionId>(vars);
      header = true;
      continue;
    }
    if (!header) bad("clause before the 'p cnf' line");
    std::istringstream cs(line);
    long v = 0;
    while (cs >> v) {
      if (v == 0) {
        try {
          target->add(Clause(std::move(pending)));
        } catch (const Error& e) {
          bad(e.what());
        }
        pending.clear();
        continue;
      }
      const long a = v < 0 ? -v : v;
      ConditionId id = static_cast<ConditionId>(a - 1);
      if (index) {
        auto it = remap.find(a);
        if (it == remap.end()) bad("variable " + std::to_string(a) + " has no 'c var' name");
        id = it->second;
      } else if (static_cast<ConditionId>(a) > th.num_conditions) {
        bad("variable " + std::to_string(a) + " exceeds the declared count");
      }
      pending.emplace_back(id, v > 0);
    }
    if (cs.fail() && !cs.eof()) bad("non-numeric token in clause");
  }
  if (!pending.empty()) fail(ErrorKind::MalformedTheory, "last clause is not terminated by 0");
  return th;
}

}  // namespace rectx
