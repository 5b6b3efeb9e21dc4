#pragma once

// Repeated-split evaluation: learn, mine, rectify, score, explain.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "rectx/error.hpp"
#include "rectx/explainer.hpp"
#include "rectx/learner.hpp"
#include "rectx/metrics.hpp"
#include "rectx/miner.hpp"
#include "rectx/rectifier.hpp"
#include "rectx/tabular.hpp"
#include "rectx/theory.hpp"
#include "rectx/tree.hpp"

namespace rectx {

enum class ModelKind { Tree, Forest };

constexpr std::string_view to_string(ModelKind k) { return k == ModelKind::Tree ? "tree" : "forest"; }

struct PipelineConfig {
  ModelKind model = ModelKind::Forest;
  std::size_t splits = 10;
  double train_fraction = 0.7;
  TreeParams tree;
  ForestParams forest;
  MinerConfig miner;  // max_other_rules is replaced by the largest budget
  std::vector<std::size_t> rule_budgets{100, 1000, 10000, 100000};
  std::size_t orderings = 100;
  std::size_t explain_instances = 100;
  bool explain_rectified = true;  // explain F^{A_c} rather than F
  bool explain = true;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

struct ModelScores {
  double f_score = 0.0;
  double g_mean = 0.0;
  std::optional<double> auc;  // empty when the test split has one class
};

struct ExplanationStats {
  std::size_t split = 0;
  std::size_t rule_budget = 0;
  std::size_t rules_used = 0;
  double red = 0.0;
  double ins = 0.0;
  std::size_t instances = 0;
  bool low_support = false;
  std::vector<std::size_t> sizes_th;
  std::vector<std::size_t> sizes_th_e;
};

struct SplitResult {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  std::size_t conditions = 0;
  std::size_t theory_clauses = 0;
  ModelScores before, after;
  std::size_t cars = 0;
  std::size_t other_rules = 0;
  bool miner_timed_out = false;
  RectificationReport rectification;
  std::size_t sampled_instances = 0;
  std::size_t kept_instances = 0;
  std::vector<ExplanationStats> explanations;
  // Wall-clock figures; kept out of the deterministic report.
  double learn_seconds = 0.0;
  double mine_seconds = 0.0;
  double explain_seconds = 0.0;
};

struct EvalReport {
  PipelineConfig config;
  std::vector<SplitResult> splits;
};

/// Thread count from RECTX_THREADS, 1 when unset or invalid.
inline std::size_t threads_from_env() {
  const char* v = std::getenv("RECTX_THREADS");
  if (!v) return 1;
  char* end = nullptr;
  const unsigned long n = std::strtoul(v, &end, 10);
  return (end == v || *end != '\0' || n == 0) ? 1 : static_cast<std::size_t>(n);
}

/// Runs body(i) for i in [0, n) on up to `threads` threads. Each worker
/// gets a stable id in [0, threads). The first exception is rethrown.
template <class F>
void parallel_for(std::size_t n, std::size_t threads, F&& body) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i, std::size_t{0});
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += threads) body(i, w);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (std::thread& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline ModelScores score_model(const RandomForest& f, const BinarizedDataset& test, ModelKind kind) {
  Confusion c;
  std::vector<std::pair<double, bool>> scored;
  scored.reserve(test.size());
  for (const BinarizedRow& r : test.rows) {
    const bool pred = predict_forest(f, r.bits);
    c.add(pred, r.label != 0);
    const double s = kind == ModelKind::Forest ? vote_fraction(f, r.bits) : (pred ? 1.0 : 0.0);
    scored.emplace_back(s, r.label != 0);
  }
  ModelScores out;
  out.f_score = f_score(c);
  out.g_mean = g_mean(c);
  const bool pos = std::any_of(scored.begin(), scored.end(), [](const auto& p) { return p.second; });
  const bool neg = std::any_of(scored.begin(), scored.end(), [](const auto& p) { return !p.second; });
  if (pos && neg) out.auc = auc(scored);
  return out;
}

/// Red / Ins from per-instance sizes of the smallest reasons found.
inline void summarize_sizes(ExplanationStats& s) {
  const std::size_t n = s.sizes_th.size();
  s.instances = n;
  s.low_support = n < 10;
  if (n == 0) return;
  double red = 0.0;
  std::size_t ins = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = static_cast<double>(s.sizes_th[i]), b = static_cast<double>(s.sizes_th_e[i]);
    if (a > 0.0) red += (a - b) / a * 100.0;
    if (s.sizes_th_e[i] < s.sizes_th[i]) ++ins;
  }
  s.red = red / static_cast<double>(n);
  s.ins = 100.0 * static_cast<double>(ins) / static_cast<double>(n);
}

/// Seed for the orderings of test row `row` in split `split_seed`; shared
/// by every theory so that size differences come from the theory alone.
inline std::uint64_t instance_seed(std::uint64_t split_seed, std::size_t row) {
  std::uint64_t z = split_seed + 0x9e3779b97f4a7c15ull * (row + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline SplitResult run_split(const Dataset& d, const PipelineConfig& cfg, std::size_t index) {
  using clock = std::chrono::steady_clock;
  auto seconds_since = [](clock::time_point t) {
    return std::chrono::duration<double>(clock::now() - t).count();
  };

  SplitResult res;
  res.index = index;
  res.seed = cfg.seed + index;
  auto [train, test] = split(d, cfg.train_fraction, res.seed);
  res.train_rows = train.size();
  res.test_rows = test.size();

  auto t0 = clock::now();
  RandomForest f;
  if (cfg.model == ModelKind::Tree) {
    TreeParams p = cfg.tree;
    p.seed = res.seed;
    f = learn_tree(train, p);
  } else {
    ForestParams p = cfg.forest;
    p.seed = res.seed;
    f = learn_forest(train, p);
  }
  res.learn_seconds = seconds_since(t0);

  const std::vector<Condition> x = collect_conditions(f);
  res.conditions = x.size();
  const DomainTheory th = build_theory(x);
  res.theory_clauses = th.structural.size();
  const BinarizedDataset train_b = binarize(train, x);
  const BinarizedDataset test_b = binarize(test, x);

  const std::size_t max_budget =
      cfg.rule_budgets.empty() ? 0 : *std::max_element(cfg.rule_budgets.begin(), cfg.rule_budgets.end());
  MinerConfig mc = cfg.miner;
  mc.max_other_rules = max_budget;
  t0 = clock::now();
  MiningResult mined = train_b.empty() ? MiningResult{} : mine(train_b, th, mc);
  res.mine_seconds = seconds_since(t0);
  res.cars = mined.cars.size();
  res.other_rules = mined.others.size();
  res.miner_timed_out = mined.timed_out;

  auto [rectified, report] = rectify_forest(f, mined.cars, th);
  res.rectification = report;
  res.before = score_model(f, test_b, cfg.model);
  res.after = score_model(rectified, test_b, cfg.model);

  if (!cfg.explain) return res;
  t0 = clock::now();
  const RandomForest& target = cfg.explain_rectified ? rectified : f;

  // Sample: first rows of a seeded shuffle of the test split, minus those
  // violating any mined non-classification rule.
  std::vector<std::size_t> order(test_b.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(res.seed);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(std::min(order.size(), cfg.explain_instances));
  res.sampled_instances = order.size();
  const DomainTheory th_max = extend_theory(th, mined.others);
  const CnfFormula th_max_cnf = th_max.combined();
  std::vector<std::size_t> kept;
  for (std::size_t r : order) {
    if (evaluate(th_max_cnf, test_b.rows[r].bits)) kept.push_back(r);
  }
  res.kept_instances = kept.size();

  std::vector<std::size_t> budgets = cfg.rule_budgets;
  std::vector<DomainTheory> theories;
  theories.push_back(th);
  for (std::size_t b : budgets) {
    const std::size_t k = std::min(b, mined.others.size());
    theories.push_back(extend_theory(
        th, std::vector<AssociationRule>(mined.others.begin(), mined.others.begin() + static_cast<std::ptrdiff_t>(k))));
  }

  // sizes[t][i]: smallest reason for kept instance i under theory t.
  std::vector<std::vector<std::size_t>> sizes(theories.size(), std::vector<std::size_t>(kept.size(), 0));
  const std::size_t threads = std::max<std::size_t>(1, cfg.threads);
  parallel_for(kept.size(), threads, [&](std::size_t i, std::size_t) {
    const BitVector& bits = test_b.rows[kept[i]].bits;
    const std::uint64_t s = instance_seed(res.seed, kept[i]);
    for (std::size_t t = 0; t < theories.size(); ++t) {
      UpMajoritaryExplainer ex(target, theories[t]);
      sizes[t][i] = ex.best(bits, cfg.orderings, s).term.size();
    }
  });

  for (std::size_t b = 0; b < budgets.size(); ++b) {
    ExplanationStats s;
    s.split = index;
    s.rule_budget = budgets[b];
    s.rules_used = std::min(budgets[b], mined.others.size());
    s.sizes_th = sizes[0];
    s.sizes_th_e = sizes[b + 1];
    summarize_sizes(s);
    res.explanations.push_back(std::move(s));
  }
  res.explain_seconds = seconds_since(t0);
  return res;
}

inline EvalReport run_pipeline(const Dataset& d, const PipelineConfig& cfg) {
  if (!d.has_both_classes()) {
    fail(ErrorKind::DegenerateClassDistribution, "dataset must contain both classes");
  }
  if (cfg.splits == 0) fail(ErrorKind::InvalidArgument, "need at least one split");
  EvalReport rep;
  rep.config = cfg;
  rep.splits.reserve(cfg.splits);
  for (std::size_t i = 0; i < cfg.splits; ++i) rep.splits.push_back(run_split(d, cfg, i));
  return rep;
}

// ---- report writers -----------------------------------------------------------

namespace detail {

inline nlohmann::json scores_json(const ModelScores& s) {
  nlohmann::json j{{"f_score", s.f_score}, {"g_mean", s.g_mean}};
  j["auc"] = s.auc ? nlohmann::json(*s.auc) : nlohmann::json(nullptr);
  return j;
}

inline double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline nlohmann::json optional_mean(const std::vector<double>& v) {
  return v.empty() ? nlohmann::json(nullptr) : nlohmann::json(mean_of(v));
}

}  // namespace detail

inline nlohmann::json config_json(const PipelineConfig& c) {
  return {{"model", std::string(to_string(c.model))},
          {"splits", c.splits},
          {"train_fraction", c.train_fraction},
          {"trees", c.model == ModelKind::Forest ? c.forest.m : 1},
          {"max_rule_size", c.miner.max_rule_size},
          {"max_cars", c.miner.max_cars},
          {"rule_budgets", c.rule_budgets},
          {"orderings", c.orderings},
          {"explain_instances", c.explain_instances},
          {"explained_model", c.explain_rectified ? "rectified" : "initial"},
          {"auc_score", c.model == ModelKind::Forest ? "vote_fraction" : "hard_prediction"},
          {"seed", c.seed}};
}

inline nlohmann::json split_json(const SplitResult& s) {
  return {{"split", s.index},
          {"seed", s.seed},
          {"train_rows", s.train_rows},
          {"test_rows", s.test_rows},
          {"conditions", s.conditions},
          {"theory_clauses", s.theory_clauses},
          {"before", detail::scores_json(s.before)},
          {"after", detail::scores_json(s.after)},
          {"nodes_before", s.rectification.node_count_before},
          {"nodes_after", s.rectification.node_count_after},
          {"depth_before", s.rectification.depth_before},
          {"depth_after", s.rectification.depth_after},
          {"cars", s.cars},
          {"other_rules", s.other_rules},
          {"miner_timed_out", s.miner_timed_out},
          {"rules_changing_model", s.rectification.rules_changing_model},
          {"nr_percent", s.rectification.changed_percentage()},
          {"paths_patched", s.rectification.paths_patched},
          {"explained_instances", s.kept_instances},
          {"sampled_instances", s.sampled_instances}};
}

/// Deterministic summary: per split and averaged, no wall-clock values.
inline nlohmann::json eval_report_json(const EvalReport& r) {
  nlohmann::json splits = nlohmann::json::array();
  std::vector<double> fb, fa, gb, ga, ab, aa, nb, na, db, da, nr, cars;
  for (const SplitResult& s : r.splits) {
    splits.push_back(split_json(s));
    fb.push_back(s.before.f_score);
    fa.push_back(s.after.f_score);
    gb.push_back(s.before.g_mean);
    ga.push_back(s.after.g_mean);
    if (s.before.auc) ab.push_back(*s.before.auc);
    if (s.after.auc) aa.push_back(*s.after.auc);
    nb.push_back(static_cast<double>(s.rectification.node_count_before));
    na.push_back(static_cast<double>(s.rectification.node_count_after));
    db.push_back(static_cast<double>(s.rectification.depth_before));
    da.push_back(static_cast<double>(s.rectification.depth_after));
    nr.push_back(s.rectification.changed_percentage());
    cars.push_back(static_cast<double>(s.cars));
  }
  using detail::mean_of;
  nlohmann::json avg{{"before", {{"f_score", mean_of(fb)}, {"g_mean", mean_of(gb)}, {"auc", detail::optional_mean(ab)}}},
                     {"after", {{"f_score", mean_of(fa)}, {"g_mean", mean_of(ga)}, {"auc", detail::optional_mean(aa)}}},
                     {"nodes_before", mean_of(nb)},
                     {"nodes_after", mean_of(na)},
                     {"depth_before", mean_of(db)},
                     {"depth_after", mean_of(da)},
                     {"nr_percent", mean_of(nr)},
                     {"cars", mean_of(cars)},
                     {"auc_splits", ab.size()}};
  return {{"version", 1}, {"config", config_json(r.config)}, {"splits", std::move(splits)}, {"average", std::move(avg)}};
}

inline nlohmann::json explanation_stats_json(const EvalReport& r) {
  nlohmann::json per = nlohmann::json::array();
  const std::vector<std::size_t>& budgets = r.config.rule_budgets;
  std::vector<std::vector<double>> red(budgets.size()), ins(budgets.size());
  std::vector<std::size_t> low(budgets.size(), 0);
  for (const SplitResult& s : r.splits) {
    for (std::size_t b = 0; b < s.explanations.size(); ++b) {
      const ExplanationStats& e = s.explanations[b];
      per.push_back({{"split", e.split},
                     {"rule_budget", e.rule_budget},
                     {"rules_used", e.rules_used},
                     {"red", e.red},
                     {"ins", e.ins},
                     {"instances", e.instances},
                     {"low_support", e.low_support},
                     {"sizes_th", e.sizes_th},
                     {"sizes_th_e", e.sizes_th_e}});
      if (e.instances > 0) {
        red[b].push_back(e.red);
        ins[b].push_back(e.ins);
      }
      if (e.low_support) ++low[b];
    }
  }
  nlohmann::json avg = nlohmann::json::array();
  for (std::size_t b = 0; b < budgets.size(); ++b) {
    avg.push_back({{"rule_budget", budgets[b]},
                   {"red", detail::optional_mean(red[b])},
                   {"ins", detail::optional_mean(ins[b])},
                   {"splits_with_instances", red[b].size()},
                   {"low_support_splits", low[b]}});
  }
  return {{"version", 1}, {"per_split", std::move(per)}, {"average", std::move(avg)}};
}

inline nlohmann::json timing_report_json(const EvalReport& r) {
  nlohmann::json splits = nlohmann::json::array();
  for (const SplitResult& s : r.splits) {
    splits.push_back({{"split", s.index},
                      {"learn_seconds", s.learn_seconds},
                      {"mine_seconds", s.mine_seconds},
                      {"rectify_seconds", s.rectification.elapsed_seconds},
                      {"explain_seconds", s.explain_seconds}});
  }
  return {{"version", 1}, {"threads", r.config.threads}, {"splits", std::move(splits)}};
}

/// One line per split: scores before/after, sizes, NR.
inline void write_metrics_csv(std::ostream& out, const EvalReport& r) {
  out << "split,f_before,f_after,g_before,g_after,auc_before,auc_after,nodes_before,nodes_after,"
         "depth_before,depth_after,cars,nr_percent\n";
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  for (const SplitResult& s : r.splits) {
    out << s.index << ',' << format_number(s.before.f_score) << ',' << format_number(s.after.f_score) << ','
        << format_number(s.before.g_mean) << ',' << format_number(s.after.g_mean) << ',' << opt(s.before.auc)
        << ',' << opt(s.after.auc) << ',' << s.rectification.node_count_before << ','
        << s.rectification.node_count_after << ',' << s.rectification.depth_before << ','
        << s.rectification.depth_after << ',' << s.cars << ','
        << format_number(s.rectification.changed_percentage()) << '\n';
  }
}

/// One line per split and budget: Red and Ins.
inline void write_explanations_csv(std::ostream& out, const EvalReport& r) {
  out << "split,rule_budget,rules_used,instances,red,ins,low_support\n";
  for (const SplitResult& s : r.splits) {
    for (const ExplanationStats& e : s.explanations) {
      out << e.split << ',' << e.rule_budget << ',' << e.rules_used << ',' << e.instances << ','
          << format_number(e.red) << ',' << format_number(e.ins) << ',' << (e.low_support ? 1 : 0) << '\n';
    }
  }
}

}  // namespace rectx
