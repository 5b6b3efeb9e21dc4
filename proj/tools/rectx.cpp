// rectx: learn, mine, rectify, explain and evaluate tree-based classifiers.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rectx/rectx.hpp"

namespace {

using namespace rectx;
using nlohmann::json;

struct DataFlags {
  std::string path;
  std::string label = "y";
  std::vector<std::string> categorical;

  void add(CLI::App* app, const std::string& flag, bool required = true) {
    auto* o = app->add_option(flag, path, "CSV file with a header row");
    if (required) o->required();
    app->add_option("--label", label, "label column")->capture_default_str();
    app->add_option("--categorical", categorical, "columns to treat as categorical")->delimiter(',');
  }

  Dataset load() const {
    CsvOptions opt;
    opt.label_column = label;
    opt.categorical.insert(categorical.begin(), categorical.end());
    return load_csv_file(path, opt);
  }
};

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write '" + path + "'");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path + "'");
  return in;
}

void write_json(const std::string& path, const json& j) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(1) << '\n';
    return;
  }
  open_out(path) << j.dump(1) << '\n';
}

DomainTheory theory_for(const RandomForest& f, const std::string& theory_path) {
  if (theory_path.empty()) return build_theory(f.conditions);
  std::ifstream in = open_in(theory_path);
  return read_theory(in, &f.conditions);
}

std::vector<AssociationRule> read_rules_file(const std::string& path, const std::vector<Condition>& conditions) {
  std::ifstream in = open_in(path);
  return read_rules(in, ConditionIndex(conditions));
}

json rectification_json(const RectificationReport& r) {
  return {{"rules_applied", r.rules_applied},
          {"rules_changing_model", r.rules_changing_model},
          {"nr_percent", r.changed_percentage()},
          {"paths_patched", r.paths_patched},
          {"node_count_before", r.node_count_before},
          {"node_count_after", r.node_count_after},
          {"depth_before", r.depth_before},
          {"depth_after", r.depth_after},
          {"elapsed_seconds", r.elapsed_seconds}};
}

int error_exit(int code, std::string_view kind, const std::string& message) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rectify tree-based classifiers with mined rules and explain their predictions"};
  app.require_subcommand(1);
  std::uint64_t seed = 0;

  // learn
  auto* learn = app.add_subcommand("learn", "learn a decision tree or random forest");
  DataFlags learn_data;
  learn_data.add(learn, "--data");
  std::string learn_model = "forest", learn_out;
  std::size_t trees = 100, min_leaf = 1, max_depth = 0;
  learn->add_option("--model", learn_model, "tree or forest")->check(CLI::IsMember({"tree", "forest"}));
  learn->add_option("--trees", trees, "forest size")->check(CLI::PositiveNumber);
  learn->add_option("--max-depth", max_depth, "depth limit, 0 for none");
  learn->add_option("--min-samples-leaf", min_leaf)->check(CLI::PositiveNumber);
  learn->add_option("--out", learn_out, "model JSON")->required();
  learn->add_option("--seed", seed);

  // binarize
  auto* bin = app.add_subcommand("binarize", "rewrite a dataset over a model's conditions");
  DataFlags bin_data;
  bin_data.add(bin, "--data");
  std::string bin_model, bin_out;
  bin->add_option("--model", bin_model)->required();
  bin->add_option("--out", bin_out)->required();
  bin->add_option("--seed", seed);

  // mine
  auto* mine_cmd = app.add_subcommand("mine", "mine 100%-confidence association rules");
  DataFlags mine_data;
  mine_data.add(mine_cmd, "--data", false);
  std::string mine_model, mine_binarized, cars_out, rules_out, theory_out, ext_theory_out;
  std::size_t max_rules = 100, max_cars = 100, rule_size = 3;
  double timeout = 3600;
  mine_cmd->add_option("--model", mine_model, "model whose conditions define the items");
  mine_cmd->add_option("--binarized", mine_binarized, "pre-binarized 0/1 CSV instead of --data/--model");
  mine_cmd->add_option("--max-rules", max_rules, "cap on non-classification rules");
  mine_cmd->add_option("--max-cars", max_cars, "cap on classification rules");
  mine_cmd->add_option("--rule-size", rule_size, "literals per rule, head included")->check(CLI::Range(2, 3));
  mine_cmd->add_option("--timeout-secs", timeout)->check(CLI::PositiveNumber);
  mine_cmd->add_option("--cars-out", cars_out, "classification rules")->required();
  mine_cmd->add_option("--rules-out", rules_out, "other rules")->required();
  mine_cmd->add_option("--theory-out", theory_out, "structural theory");
  mine_cmd->add_option("--extended-theory-out", ext_theory_out, "theory extended by the other rules");
  mine_cmd->add_option("--seed", seed);

  // rectify
  auto* rect = app.add_subcommand("rectify", "rectify a model by classification rules");
  std::string rect_model, rect_rules, rect_theory, rect_out, rect_report;
  rect->add_option("--model", rect_model)->required();
  rect->add_option("--rules", rect_rules, "classification rules")->required();
  rect->add_option("--theory", rect_theory, "theory file; built from the model when omitted");
  rect->add_option("--out", rect_out)->required();
  rect->add_option("--report", rect_report);
  rect->add_option("--seed", seed);

  // explain
  auto* expl = app.add_subcommand("explain", "compute short UP-majoritary reasons");
  DataFlags expl_data;
  expl_data.add(expl, "--instances");
  std::string expl_model, expl_theory, expl_rules, expl_out;
  std::size_t orderings = 100;
  expl->add_option("--model", expl_model)->required();
  expl->add_option("--theory", expl_theory);
  expl->add_option("--extended-rules", expl_rules, "non-classification rules added to the theory");
  expl->add_option("--orderings", orderings)->check(CLI::PositiveNumber);
  expl->add_option("--out", expl_out);
  expl->add_option("--seed", seed);

  // eval
  auto* eval = app.add_subcommand("eval", "score a model on a labelled dataset");
  DataFlags eval_data;
  eval_data.add(eval, "--data");
  std::string eval_model, eval_out;
  eval->add_option("--model", eval_model)->required();
  eval->add_option("--out", eval_out);
  eval->add_option("--seed", seed);

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "repeated-split learn/mine/rectify/explain study");
  DataFlags pipe_data;
  pipe_data.add(pipe, "--data");
  PipelineConfig cfg;
  std::string pipe_model = "forest", out_dir = ".";
  std::vector<std::size_t> budgets = cfg.rule_budgets;
  bool csv = false, explain_initial = false, no_explain = false;
  double pipe_timeout = 3600;
  pipe->add_option("--model", pipe_model)->check(CLI::IsMember({"tree", "forest"}));
  pipe->add_option("--splits", cfg.splits)->check(CLI::PositiveNumber);
  pipe->add_option("--train-fraction", cfg.train_fraction)->check(CLI::Range(0.0, 1.0));
  pipe->add_option("--trees", cfg.forest.m)->check(CLI::PositiveNumber);
  std::size_t pipe_depth = 0;
  pipe->add_option("--max-depth", pipe_depth, "depth limit, 0 for none");
  pipe->add_option("--max-cars", cfg.miner.max_cars);
  pipe->add_option("--rule-size", cfg.miner.max_rule_size)->check(CLI::Range(2, 3));
  pipe->add_option("--timeout-secs", pipe_timeout)->check(CLI::PositiveNumber);
  pipe->add_option("--budgets", budgets, "rule budgets for the extended theory")->delimiter(',');
  pipe->add_option("--orderings", cfg.orderings)->check(CLI::PositiveNumber);
  pipe->add_option("--instances", cfg.explain_instances, "test instances explained per split");
  pipe->add_flag("--explain-initial", explain_initial, "explain the unrectified model");
  pipe->add_flag("--no-explain", no_explain, "skip the explanation study");
  pipe->add_option("--out-dir", out_dir);
  pipe->add_flag("--csv", csv, "also write CSV tables");
  pipe->add_option("--seed", seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return error_exit(2, "usage", e.what());
  }

  try {
    if (*learn) {
      const Dataset d = learn_data.load();
      RandomForest f;
      if (learn_model == "tree") {
        TreeParams p;
        if (max_depth) p.max_depth = max_depth;
        p.min_samples_leaf = min_leaf;
        p.seed = seed;
        f = learn_tree(d, p);
      } else {
        ForestParams p;
        p.m = trees;
        if (max_depth) p.max_depth = max_depth;
        p.min_samples_leaf = min_leaf;
        p.seed = seed;
        f = learn_forest(d, p);
      }
      save_forest(learn_out, f);
    } else if (*bin) {
      const RandomForest f = load_forest(bin_model);
      std::ofstream out = open_out(bin_out);
      write_binarized_csv(out, binarize(bin_data.load(), f.conditions));
    } else if (*mine_cmd) {
      BinarizedDataset b;
      if (!mine_binarized.empty()) {
        std::ifstream in = open_in(mine_binarized);
        b = read_binarized_csv(in);
      } else {
        if (mine_data.path.empty() || mine_model.empty()) {
          return error_exit(2, "usage", "mine needs --binarized, or --data with --model");
        }
        b = binarize(mine_data.load(), load_forest(mine_model).conditions);
      }
      const DomainTheory th = build_theory(b.conditions);
      MinerConfig mc;
      mc.max_other_rules = max_rules;
      mc.max_cars = max_cars;
      mc.max_rule_size = rule_size;
      mc.timeout = std::chrono::duration<double>(timeout);
      const MiningResult res = mine(b, th, mc);
      {
        std::ofstream out = open_out(cars_out);
        write_rules(out, res.cars, b.conditions);
      }
      {
        std::ofstream out = open_out(rules_out);
        write_rules(out, res.others, b.conditions);
      }
      if (!theory_out.empty()) {
        std::ofstream out = open_out(theory_out);
        write_theory(out, th, b.conditions);
      }
      if (!ext_theory_out.empty()) {
        std::ofstream out = open_out(ext_theory_out);
        write_theory(out, extend_theory(th, res.others), b.conditions);
      }
      std::cout << json{{"cars", res.cars.size()},
                        {"other_rules", res.others.size()},
                        {"timed_out", res.timed_out},
                        {"bodies_examined", res.bodies_examined}}
                       .dump()
                << '\n';
    } else if (*rect) {
      const RandomForest f = load_forest(rect_model);
      const DomainTheory th = theory_for(f, rect_theory);
      const auto cars = read_rules_file(rect_rules, f.conditions);
      auto [out, report] = rectify_forest(f, cars, th);
      save_forest(rect_out, out);
      if (!rect_report.empty()) write_json(rect_report, rectification_json(report));
    } else if (*expl) {
      const RandomForest f = load_forest(expl_model);
      DomainTheory th = theory_for(f, expl_theory);
      if (!expl_rules.empty()) th = extend_theory(th, read_rules_file(expl_rules, f.conditions));
      const BinarizedDataset b = binarize(expl_data.load(), f.conditions);
      UpMajoritaryExplainer ex(f, th);
      json rows = json::array();
      for (std::size_t i = 0; i < b.size(); ++i) {
        const BitVector& bits = b.rows[i].bits;
        json row{{"row", i}, {"prediction", predict_forest(f, bits) ? 1 : 0}};
        if (!evaluate(th.combined(), bits)) {
          row["error"] = "InfeasibleInstance";
          rows.push_back(std::move(row));
          continue;
        }
        const Explanation e = ex.best(bits, orderings, instance_seed(seed, i));
        std::vector<std::string> lits;
        for (Literal l : e.term) lits.push_back(render_literal(l, f.conditions));
        row["reason"] = lits;
        row["size"] = e.term.size();
        row["theory"] = std::string(to_string(e.theory));
        rows.push_back(std::move(row));
      }
      write_json(expl_out, json{{"version", 1}, {"orderings", orderings}, {"seed", seed}, {"explanations", rows}});
    } else if (*eval) {
      const RandomForest f = load_forest(eval_model);
      const BinarizedDataset b = binarize(eval_data.load(), f.conditions);
      const ModelScores s = score_model(f, b, f.trees.size() == 1 ? ModelKind::Tree : ModelKind::Forest);
      write_json(eval_out, json{{"rows", b.size()},
                                {"f_score", s.f_score},
                                {"g_mean", s.g_mean},
                                {"auc", s.auc ? json(*s.auc) : json(nullptr)},
                                {"nodes", f.size()},
                                {"depth", f.depth()}});
    } else if (*pipe) {
      cfg.model = pipe_model == "tree" ? ModelKind::Tree : ModelKind::Forest;
      cfg.rule_budgets = budgets;
      if (pipe_depth) cfg.forest.max_depth = cfg.tree.max_depth = pipe_depth;
      cfg.miner.timeout = std::chrono::duration<double>(pipe_timeout);
      cfg.explain_rectified = !explain_initial;
      cfg.explain = !no_explain;
      cfg.seed = seed;
      cfg.threads = threads_from_env();
      const EvalReport rep = run_pipeline(pipe_data.load(), cfg);
      std::filesystem::create_directories(out_dir);
      const std::filesystem::path dir(out_dir);
      write_json((dir / "eval_report.json").string(), eval_report_json(rep));
      write_json((dir / "explanation_stats.json").string(), explanation_stats_json(rep));
      write_json((dir / "timing_report.json").string(), timing_report_json(rep));
      if (csv) {
        std::ofstream m = open_out((dir / "metrics.csv").string());
        write_metrics_csv(m, rep);
        std::ofstream e = open_out((dir / "explanations.csv").string());
        write_explanations_csv(e, rep);
      }
    }
  } catch (const Error& e) {
    return error_exit(1, to_string(e.kind()), e.what());
  } catch (const std::exception& e) {
    return error_exit(1, "Internal", e.what());
  }
  return 0;
}
