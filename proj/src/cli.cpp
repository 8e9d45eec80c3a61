#include "concord/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "concord/graph.hpp"
#include "concord/inference.hpp"
#include "concord/io.hpp"
#include "concord/solver.hpp"
#include "concord/synthetic.hpp"
#include "json.hpp"

namespace concord {

std::map<std::string, double> compute_metrics(std::span<const QuerySelection> selections,
                                              std::span<const GoldRecord> golds,
                                              const ConstraintGraph* graph) {
  std::map<std::string, double> m;
  const bool has_truth = std::any_of(golds.begin(), golds.end(),
                                     [](const GoldRecord& g) { return g.gold_truth.has_value(); });
  const bool has_answers = std::any_of(golds.begin(), golds.end(),
                                       [](const GoldRecord& g) { return g.gold_answers.has_value(); });
  if (has_truth) {
    const BinaryF1 f1 = binary_f1(selections, golds);
    m["binary_f1"] = f1.f1;
    m["precision"] = f1.precision;
    m["recall"] = f1.recall;
  }
  if (has_answers) {
    m["token_f1"] = mean_token_f1(selections, golds);
    m["perfect_consistency"] = perfect_consistency(selections, golds);
  }
  if (!golds.empty()) m["accuracy"] = accuracy(selections, golds);
  if (graph) {
    const ConsistencyResult c = consistency_tau(selections, *graph);
    m["tau"] = c.tau;
    m["consistency"] = c.consistency;
  }
  return m;
}

MetricFn make_metric(const std::string& name, std::vector<GoldRecord> golds,
                     std::optional<ConstraintGraph> graph) {
  if (name == "binary-f1") {
    return [golds = std::move(golds)](std::span<const QuerySelection> s) {
      return binary_f1(s, golds).f1;
    };
  }
  if (name == "accuracy") {
    return [golds = std::move(golds)](std::span<const QuerySelection> s) { return accuracy(s, golds); };
  }
  if (name == "perfect-consistency") {
    return [golds = std::move(golds)](std::span<const QuerySelection> s) {
      return perfect_consistency(s, golds);
    };
  }
  if (name == "token-f1") {
    return [golds = std::move(golds)](std::span<const QuerySelection> s) {
      return mean_token_f1(s, golds);
    };
  }
  if (name == "tau") {
    if (!graph) throw Error(ErrorCode::Schema, "metric 'tau' needs --constraint-graph");
    return [graph = std::move(*graph)](std::span<const QuerySelection> s) {
      return consistency_tau(s, graph).consistency;
    };
  }
  throw Error(ErrorCode::Schema, "unknown metric '" + name + "'");
}

namespace {

using nlohmann::json;

const std::vector<std::string> kMetricNames = {"binary-f1", "tau", "perfect-consistency", "token-f1",
                                               "accuracy"};

struct InputOptions {
  std::string beliefs;
  std::string relations;
  std::string constraint_graph;
  bool no_relations = false;
};

struct ModelOptions {
  double beta = 1.0;
  double lambda = 0.5;
  bool ec = false;
  std::string mask = "all";
  std::optional<std::int64_t> timeout_ms;
  double epsilon = kDefaultEpsilon;
  unsigned jobs = 1;
};

void add_input_options(CLI::App* cmd, InputOptions& in) {
  cmd->add_option("--beliefs", in.beliefs, "Beliefs file")->required();
  cmd->add_option("--relations", in.relations, "Relations file");
  cmd->add_option("--constraint-graph", in.constraint_graph,
                  "Gold constraint graph; grounded into relations when --relations is absent, and "
                  "used for the consistency metric");
  cmd->add_flag("--no-relations", in.no_relations, "Run without any relations (baseline only)");
}

void add_model_options(CLI::App* cmd, ModelOptions& m, bool with_hyperparameters) {
  if (with_hyperparameters) {
    cmd->add_option("--beta", m.beta, "Base-model vs relation trade-off in [0,1]")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--lambda", m.lambda, "Relation confidence threshold in [0,1]")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_flag("--ec", m.ec, "Use the entailment-correction factor");
  }
  cmd->add_option("--mask", m.mask, "Relation types: all, entail-only, contradict-only")
      ->check(CLI::IsMember({"all", "entail-only", "contradict-only", "entail_only",
                             "contradict_only"}));
  cmd->add_option("--timeout-ms", m.timeout_ms, "Per-group solver timeout, 0 = none");
  cmd->add_option("--epsilon", m.epsilon, "Probability clamp");
  cmd->add_option("--jobs", m.jobs, "Groups solved concurrently")->check(CLI::PositiveNumber);
}

struct LoadedInputs {
  std::optional<ValidatedBatch> batch;
  std::vector<RelationEdge> edges;
  std::optional<ConstraintGraph> graph;
};

LoadedInputs load_inputs(const InputOptions& in, double epsilon) {
  LoadedInputs out;
  Batch batch = parse_beliefs(read_text_file(in.beliefs));
  if (!in.relations.empty() && !in.no_relations) {
    batch.relations = parse_relations(read_text_file(in.relations));
  }
  out.batch = validate_batch(std::move(batch), epsilon);
  if (!in.constraint_graph.empty()) {
    out.graph = parse_constraint_graph(read_text_file(in.constraint_graph));
    validate_constraint_graph(*out.graph);
  }
  if (in.no_relations) return out;
  if (!in.relations.empty()) {
    out.edges = out.batch->relations();
  } else if (out.graph) {
    out.edges = ground_constraint_graph(*out.graph, *out.batch);
  } else {
    throw Error(ErrorCode::Schema,
                "supply --relations, --constraint-graph or --no-relations");
  }
  return out;
}

// 30 s for yes/no batches, 10 s for multiple choice, none with contexts.
std::int64_t default_timeout_ms(const ValidatedBatch& batch) {
  if (!batch.contexts().empty()) return 0;
  const bool all_boolean = std::all_of(batch.queries().begin(), batch.queries().end(),
                                       [](const Query& q) { return q.kind == QueryKind::boolean; });
  return all_boolean ? 30000 : 10000;
}

Config make_config(const ModelOptions& m, const ValidatedBatch& batch) {
  Config c;
  c.beta = m.beta;
  c.lambda = m.lambda;
  c.entailment_correction = m.ec;
  c.relation_mask = parse_relation_mask(m.mask);
  c.timeout_ms = m.timeout_ms ? *m.timeout_ms : default_timeout_ms(batch);
  c.epsilon = m.epsilon;
  validate_config(c);
  return c;
}

std::vector<GoldRecord> load_golds(const std::string& path) {
  auto golds = parse_golds(read_text_file(path));
  if (golds.empty()) throw Error(ErrorCode::Schema, "gold file '" + path + "' has no records");
  return golds;
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    if (!text.empty() && text.back() != '\n') out << '\n';
  } else {
    write_text_file(path, text);
  }
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("CONCORD_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw Error(ErrorCode::Schema, "CONCORD_SEED is not an unsigned integer");
    }
  }
  return 0;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    try {
      std::size_t used = 0;
      grid.push_back(std::stod(item, &used));
    } catch (const std::exception&) {
      throw Error(ErrorCode::Schema, "bad grid value '" + item + "'");
    }
  }
  if (grid.empty()) throw Error(ErrorCode::EmptySpace, "empty grid");
  return grid;
}

FlipScore parse_flip_score(const std::string& s) {
  return s == "token-f1" ? FlipScore::token_f1 : FlipScore::correctness;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Consistency correction of batched model predictions via weighted MaxSAT"};
  app.name("concord");
  app.require_subcommand(1);

  // infer
  InputOptions infer_in;
  ModelOptions infer_model;
  std::string infer_out, infer_golds, infer_flip_score = "correctness";
  auto* infer = app.add_subcommand("infer", "Re-rank candidate answers");
  add_input_options(infer, infer_in);
  add_model_options(infer, infer_model, true);
  infer->add_option("--golds", infer_golds, "Gold file; adds a metric block and flip counts");
  infer->add_option("--flip-score", infer_flip_score, "Per-query flip score: correctness, token-f1")
      ->check(CLI::IsMember({"correctness", "token-f1"}));
  infer->add_option("--out", infer_out, "Run result file (default stdout)");

  // evaluate
  std::string eval_run, eval_golds, eval_graph, eval_out, eval_metric = "all",
                                                          eval_flip_score = "correctness";
  auto* evaluate = app.add_subcommand("evaluate", "Score a run result against gold data");
  evaluate->add_option("--run", eval_run, "Run result file")->required();
  evaluate->add_option("--golds", eval_golds, "Gold file");
  evaluate->add_option("--constraint-graph", eval_graph, "Constraint graph (for tau)");
  std::vector<std::string> metric_choices = kMetricNames;
  metric_choices.push_back("all");
  evaluate->add_option("--metric", eval_metric, "Metric to report")
      ->check(CLI::IsMember(metric_choices));
  evaluate->add_option("--flip-score", eval_flip_score, "Per-query flip score")
      ->check(CLI::IsMember({"correctness", "token-f1"}));
  evaluate->add_option("--out", eval_out, "Metrics file (default stdout)");

  // tune
  InputOptions tune_in;
  ModelOptions tune_model;
  std::string tune_golds, tune_metric = "accuracy", tune_out, tune_preset, tune_ec = "off";
  std::vector<double> tune_beta_bounds, tune_lambda_bounds;
  std::optional<int> tune_trials;
  std::optional<std::uint64_t> tune_seed;
  auto* tune_cmd = app.add_subcommand("tune", "Random search over beta, lambda and EC");
  add_input_options(tune_cmd, tune_in);
  add_model_options(tune_cmd, tune_model, false);
  tune_cmd->add_option("--golds", tune_golds, "Validation gold file");
  tune_cmd->add_option("--metric", tune_metric, "Metric to maximize")
      ->check(CLI::IsMember(kMetricNames));
  tune_cmd->add_option("--preset", tune_preset, "Search bounds preset: beliefbank, vqa, nq")
      ->check(CLI::IsMember({"beliefbank", "vqa", "nq"}));
  tune_cmd->add_option("--beta-bounds", tune_beta_bounds, "lo hi")->expected(2);
  tune_cmd->add_option("--lambda-bounds", tune_lambda_bounds, "lo hi")->expected(2);
  tune_cmd->add_option("--ec-choices", tune_ec, "off, on or both")
      ->check(CLI::IsMember({"off", "on", "both"}));
  tune_cmd->add_option("--trials", tune_trials, "Random trials")->check(CLI::PositiveNumber);
  tune_cmd->add_option("--seed", tune_seed, "RNG seed (falls back to CONCORD_SEED)");
  tune_cmd->add_option("--out", tune_out, "Best trial file (default stdout)");

  // sweep
  InputOptions sweep_in;
  ModelOptions sweep_model;
  std::string sweep_golds, sweep_metric = "accuracy", sweep_out;
  std::string sweep_betas = "0,0.25,0.5,0.75,1", sweep_lambdas = "0.5,0.75,1";
  bool sweep_ec = false;
  auto* sweep_cmd = app.add_subcommand("sweep", "Grid over beta and lambda");
  add_input_options(sweep_cmd, sweep_in);
  add_model_options(sweep_cmd, sweep_model, false);
  sweep_cmd->add_option("--golds", sweep_golds, "Gold file");
  sweep_cmd->add_option("--metric", sweep_metric, "Metric")->check(CLI::IsMember(kMetricNames));
  sweep_cmd->add_option("--beta-grid", sweep_betas, "Comma-separated beta values");
  sweep_cmd->add_option("--lambda-grid", sweep_lambdas, "Comma-separated lambda values");
  sweep_cmd->add_flag("--ec", sweep_ec, "Use the entailment-correction factor");
  sweep_cmd->add_option("--out", sweep_out, "Table file (default stdout)");

  // oracle-check
  std::size_t oracle_n = 500;
  std::optional<std::uint64_t> oracle_seed;
  auto* oracle_cmd =
      app.add_subcommand("oracle-check", "Compare the solver with exhaustive enumeration");
  oracle_cmd->add_option("--n", oracle_n, "Random instances");
  oracle_cmd->add_option("--seed", oracle_seed, "RNG seed (falls back to CONCORD_SEED)");

  // export-wcnf
  InputOptions wcnf_in;
  ModelOptions wcnf_model;
  std::string wcnf_dir;
  auto* wcnf_cmd = app.add_subcommand("export-wcnf", "Write one WCNF file per group");
  add_input_options(wcnf_cmd, wcnf_in);
  add_model_options(wcnf_cmd, wcnf_model, true);
  wcnf_cmd->add_option("--out-dir", wcnf_dir, "Output directory")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }

  try {
    if (*infer) {
      LoadedInputs in = load_inputs(infer_in, infer_model.epsilon);
      const Config config = make_config(infer_model, *in.batch);
      const Problem problem = Problem::prepare(*in.batch, in.edges, config.epsilon);
      RunReport report;
      report.result = run(problem, config, {infer_model.jobs});
      if (!infer_golds.empty()) {
        const auto golds = load_golds(infer_golds);
        report.metrics = compute_metrics(report.result.selections, golds,
                                         in.graph ? &*in.graph : nullptr);
        const auto base = baseline_selections(report.result.selections);
        report.flips = flip_report(report.result.selections, base, golds,
                                   parse_flip_score(infer_flip_score));
      }
      emit(infer_out, serialize_run_report(report), out);
      return kExitOk;
    }

    if (*evaluate) {
      const RunReport report = parse_run_report(read_text_file(eval_run));
      std::vector<GoldRecord> golds;
      if (!eval_golds.empty()) golds = load_golds(eval_golds);
      std::optional<ConstraintGraph> graph;
      if (!eval_graph.empty()) graph = parse_constraint_graph(read_text_file(eval_graph));
      if (golds.empty() && eval_metric != "tau") {
        throw Error(ErrorCode::Schema, "metric '" + eval_metric + "' needs --golds");
      }
      const auto& sel = report.result.selections;
      json doc = {{"version", kSchemaVersion}};
      if (eval_metric == "all") {
        doc["metrics"] = compute_metrics(sel, golds, graph ? &*graph : nullptr);
        const auto base = baseline_selections(sel);
        const FlipCounts flips = flip_report(sel, base, golds, parse_flip_score(eval_flip_score));
        doc["flips"] = {{"good", flips.good}, {"bad", flips.bad}};
      } else if (eval_metric == "tau") {
        if (!graph) throw Error(ErrorCode::Schema, "metric 'tau' needs --constraint-graph");
        const ConsistencyResult c = consistency_tau(sel, *graph);
        doc["metrics"] = {{"tau", c.tau},
                          {"consistency", c.consistency},
                          {"relevant", c.relevant},
                          {"violated", c.violated}};
      } else if (eval_metric == "binary-f1") {
        const BinaryF1 f1 = binary_f1(sel, golds);
        doc["metrics"] = {{"binary_f1", f1.f1}, {"precision", f1.precision}, {"recall", f1.recall}};
        if (f1.no_positives) {
          doc["warnings"] = {"no gold positives"};
          err << "warning: no gold positives; F1 reported as 0\n";
        }
      } else {
        doc["metrics"] = {{eval_metric, make_metric(eval_metric, golds, graph)(sel)}};
      }
      emit(eval_out, doc.dump(2), out);
      return kExitOk;
    }

    if (*tune_cmd) {
      LoadedInputs in = load_inputs(tune_in, tune_model.epsilon);
      const Config base = make_config(tune_model, *in.batch);
      std::vector<GoldRecord> golds;
      if (!tune_golds.empty()) golds = load_golds(tune_golds);
      const MetricFn metric = make_metric(tune_metric, golds, in.graph);
      SearchSpace space = tune_preset == "vqa" ? vqa_space()
                          : tune_preset == "nq" ? nq_space()
                                                : beliefbank_space();
      if (tune_preset.empty()) space.ec_choices = {false};
      if (tune_beta_bounds.size() == 2) space.beta = {tune_beta_bounds[0], tune_beta_bounds[1]};
      if (tune_lambda_bounds.size() == 2) {
        space.lambda = {tune_lambda_bounds[0], tune_lambda_bounds[1]};
      }
      if (tune_preset.empty() || tune_cmd->count("--ec-choices") > 0) {
        space.ec_choices = tune_ec == "both" ? std::vector<bool>{false, true}
                                             : std::vector<bool>{tune_ec == "on"};
      }
      if (tune_trials) space.trials = *tune_trials;
      space.seed = resolve_seed(tune_seed);
      const Problem problem = Problem::prepare(*in.batch, in.edges, base.epsilon);
      const TuneResult result = tune(problem, space, metric, base, {tune_model.jobs});
      emit(tune_out, serialize_trial(result, space), out);
      return kExitOk;
    }

    if (*sweep_cmd) {
      LoadedInputs in = load_inputs(sweep_in, sweep_model.epsilon);
      const Config base = make_config(sweep_model, *in.batch);
      std::vector<GoldRecord> golds;
      if (!sweep_golds.empty()) golds = load_golds(sweep_golds);
      const MetricFn metric = make_metric(sweep_metric, golds, in.graph);
      const Problem problem = Problem::prepare(*in.batch, in.edges, base.epsilon);
      const auto betas = parse_grid(sweep_betas);
      const auto lambdas = parse_grid(sweep_lambdas);
      const auto rows = sweep(problem, betas, lambdas, sweep_ec, metric, base, {sweep_model.jobs});
      std::ostringstream table;
      write_sweep_table(rows, table);
      emit(sweep_out, table.str(), out);
      return kExitOk;
    }

    if (*oracle_cmd) {
      const OracleCheckReport report = oracle_check(oracle_n, resolve_seed(oracle_seed));
      out << report.matches << '/' << report.instances << " match (" << report.seconds << " s)\n";
      for (const auto& m : report.mismatches) {
        err << "instance " << m.instance << ": solver " << m.solver_objective << " vs oracle "
            << m.oracle_objective << '\n';
      }
      return report.mismatches.empty() ? kExitOk : kExitOracleMismatch;
    }

    if (*wcnf_cmd) {
      LoadedInputs in = load_inputs(wcnf_in, wcnf_model.epsilon);
      const Config config = make_config(wcnf_model, *in.batch);
      const Problem problem = Problem::prepare(*in.batch, in.edges, config.epsilon);
      std::filesystem::create_directories(wcnf_dir);
      std::size_t index = 0;
      for (const auto& g : problem.groups) {
        const auto active = filter_relations(g.edges, config.lambda, config.relation_mask);
        const WeightedClauseSet clauses = encode(build_factor_graph(g.batch, active, config));
        std::ostringstream text;
        write_wcnf(clauses, text);
        const auto path = std::filesystem::path(wcnf_dir) / ("group_" + std::to_string(index++) + ".wcnf");
        write_text_file(path, text.str());
        out << g.group_id << ' ' << path.string() << '\n';
      }
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::HardUnsat ? kExitSolverError : kExitInputError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  return kExitInputError;
}

}  // namespace concord
