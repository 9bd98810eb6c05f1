#include "metamine/cli.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "metamine/bundle.hpp"
#include "metamine/csv_io.hpp"
#include "metamine/evaluation.hpp"
#include "metamine/model_io.hpp"
#include "metamine/recommend.hpp"
#include "metamine/synth.hpp"

namespace metamine::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Usage or input problems detected by the CLI itself (exit code 1).
class UsageError : public Error {
 public:
  using Error::Error;
};

struct HyperFlags {
  std::optional<double> mu1, mu2, alpha, beta, gamma, rel_tol;
  std::optional<int> neighbors, max_iters, t;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> init;
  std::optional<std::string> preset;
  std::optional<std::string> config;

  void attach(CLI::App& app) {
    app.add_option("--mu1", mu1, "Regularization weight on U");
    app.add_option("--mu2", mu2, "Regularization weight on V");
    app.add_option("--alpha", alpha, "F4 weight of the dataset-metric term");
    app.add_option("--beta", beta, "F4 weight of the workflow-metric term");
    app.add_option("--gamma", gamma, "F4 weight of the heterogeneous term");
    app.add_option("--neighbors", neighbors, "Neighbours for kNN prediction");
    app.add_option("--max-iters", max_iters, "Maximum gradient steps");
    app.add_option("--rel-tol", rel_tol, "Relative-decrease stopping tolerance");
    app.add_option("--t", t, "Projection dimensionality (default min(rank X, rank A))");
    app.add_option("--seed", seed, "Initialization seed");
    app.add_option("--init", init, "Initialization: gaussian | svd");
    app.add_option("--preset", preset, "task1 | task2 | task3");
    app.add_option("--config", config, "JSON config file (flags take precedence)");
  }

  void apply(HyperParams& h) const {
    if (mu1) h.mu1 = *mu1;
    if (mu2) h.mu2 = *mu2;
    if (alpha) h.alpha = *alpha;
    if (beta) h.beta = *beta;
    if (gamma) h.gamma = *gamma;
    if (rel_tol) h.rel_tol = *rel_tol;
    if (neighbors) h.n_neighbors = *neighbors;
    if (max_iters) h.max_iters = *max_iters;
    if (t) h.t = *t;
    if (seed) h.seed = *seed;
    if (init) h.init = init_from_string(*init);
    // Re-run range checks.
    h = hyper_from_json(json::object(), h);
  }
};

json read_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io::FormatError(path.string() + ": cannot open file");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw io::FormatError(path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io::FormatError(path.string() + ": cannot write file");
  out << text;
}

void write_json_file(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

fs::path sibling(const fs::path& path, const std::string& suffix) {
  fs::path out = path;
  out.replace_extension();
  out += suffix;
  return out;
}

/// Built-in defaults < preset < config file < flags, for all four objectives.
ObjectiveSettings resolve_settings(const HyperFlags& flags) {
  json config = flags.config ? read_json_file(*flags.config) : json::object();
  std::optional<std::string> preset = flags.preset;
  if (!preset && config.contains("preset")) preset = config.at("preset").get<std::string>();
  ObjectiveSettings settings = preset ? presets::by_name(*preset) : ObjectiveSettings{};
  for (ObjectiveKind kind : {ObjectiveKind::F1, ObjectiveKind::F2, ObjectiveKind::F3, ObjectiveKind::F4}) {
    HyperParams& h = const_cast<HyperParams&>(settings.for_objective(kind));
    if (config.contains("hyper")) h = hyper_from_json(config.at("hyper"), h);
    if (config.contains(to_string(kind))) h = hyper_from_json(config.at(to_string(kind)), h);
    flags.apply(h);
  }
  return settings;
}

json settings_json(const ObjectiveSettings& s) {
  return json{{"f1", to_json(s.f1)}, {"f2", to_json(s.f2)}, {"f3", to_json(s.f3)}, {"f4", to_json(s.f4)}};
}

json trace_json(const TrainTrace& trace) {
  return json{{"objective", trace.objective},
              {"step_sizes", trace.step_sizes},
              {"gradient_norms", trace.gradient_norms},
              {"termination", to_string(trace.termination)}};
}

std::vector<Strategy> parse_strategies(const std::string& list) {
  std::vector<Strategy> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(strategy_from_string(item));
  }
  if (out.empty()) throw UsageError("no strategies given");
  return out;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string out;
  std::optional<std::string> preset;
  std::optional<std::string> config;
  std::optional<std::string> mode;
  std::optional<int> n, m, d, l, latent_t, instances;
  std::optional<double> sigma;
  std::optional<std::uint64_t> seed;
};

synth::SynthConfig synth_preset(const std::string& name) {
  synth::SynthConfig c;
  if (name == "exact") {
    c.mode = synth::Mode::ExactBilinear;
  } else if (name == "noisy") {
    c.mode = synth::Mode::NoisyBilinear;
    c.n = 40;
    c.m = 15;
    c.noise_sigma = 4.0;
  } else if (name == "outcome") {
    c.mode = synth::Mode::OutcomeLevel;
    c.noise_sigma = 1.0;
    c.instances = 200;
  } else {
    throw UsageError("unknown synth preset '" + name + "' (exact | noisy | outcome)");
  }
  return c;
}

int cmd_synth(const SynthArgs& args, std::ostream& out) {
  synth::SynthConfig c = args.preset ? synth_preset(*args.preset) : synth::SynthConfig{};
  if (args.config) c = synth_config_from_json(read_json_file(*args.config), c);
  if (args.mode) c.mode = synth::mode_from_string(*args.mode);
  if (args.n) c.n = *args.n;
  if (args.m) c.m = *args.m;
  if (args.d) c.d = *args.d;
  if (args.l) c.l = *args.l;
  if (args.latent_t) c.latent_t = *args.latent_t;
  if (args.instances) c.instances = *args.instances;
  if (args.sigma) c.noise_sigma = *args.sigma;
  if (args.seed) c.seed = *args.seed;
  synth::check(c);
  const auto problem = synth::generate(c);
  const SynthFiles files = write_synth(args.out, problem, c);
  out << "wrote " << synth::to_string(c.mode) << " problem (" << c.n << " datasets, " << c.m
      << " workflows) to " << args.out << "\n";
  if (files.outcomes) out << "outcomes: " << files.outcomes->string() << "\n";
  return kSuccess;
}

// ---------------------------------------------------------------- ingest

struct IngestArgs {
  std::string x, a, performance, out;
  std::optional<std::string> outcomes, significance, scores;
  double tie_threshold = 0.01;
  double alpha_level = 0.05;
  bool exact_mcnemar = false;
};

int cmd_ingest(const IngestArgs& args, std::ostream& out) {
  IngestOptions options;
  options.x_path = args.x;
  options.a_path = args.a;
  options.performance_path = args.performance;
  options.tie_threshold = args.tie_threshold;
  options.mcnemar.alpha_level = args.alpha_level;
  if (args.exact_mcnemar) options.mcnemar.variant = McNemarVariant::ExactSmallSample;
  const int sources = (args.outcomes ? 1 : 0) + (args.significance ? 1 : 0) + (args.scores ? 1 : 0);
  if (sources > 1) throw UsageError("give at most one of --outcomes, --significance, --scores");
  if (args.outcomes) {
    options.source = PreferenceSource::Outcomes;
    options.source_path = *args.outcomes;
  } else if (args.significance) {
    options.source = PreferenceSource::Significance;
    options.source_path = *args.significance;
  } else if (args.scores) {
    options.source = PreferenceSource::Scores;
    options.source_path = *args.scores;
  }
  Bundle bundle = ingest(options);
  write_bundle(args.out, bundle);
  out << "bundle written to " << args.out << " (" << bundle.data.x.rows() << " datasets, "
      << bundle.data.a.rows() << " workflows, preferences from " << to_string(bundle.source)
      << ")\n";
  return kSuccess;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string bundle, out;
  std::string objective = "f4";
  HyperFlags hyper;
};

int cmd_train(const TrainArgs& args, std::ostream& out, std::ostream& err) {
  const Bundle bundle = load_bundle(args.bundle);
  const ObjectiveKind kind = objective_from_string(args.objective);
  const ObjectiveSettings settings = resolve_settings(args.hyper);
  const HyperParams& hyper = settings.for_objective(kind);
  if (kind == ObjectiveKind::F4 && hyper.alpha + hyper.beta + hyper.gamma <= 0.0) {
    throw UsageError("F4 needs alpha + beta + gamma > 0");
  }

  const fs::path model_path = args.out;
  write_json_file(sibling(model_path, ".config.json"),
                  json{{"subcommand", "train"},
                       {"bundle", args.bundle},
                       {"objective", to_string(kind)},
                       {"hyper", to_json(hyper)},
                       {"seed", hyper.seed},
                       {"outputs", {model_path.string(), sibling(model_path, ".trace.json").string()}}});

  FittedModel model;
  try {
    model = fit_model(kind, hyper, bundle.data.x, bundle.data.a, bundle.data.preference.scores);
  } catch (const std::exception& e) {
    err << "training failed: " << e.what() << "\n";
    return kRuntimeFailure;
  }
  const TraceSummary summary = summarize(model.trace);
  if (model.trace.objective.empty() || !std::isfinite(summary.final_objective)) {
    err << "training produced a non-finite objective\n" << trace_json(model.trace).dump(2) << "\n";
    return kRuntimeFailure;
  }
  if (model_path.has_parent_path()) fs::create_directories(model_path.parent_path());
  save_model(model_path, model.params, summary);
  write_json_file(sibling(model_path, ".trace.json"), trace_json(model.trace));
  out << "objective " << to_string(kind) << " t=" << model.params.t << ": initial "
      << io::format_double(summary.initial_objective) << ", final "
      << io::format_double(summary.final_objective) << " after " << summary.iterations
      << " iterations (" << to_string(summary.termination) << ")\n";
  return kSuccess;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string bundle, out;
  std::string protocol = "lodo";
  std::string strategies = "def,ec,f1,f2,f3,f4";
  std::string format = "table";
  int jobs = 1;
  int ec_neighbors = 5;
  int top_k = 5;
  HyperFlags hyper;
};

int cmd_evaluate(const EvaluateArgs& args, std::ostream& out) {
  const Bundle bundle = load_bundle(args.bundle);
  EvaluationConfig config;
  config.strategies = parse_strategies(args.strategies);
  config.hyper = resolve_settings(args.hyper);
  config.jobs = args.jobs;
  config.ec_neighbors = args.ec_neighbors;
  config.top_k = args.top_k;
  if (args.format != "json" && args.format != "table") throw UsageError("--format must be json or table");
  const Protocol protocol = protocol_from_string(args.protocol);

  std::vector<std::string> names;
  for (Strategy s : config.strategies) names.push_back(to_string(s));
  const fs::path prefix = args.out;
  write_json_file(sibling(prefix, ".config.json"),
                  json{{"subcommand", "evaluate"},
                       {"bundle", args.bundle},
                       {"protocol", to_string(protocol)},
                       {"strategies", names},
                       {"hyper", settings_json(config.hyper)},
                       {"ec_neighbors", config.ec_neighbors},
                       {"top_k", config.top_k},
                       {"jobs", config.jobs},
                       {"format", args.format},
                       {"outputs", {sibling(prefix, ".json").string(), sibling(prefix, ".txt").string()}}});

  const EvaluationReport report = run_protocol(bundle.data, protocol, config);
  const std::string table = report_to_table(report);
  const json j = report_to_json(report);
  write_json_file(sibling(prefix, ".json"), j);
  write_text(sibling(prefix, ".txt"), table);
  out << (args.format == "json" ? j.dump(2) + "\n" : table);

  bool any_evaluated = false;
  for (const auto& agg : report.aggregates) any_evaluated = any_evaluated || agg.folds_evaluated > 0;
  return any_evaluated ? kSuccess : kRuntimeFailure;
}

// ---------------------------------------------------------------- predict

struct PredictArgs {
  std::string model, bundle, queries, out;
  std::optional<std::string> workflow_queries;
  std::string task = "workflow-prefs";
  std::string method = "auto";
  std::optional<int> neighbors;
};

int cmd_predict(const PredictArgs& args, std::ostream& out) {
  const LoadedModel loaded = load_model(args.model);
  const ModelParams& p = loaded.params;
  const Bundle bundle = load_bundle(args.bundle);
  const Task task = task_from_string(args.task);
  const ObjectiveKind kind = p.objective;

  const bool can_direct = kind == ObjectiveKind::F3 || kind == ObjectiveKind::F4;
  const bool can_knn_x = kind == ObjectiveKind::F1 || kind == ObjectiveKind::F4;
  const bool can_knn_a = kind == ObjectiveKind::F2 || kind == ObjectiveKind::F4;
  bool use_knn = false;
  if (task == Task::PairScore) {
    if (!can_direct) {
      throw UsageError(std::string("a homogeneous ") + to_string(kind) +
                       " model cannot score dataset-workflow pairs");
    }
    if (!args.workflow_queries) throw UsageError("pair prediction needs --workflow-queries");
  } else {
    const bool can_knn = task == Task::WorkflowPrefs ? can_knn_x : can_knn_a;
    if (args.method == "direct") {
      if (!can_direct) throw UsageError(std::string(to_string(kind)) + " model has no direct scores");
    } else if (args.method == "knn") {
      if (!can_knn) throw UsageError(std::string(to_string(kind)) + " model has no metric for this task");
      use_knn = true;
    } else if (args.method == "auto") {
      use_knn = !can_direct;
      if (use_knn && !can_knn) {
        throw UsageError(std::string(to_string(kind)) + " model cannot predict " + to_string(task));
      }
    } else {
      throw UsageError("--method must be auto, direct or knn");
    }
  }

  const EntityKind query_kind = task == Task::DatasetPrefs ? EntityKind::Workflow : EntityKind::Dataset;
  const DescriptorTable queries = io::read_descriptors(args.queries, query_kind);
  const StandardizationRecord& q_record =
      query_kind == EntityKind::Dataset ? p.x_standardization : p.a_standardization;
  if (queries.feature_names != q_record.feature_names) {
    throw UsageError(args.queries + ": feature names do not match the model");
  }
  ValidationReport report = validate_descriptors(queries, "queries");
  if (!report.ok()) throw ValidationFailed(report);
  const Matrix q_std = q_record.apply(queries.features);

  const MetaMiningData& data = bundle.data;
  if (data.x.feature_names != p.x_standardization.feature_names ||
      data.a.feature_names != p.a_standardization.feature_names) {
    throw UsageError("bundle descriptors do not match the model's features");
  }
  const Matrix x_std = p.x_standardization.apply(data.x.features);
  const Matrix a_std = p.a_standardization.apply(data.a.features);
  const int neighbors = args.neighbors.value_or(p.hyper.n_neighbors);

  io::CsvTable table;
  std::string strategy_tag;
  if (task == Task::PairScore) {
    const DescriptorTable wf = io::read_descriptors(*args.workflow_queries, EntityKind::Workflow);
    if (wf.feature_names != p.a_standardization.feature_names) {
      throw UsageError(*args.workflow_queries + ": feature names do not match the model");
    }
    ValidationReport wf_report = validate_descriptors(wf, "workflow queries");
    if (!wf_report.ok()) throw ValidationFailed(wf_report);
    const Matrix wf_std = p.a_standardization.apply(wf.features);
    strategy_tag = kind == ObjectiveKind::F3 ? "f3" : "f4";
    table.header = {"dataset_id", "workflow_id", "score", "strategy"};
    for (Eigen::Index i = 0; i < q_std.rows(); ++i) {
      for (Eigen::Index j = 0; j < wf_std.rows(); ++j) {
        const double score = predict_pair(q_std.row(i).transpose(), wf_std.row(j).transpose(), p);
        table.rows.push_back({queries.entity_ids[static_cast<std::size_t>(i)],
                              wf.entity_ids[static_cast<std::size_t>(j)], io::format_double(score),
                              strategy_tag});
      }
    }
  } else {
    const bool workflows = task == Task::WorkflowPrefs;
    const std::vector<std::string>& targets = workflows ? data.a.entity_ids : data.x.entity_ids;
    if (use_knn) {
      strategy_tag = kind == ObjectiveKind::F4 ? "f4-knn" : workflows ? "f1-knn" : "f2-knn";
    } else {
      strategy_tag = kind == ObjectiveKind::F3 ? "f3" : "f4";
    }
    table.header = {"query_id", "entity_id", "score", "rank", "strategy", "flags"};
    for (Eigen::Index i = 0; i < q_std.rows(); ++i) {
      const Vector q = q_std.row(i).transpose();
      Vector scores;
      std::string flags;
      if (use_knn) {
        auto pred = workflows ? knn_predict_workflow_prefs(q, x_std, data.preference.scores, p, neighbors)
                              : knn_predict_dataset_prefs(q, a_std, data.preference.scores, p, neighbors);
        scores = pred.values;
        if (pred.nonpositive_fallback) flags = "nonpositive-similarity-fallback";
      } else {
        scores = workflows ? predict_workflow_scores(q, a_std, p) : predict_dataset_scores(q, x_std, p);
      }
      std::vector<std::size_t> order(static_cast<std::size_t>(scores.size()));
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores(static_cast<Eigen::Index>(a)) > scores(static_cast<Eigen::Index>(b));
      });
      for (std::size_t rank = 0; rank < order.size(); ++rank) {
        const std::size_t e = order[rank];
        table.rows.push_back({queries.entity_ids[static_cast<std::size_t>(i)], targets[e],
                              io::format_double(scores(static_cast<Eigen::Index>(e))),
                              std::to_string(rank + 1), strategy_tag, flags});
      }
    }
  }

  const fs::path out_path = args.out;
  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
  io::write_csv(out_path, table);
  write_json_file(sibling(out_path, ".config.json"),
                  json{{"subcommand", "predict"},
                       {"model", args.model},
                       {"bundle", args.bundle},
                       {"queries", args.queries},
                       {"task", to_string(task)},
                       {"method", use_knn ? "knn" : task == Task::PairScore ? "direct" : "direct"},
                       {"neighbors", neighbors},
                       {"strategy", strategy_tag},
                       {"outputs", {out_path.string()}}});
  out << "wrote " << table.rows.size() << " predictions (" << strategy_tag << ") to "
      << out_path.string() << "\n";
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"metamine: metric-learning hybrid recommendation for meta-mining"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic meta-mining problem");
  synth_cmd->add_option("--out", synth_args.out, "Output directory")->required();
  synth_cmd->add_option("--preset", synth_args.preset, "exact | noisy | outcome");
  synth_cmd->add_option("--config", synth_args.config, "JSON synth config");
  synth_cmd->add_option("--mode", synth_args.mode, "exact | noisy | outcome");
  synth_cmd->add_option("--n", synth_args.n, "Datasets");
  synth_cmd->add_option("--m", synth_args.m, "Workflows");
  synth_cmd->add_option("--d", synth_args.d, "Dataset features");
  synth_cmd->add_option("--l", synth_args.l, "Workflow features");
  synth_cmd->add_option("--latent-t", synth_args.latent_t, "Latent rank");
  synth_cmd->add_option("--sigma", synth_args.sigma, "Noise standard deviation");
  synth_cmd->add_option("--instances", synth_args.instances, "Instances per dataset (outcome mode)");
  synth_cmd->add_option("--seed", synth_args.seed, "Random seed");

  IngestArgs ingest_args;
  auto* ingest_cmd = app.add_subcommand("ingest", "Validate inputs and write a bundle");
  ingest_cmd->add_option("--x", ingest_args.x, "Dataset descriptor CSV")->required();
  ingest_cmd->add_option("--a", ingest_args.a, "Workflow descriptor CSV")->required();
  ingest_cmd->add_option("--performance", ingest_args.performance, "Long-format performance CSV")
      ->required();
  ingest_cmd->add_option("--outcomes", ingest_args.outcomes, "Directory of per-dataset outcome CSVs");
  ingest_cmd->add_option("--significance", ingest_args.significance, "Long-format significance CSV");
  ingest_cmd->add_option("--scores", ingest_args.scores, "Long-format precomputed preference scores");
  ingest_cmd->add_option("--tie-threshold", ingest_args.tie_threshold, "Tie threshold for performance comparisons");
  ingest_cmd->add_option("--mcnemar-alpha", ingest_args.alpha_level, "McNemar significance level");
  ingest_cmd->add_flag("--exact-mcnemar", ingest_args.exact_mcnemar,
                       "Exact binomial McNemar when fewer than 25 discordant pairs");
  ingest_cmd->add_option("--out", ingest_args.out, "Bundle directory")->required();

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Learn a metric and write a model file");
  train_cmd->add_option("--bundle", train_args.bundle, "Bundle directory")->required();
  train_cmd->add_option("--objective", train_args.objective, "f1 | f2 | f3 | f4");
  train_cmd->add_option("--out", train_args.out, "Model file")->required();
  train_args.hyper.attach(*train_cmd);

  EvaluateArgs eval_args;
  auto* eval_cmd = app.add_subcommand("evaluate", "Run a leave-one-out protocol");
  eval_cmd->add_option("--bundle", eval_args.bundle, "Bundle directory")->required();
  eval_cmd->add_option("--protocol", eval_args.protocol, "lodo | lowo | lodwo");
  eval_cmd->add_option("--strategies", eval_args.strategies,
                       "Comma list of def, ec, f1, f2, f3, f4, f4-knn");
  eval_cmd->add_option("--out", eval_args.out, "Report prefix (.json and .txt are written)")->required();
  eval_cmd->add_option("--format", eval_args.format, "Console output: json | table");
  eval_cmd->add_option("--jobs", eval_args.jobs, "Parallel folds");
  eval_cmd->add_option("--ec-neighbors", eval_args.ec_neighbors, "Neighbours for the EC baseline");
  eval_cmd->add_option("--top-k", eval_args.top_k, "k for the top-k performance metric");
  eval_args.hyper.attach(*eval_cmd);

  PredictArgs predict_args;
  auto* predict_cmd = app.add_subcommand("predict", "Cold-start predictions for unseen entities");
  predict_cmd->add_option("--model", predict_args.model, "Model file")->required();
  predict_cmd->add_option("--bundle", predict_args.bundle, "Training bundle")->required();
  predict_cmd->add_option("--queries", predict_args.queries,
                          "Descriptor CSV of unseen datasets (or workflows for dataset-prefs)")
      ->required();
  predict_cmd->add_option("--workflow-queries", predict_args.workflow_queries,
                          "Workflow descriptor CSV for pair scoring");
  predict_cmd->add_option("--task", predict_args.task, "workflow-prefs | dataset-prefs | pair");
  predict_cmd->add_option("--method", predict_args.method, "auto | direct | knn");
  predict_cmd->add_option("--neighbors", predict_args.neighbors, "Neighbours for kNN prediction");
  predict_cmd->add_option("--out", predict_args.out, "Prediction CSV")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kValidationError;
  }

  try {
    if (*synth_cmd) return cmd_synth(synth_args, out);
    if (*ingest_cmd) return cmd_ingest(ingest_args, out);
    if (*train_cmd) return cmd_train(train_args, out, err);
    if (*eval_cmd) return cmd_evaluate(eval_args, out);
    if (*predict_cmd) return cmd_predict(predict_args, out);
  } catch (const ValidationFailed& e) {
    err << e.what();
    return kValidationError;
  } catch (const io::FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kValidationError;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kValidationError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeFailure;
  }
  return kRuntimeFailure;
}

}  // namespace metamine::cli
