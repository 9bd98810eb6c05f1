#include "metamine/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <numeric>
#include <sstream>
#include <thread>

#include "metamine/preference.hpp"
#include "metamine/stats.hpp"

namespace metamine {

const char* to_string(Protocol protocol) {
  switch (protocol) {
    case Protocol::Lodo: return "lodo";
    case Protocol::Lowo: return "lowo";
    case Protocol::Lodwo: return "lodwo";
  }
  return "?";
}

Protocol protocol_from_string(const std::string& name) {
  if (name == "lodo") return Protocol::Lodo;
  if (name == "lowo") return Protocol::Lowo;
  if (name == "lodwo") return Protocol::Lodwo;
  throw Error("unknown protocol '" + name + "'");
}

const char* to_string(Metric metric) {
  switch (metric) {
    case Metric::Rho: return "rho";
    case Metric::T5p: return "t5p";
    case Metric::Mae: return "mae";
  }
  return "?";
}

const StrategyOutcome& FoldResult::outcome(Strategy s) const {
  for (const auto& o : outcomes) {
    if (o.strategy == s) return o;
  }
  throw Error(std::string("fold has no result for strategy ") + to_string(s));
}

bool EvaluationReport::has(Strategy s) const {
  return std::find(strategies.begin(), strategies.end(), s) != strategies.end();
}

const StrategyAggregate& EvaluationReport::aggregate(Strategy s) const {
  for (const auto& a : aggregates) {
    if (a.strategy == s) return a;
  }
  throw Error(std::string("report has no strategy ") + to_string(s));
}

std::optional<Comparison> EvaluationReport::comparison(Strategy s, Strategy baseline,
                                                       Metric metric) const {
  for (const auto& c : comparisons) {
    if (c.strategy == s && c.baseline == baseline && c.metric == metric) return c;
  }
  return std::nullopt;
}

namespace {

std::optional<ObjectiveKind> objective_of(Strategy s) {
  switch (s) {
    case Strategy::F1kNN: return ObjectiveKind::F1;
    case Strategy::F2kNN: return ObjectiveKind::F2;
    case Strategy::F3Direct: return ObjectiveKind::F3;
    case Strategy::F4Direct:
    case Strategy::F4kNN: return ObjectiveKind::F4;
    case Strategy::Default:
    case Strategy::Euclidean: return std::nullopt;
  }
  return std::nullopt;
}

Matrix drop_row(const Matrix& m, Eigen::Index row) {
  Matrix out(m.rows() - 1, m.cols());
  out.topRows(row) = m.topRows(row);
  out.bottomRows(m.rows() - row - 1) = m.bottomRows(m.rows() - row - 1);
  return out;
}

Matrix drop_col(const Matrix& m, Eigen::Index col) {
  return drop_row(m.transpose(), col).transpose();
}

DescriptorTable drop_entity(const DescriptorTable& t, std::size_t index) {
  DescriptorTable out;
  out.kind = t.kind;
  out.feature_names = t.feature_names;
  out.entity_ids = t.entity_ids;
  out.entity_ids.erase(out.entity_ids.begin() + static_cast<std::ptrdiff_t>(index));
  out.features = drop_row(t.features, static_cast<Eigen::Index>(index));
  return out;
}

std::optional<double> mean_of(const std::vector<double>& values) {
  if (values.empty()) return std::nullopt;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

std::optional<double> metric_value(const StrategyOutcome& o, Metric metric) {
  if (o.failed) return std::nullopt;
  switch (metric) {
    case Metric::Rho: return o.rho;
    case Metric::T5p: return o.t5p;
    case Metric::Mae: return o.mae;
  }
  return std::nullopt;
}

}  // namespace

bool applicable(Strategy strategy, Protocol protocol) {
  switch (protocol) {
    case Protocol::Lodo: return strategy != Strategy::F2kNN;
    case Protocol::Lowo: return strategy != Strategy::F1kNN;
    case Protocol::Lodwo:
      return strategy == Strategy::Default || strategy == Strategy::F3Direct ||
             strategy == Strategy::F4Direct;
  }
  return false;
}

std::size_t fold_count(const MetaMiningData& data, Protocol protocol) {
  const std::size_t n = data.preference.n();
  const std::size_t m = data.preference.m();
  switch (protocol) {
    case Protocol::Lodo: return n;
    case Protocol::Lowo: return m;
    case Protocol::Lodwo: return n * m;
  }
  return 0;
}

FoldSplit make_fold(const MetaMiningData& data, Protocol protocol, std::size_t fold) {
  const std::size_t m = data.preference.m();
  if (fold >= fold_count(data, protocol)) throw Error("fold index out of range");
  FoldSplit split;
  const Matrix& r = data.preference.scores;
  switch (protocol) {
    case Protocol::Lodo:
      split.held_out_datasets = {fold};
      split.x_train = drop_entity(data.x, fold);
      split.a_train = data.a;
      split.r_train = drop_row(r, static_cast<Eigen::Index>(fold));
      break;
    case Protocol::Lowo:
      split.held_out_workflows = {fold};
      split.x_train = data.x;
      split.a_train = drop_entity(data.a, fold);
      split.r_train = data.pairwise
                          ? build_preference_matrix(drop_workflow(*data.pairwise, fold)).scores
                          : drop_col(r, static_cast<Eigen::Index>(fold));
      break;
    case Protocol::Lodwo: {
      const std::size_t i = fold / m;
      const std::size_t j = fold % m;
      split.held_out_datasets = {i};
      split.held_out_workflows = {j};
      split.x_train = drop_entity(data.x, i);
      split.a_train = drop_entity(data.a, j);
      split.r_train =
          data.pairwise
              ? build_preference_matrix(drop_workflow(drop_dataset(*data.pairwise, i), j)).scores
              : drop_col(drop_row(r, static_cast<Eigen::Index>(i)), static_cast<Eigen::Index>(j));
      break;
    }
  }
  return split;
}

FittedModel train_fold_model(const MetaMiningData& data, Protocol protocol, std::size_t fold,
                             ObjectiveKind kind, const HyperParams& hyper) {
  const FoldSplit split = make_fold(data, protocol, fold);
  return fit_model(kind, hyper, split.x_train, split.a_train, split.r_train);
}

double top_k_performance(const Vector& predicted, const Vector& perf_row, int k) {
  if (predicted.size() != perf_row.size()) throw Error("top_k_performance: length mismatch");
  if (k < 1 || k > predicted.size()) throw Error("top_k_performance: k out of range");
  std::vector<std::size_t> order(static_cast<std::size_t>(predicted.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return predicted(static_cast<Eigen::Index>(a)) > predicted(static_cast<Eigen::Index>(b));
  });
  double sum = 0.0;
  for (int i = 0; i < k; ++i) sum += perf_row(static_cast<Eigen::Index>(order[static_cast<std::size_t>(i)]));
  return sum / k;
}

double binomial_sign_test(std::int64_t wins, std::int64_t total) {
  return stats::binomial_two_sided(wins, total);
}

std::optional<Comparison> compare_strategies(const EvaluationReport& report, Strategy strategy,
                                             Strategy baseline, Metric metric) {
  if (!report.has(strategy) || !report.has(baseline)) {
    throw Error(std::string("compare_strategies: strategies ") + to_string(strategy) + " and " +
                to_string(baseline) + " were not evaluated on the same folds");
  }
  Comparison c{strategy, baseline, metric, 0, 0, 1.0};
  for (const auto& fold : report.folds) {
    const auto mine = metric_value(fold.outcome(strategy), metric);
    const auto theirs = metric_value(fold.outcome(baseline), metric);
    if (!mine || !theirs) continue;
    ++c.total;
    const bool better = metric == Metric::Mae ? *mine < *theirs : *mine > *theirs;
    if (better) ++c.wins;
  }
  if (c.total == 0) return std::nullopt;
  c.p_value = binomial_sign_test(c.wins, c.total);
  return c;
}

namespace {

struct FoldContext {
  const MetaMiningData& data;
  Protocol protocol;
  const EvaluationConfig& config;
  const std::vector<Strategy>& strategies;
};

void score_outcome(StrategyOutcome& o, const Vector& truth, Protocol protocol,
                   const Vector* perf_row, int top_k) {
  if (!o.predicted.allFinite()) {
    o.failed = true;
    o.error = "non-finite prediction";
    return;
  }
  o.mae = (o.predicted - truth).cwiseAbs().mean();
  if (protocol != Protocol::Lodwo) o.rho = spearman(o.predicted, truth);
  if (protocol == Protocol::Lodo && perf_row) {
    o.t5p = top_k_performance(o.predicted, *perf_row,
                              std::min<int>(top_k, static_cast<int>(perf_row->size())));
  }
}

FoldResult run_fold(const FoldContext& ctx, std::size_t fold) {
  const FoldSplit split = make_fold(ctx.data, ctx.protocol, fold);
  const Matrix& r = ctx.data.preference.scores;
  FoldResult result;
  result.index = fold;

  const bool hold_dataset = !split.held_out_datasets.empty();
  const bool hold_workflow = !split.held_out_workflows.empty();
  const std::size_t di = hold_dataset ? split.held_out_datasets.front() : 0;
  const std::size_t wj = hold_workflow ? split.held_out_workflows.front() : 0;
  if (hold_dataset) result.held_out.push_back(ctx.data.x.entity_ids[di]);
  if (hold_workflow) result.held_out.push_back(ctx.data.a.entity_ids[wj]);

  Vector perf_row;
  switch (ctx.protocol) {
    case Protocol::Lodo:
      result.truth = r.row(static_cast<Eigen::Index>(di)).transpose();
      perf_row = ctx.data.performance.values.row(static_cast<Eigen::Index>(di)).transpose();
      break;
    case Protocol::Lowo:
      result.truth = r.col(static_cast<Eigen::Index>(wj));
      break;
    case Protocol::Lodwo:
      result.truth = Vector::Constant(1, r(static_cast<Eigen::Index>(di), static_cast<Eigen::Index>(wj)));
      break;
  }
  const Vector x_query = ctx.data.x.features.row(static_cast<Eigen::Index>(di)).transpose();
  const Vector a_query = ctx.data.a.features.row(static_cast<Eigen::Index>(wj)).transpose();

  // One model per objective per fold, shared between strategies.
  std::optional<FittedModel> models[4];
  std::optional<std::string> model_errors[4];
  auto model_for = [&](ObjectiveKind kind) -> const FittedModel& {
    const auto slot = static_cast<std::size_t>(kind);
    if (model_errors[slot]) throw Error(*model_errors[slot]);
    if (!models[slot]) {
      try {
        models[slot] = fit_model(kind, ctx.config.hyper.for_objective(kind), split.x_train,
                                 split.a_train, split.r_train);
      } catch (const std::exception& e) {
        model_errors[slot] = e.what();
        throw;
      }
    }
    return *models[slot];
  };

  for (Strategy s : ctx.strategies) {
    StrategyOutcome o;
    o.strategy = s;
    try {
      const Task task = ctx.protocol == Protocol::Lodo   ? Task::WorkflowPrefs
                        : ctx.protocol == Protocol::Lowo ? Task::DatasetPrefs
                                                         : Task::PairScore;
      if (s == Strategy::Default) {
        o.predicted = default_strategy(task, split.r_train).values;
      } else if (s == Strategy::Euclidean) {
        const DescriptorTable& train = task == Task::WorkflowPrefs ? split.x_train : split.a_train;
        const auto [train_std, record] = standardize(train);
        const Vector query = record.apply(task == Task::WorkflowPrefs ? x_query : a_query);
        auto pred = euclidean_strategy(query, train_std.features, split.r_train,
                                       ctx.config.ec_neighbors, task);
        o.predicted = std::move(pred.values);
      } else {
        const ObjectiveKind kind = *objective_of(s);
        const FittedModel& model = model_for(kind);
        const ModelParams& p = model.params;
        o.termination = model.trace.termination;
        o.trace = model.trace;
        const Vector xq = p.x_standardization.apply(x_query);
        const Vector aq = p.a_standardization.apply(a_query);
        const int neighbors = p.hyper.n_neighbors;
        const bool knn = s == Strategy::F1kNN || s == Strategy::F2kNN || s == Strategy::F4kNN;
        if (task == Task::WorkflowPrefs) {
          const Matrix a_std = p.a_standardization.apply(split.a_train.features);
          if (knn) {
            const Matrix x_std = p.x_standardization.apply(split.x_train.features);
            auto pred = knn_predict_workflow_prefs(xq, x_std, split.r_train, p, neighbors);
            o.nonpositive_fallback = pred.nonpositive_fallback;
            o.predicted = std::move(pred.values);
          } else {
            o.predicted = predict_workflow_scores(xq, a_std, p);
          }
        } else if (task == Task::DatasetPrefs) {
          const Matrix x_std = p.x_standardization.apply(split.x_train.features);
          if (knn) {
            const Matrix a_std = p.a_standardization.apply(split.a_train.features);
            auto pred = knn_predict_dataset_prefs(aq, a_std, split.r_train, p, neighbors);
            o.nonpositive_fallback = pred.nonpositive_fallback;
            o.predicted = std::move(pred.values);
          } else {
            o.predicted = predict_dataset_scores(aq, x_std, p);
          }
        } else {
          o.predicted = Vector::Constant(1, predict_pair(xq, aq, p));
        }
      }
      score_outcome(o, result.truth, ctx.protocol, perf_row.size() ? &perf_row : nullptr,
                    ctx.config.top_k);
    } catch (const std::exception& e) {
      o.failed = true;
      o.error = e.what();
    }
    result.outcomes.push_back(std::move(o));
  }
  return result;
}

}  // namespace

EvaluationReport run_protocol(const MetaMiningData& data, Protocol protocol,
                              const EvaluationConfig& config) {
  const std::size_t n = data.preference.n();
  const std::size_t m = data.preference.m();
  if ((protocol == Protocol::Lodo || protocol == Protocol::Lodwo) && n < 3) {
    throw Error("protocol needs at least 3 datasets");
  }
  if ((protocol == Protocol::Lowo || protocol == Protocol::Lodwo) && m < 3) {
    throw Error("protocol needs at least 3 workflows");
  }
  if (data.x.rows() != n || data.a.rows() != m || data.x.entity_ids != data.preference.dataset_ids ||
      data.a.entity_ids != data.preference.workflow_ids) {
    throw Error("descriptor tables are not aligned with the preference matrix");
  }
  if (data.pairwise) {
    bool aligned = data.pairwise->workflow_ids == data.a.entity_ids &&
                   data.pairwise->datasets.size() == n;
    for (std::size_t i = 0; aligned && i < n; ++i) {
      aligned = data.pairwise->datasets[i].dataset_id == data.x.entity_ids[i];
    }
    if (!aligned) throw Error("pairwise outcomes are not aligned with the descriptor tables");
  }
  if (protocol == Protocol::Lodo &&
      (data.performance.values.rows() != static_cast<Eigen::Index>(n) ||
       data.performance.values.cols() != static_cast<Eigen::Index>(m))) {
    throw Error("performance matrix is not aligned with the preference matrix");
  }

  EvaluationReport report;
  report.protocol = protocol;
  for (Strategy s : config.strategies) {
    if (report.has(s)) continue;
    if (!applicable(s, protocol)) {
      if (s == Strategy::Euclidean) {
        report.notices.push_back(
            "ec excluded: the Euclidean baseline compares objects of the same type and is no "
            "longer applicable to dataset-workflow pairs");
      } else {
        report.notices.push_back(std::string(to_string(s)) + " excluded: not applicable to " +
                                 to_string(protocol));
      }
      continue;
    }
    report.strategies.push_back(s);
  }

  const std::size_t folds = fold_count(data, protocol);
  report.folds.resize(folds);
  const FoldContext ctx{data, protocol, config, report.strategies};
  const auto jobs = static_cast<std::size_t>(std::max(1, config.jobs));
  if (jobs == 1) {
    for (std::size_t f = 0; f < folds; ++f) report.folds[f] = run_fold(ctx, f);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < std::min(jobs, folds); ++w) {
      workers.emplace_back([&] {
        for (std::size_t f = next++; f < folds; f = next++) report.folds[f] = run_fold(ctx, f);
      });
    }
    for (auto& t : workers) t.join();
  }

  for (Strategy s : report.strategies) {
    StrategyAggregate agg;
    agg.strategy = s;
    std::vector<double> rho, t5p, mae;
    for (const auto& fold : report.folds) {
      const auto& o = fold.outcome(s);
      if (o.failed) {
        ++agg.folds_failed;
        continue;
      }
      ++agg.folds_evaluated;
      if (o.nonpositive_fallback) ++agg.fallback_folds;
      if (o.rho) rho.push_back(*o.rho);
      if (o.t5p) t5p.push_back(*o.t5p);
      if (o.mae) mae.push_back(*o.mae);
    }
    agg.mean_rho = mean_of(rho);
    agg.mean_t5p = mean_of(t5p);
    agg.mean_mae = mean_of(mae);
    if (agg.folds_failed) {
      report.notices.push_back(std::string(to_string(s)) + ": " + std::to_string(agg.folds_failed) +
                               " fold(s) failed and were excluded from aggregates");
    }
    if (agg.fallback_folds) {
      report.notices.push_back(std::string(to_string(s)) + ": " +
                               std::to_string(agg.fallback_folds) +
                               " fold(s) had only nonpositive similarities; uniform weights used");
    }
    report.aggregates.push_back(agg);
  }

  for (Strategy baseline : {Strategy::Default, Strategy::Euclidean}) {
    if (!report.has(baseline)) continue;
    for (Strategy s : report.strategies) {
      if (s == baseline || s == Strategy::Default) continue;
      for (Metric metric : {Metric::Rho, Metric::T5p, Metric::Mae}) {
        if (auto c = compare_strategies(report, s, baseline, metric)) report.comparisons.push_back(*c);
      }
    }
  }
  return report;
}

namespace {

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json vector_json(const Vector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

std::string fmt(const std::optional<double>& v, int precision) {
  if (!v) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, *v);
  return buf;
}

std::string fmt_p(double p) {
  char buf[64];
  if (p >= 0.001 || p == 0.0) {
    std::snprintf(buf, sizeof(buf), "%.3f", p);
  } else {
    std::snprintf(buf, sizeof(buf), "%.1e", p);
  }
  return buf;
}

}  // namespace

nlohmann::json report_to_json(const EvaluationReport& report) {
  using nlohmann::json;
  json j;
  j["protocol"] = to_string(report.protocol);
  j["fold_count"] = report.folds.size();
  json strategies = json::array();
  for (Strategy s : report.strategies) strategies.push_back(to_string(s));
  j["strategies"] = strategies;
  j["notices"] = report.notices;

  json aggregates = json::object();
  for (const auto& a : report.aggregates) {
    aggregates[to_string(a.strategy)] = {{"rho", optional_json(a.mean_rho)},
                                         {"t5p", optional_json(a.mean_t5p)},
                                         {"mae", optional_json(a.mean_mae)},
                                         {"folds_evaluated", a.folds_evaluated},
                                         {"folds_failed", a.folds_failed},
                                         {"fallback_folds", a.fallback_folds}};
  }
  j["aggregates"] = aggregates;

  json comparisons = json::array();
  for (const auto& c : report.comparisons) {
    comparisons.push_back({{"strategy", to_string(c.strategy)},
                           {"baseline", to_string(c.baseline)},
                           {"metric", to_string(c.metric)},
                           {"wins", c.wins},
                           {"total", c.total},
                           {"p", c.p_value}});
  }
  j["comparisons"] = comparisons;

  json folds = json::array();
  for (const auto& fold : report.folds) {
    json f;
    f["index"] = fold.index;
    f["held_out"] = fold.held_out;
    f["truth"] = vector_json(fold.truth);
    json outcomes = json::object();
    for (const auto& o : fold.outcomes) {
      json oj{{"predicted", vector_json(o.predicted)},
              {"rho", optional_json(o.rho)},
              {"t5p", optional_json(o.t5p)},
              {"mae", optional_json(o.mae)},
              {"failed", o.failed},
              {"nonpositive_fallback", o.nonpositive_fallback}};
      if (o.failed) oj["error"] = o.error;
      if (o.termination) oj["termination"] = to_string(*o.termination);
      outcomes[to_string(o.strategy)] = std::move(oj);
    }
    f["outcomes"] = std::move(outcomes);
    folds.push_back(std::move(f));
  }
  j["folds"] = folds;
  return j;
}

std::string report_to_table(const EvaluationReport& report) {
  std::vector<Metric> metrics;
  switch (report.protocol) {
    case Protocol::Lodo: metrics = {Metric::Rho, Metric::T5p, Metric::Mae}; break;
    case Protocol::Lowo: metrics = {Metric::Rho, Metric::Mae}; break;
    case Protocol::Lodwo: metrics = {Metric::Mae}; break;
  }
  constexpr int kLabel = 10;
  constexpr int kCell = 20;
  std::ostringstream os;
  auto cell = [&](const std::string& s, int width) {
    os << s;
    for (int i = static_cast<int>(s.size()); i < width; ++i) os << ' ';
  };
  os << "protocol: " << to_string(report.protocol) << "  folds: " << report.folds.size() << "\n";
  cell("", kLabel);
  for (Metric m : metrics) cell(m == Metric::T5p ? "t5p" : to_string(m), kCell);
  os << "\n";

  auto delta_row = [&](Strategy s, Strategy baseline, const char* label) {
    if (!report.has(baseline) || s == baseline) return;
    cell(label, kLabel);
    for (Metric m : metrics) {
      const auto c = report.comparison(s, baseline, m);
      cell(c ? std::to_string(c->wins) + "/" + std::to_string(c->total) + " p=" + fmt_p(c->p_value)
             : "NA",
           kCell);
    }
    os << "\n";
  };

  for (const auto& agg : report.aggregates) {
    cell(to_string(agg.strategy), kLabel);
    for (Metric m : metrics) {
      const auto& v = m == Metric::Rho ? agg.mean_rho : m == Metric::T5p ? agg.mean_t5p : agg.mean_mae;
      cell(fmt(v, m == Metric::T5p ? 4 : 3), kCell);
    }
    os << "\n";
    if (agg.strategy == Strategy::Default) continue;
    delta_row(agg.strategy, Strategy::Default, "delta");
    delta_row(agg.strategy, Strategy::Euclidean, "delta_EC");
  }
  for (const auto& notice : report.notices) os << "note: " << notice << "\n";
  return os.str();
}

}  // namespace metamine
