#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "metamine/bundle.hpp"
#include "metamine/evaluation.hpp"
#include "metamine/stats.hpp"
#include "support.hpp"

using namespace metamine;

namespace {

MetaMiningData small_problem(std::uint64_t seed, synth::Mode mode = synth::Mode::NoisyBilinear) {
  synth::SynthConfig c;
  c.n = 12;
  c.m = 6;
  c.d = 5;
  c.l = 4;
  c.latent_t = 2;
  c.noise_sigma = 1.0;
  c.mode = mode;
  c.seed = seed;
  c.instances = 120;
  return to_data(synth::generate(c));
}

EvaluationConfig quick_config(std::vector<Strategy> strategies) {
  EvaluationConfig config;
  config.strategies = std::move(strategies);
  for (HyperParams* h : {&config.hyper.f1, &config.hyper.f2, &config.hyper.f3, &config.hyper.f4}) {
    h->max_iters = 150;
  }
  return config;
}

// Every dataset prefers workflows in the same order, so def is exact under LODO.
MetaMiningData identical_rows(int n, int m) {
  std::mt19937_64 rng(1);
  MetaMiningData d;
  d.x = testing::table(testing::random_matrix(n, 3, rng), EntityKind::Dataset, "d");
  d.a = testing::table(testing::random_matrix(m, 3, rng), EntityKind::Workflow, "w");
  d.performance = {d.x.entity_ids, d.a.entity_ids, Matrix(n, m)};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) d.performance.values(i, j) = 0.5 + 0.05 * j;
  }
  d.pairwise = pairwise_from_performance(d.performance, 0.01);
  d.preference = build_preference_matrix(*d.pairwise);
  return d;
}

}  // namespace

TEST_CASE("binomial sign test values") {
  CHECK(binomial_sign_test(46, 65) == doctest::Approx(0.0010900838044475786).epsilon(1e-10));
  CHECK(binomial_sign_test(40, 65) == doctest::Approx(0.08168153394154003).epsilon(1e-10));
  CHECK(binomial_sign_test(32, 65) == 1.0);
  CHECK(binomial_sign_test(29, 35) == doctest::Approx(0.0001168418675661087).epsilon(1e-10));
  CHECK(binomial_sign_test(0, 1) == 1.0);
  CHECK(binomial_sign_test(10, 10) == doctest::Approx(0.001953125).epsilon(1e-12));
  CHECK(binomial_sign_test(3, 12) == doctest::Approx(0.14599609375).epsilon(1e-12));
  CHECK_THROWS_AS(binomial_sign_test(0, 0), Error);
  CHECK_THROWS_AS(binomial_sign_test(4, 3), Error);
}

TEST_CASE("binomial sign test is symmetric") {
  for (int n = 1; n <= 40; ++n) {
    for (int k = 0; k <= n; ++k) CHECK(binomial_sign_test(k, n) == binomial_sign_test(n - k, n));
  }
}

TEST_CASE("top-k performance") {
  Vector pred(5), perf(5);
  pred << 0.1, 0.9, 0.5, 0.3, 0.7;
  perf << 0.6, 0.8, 0.7, 0.5, 0.9;
  CHECK(top_k_performance(pred, perf, 5) == doctest::Approx(perf.mean()));
  CHECK(top_k_performance(perf, perf, 2) == doctest::Approx((0.9 + 0.8) / 2));
  CHECK(top_k_performance(pred, perf, 2) == doctest::Approx((0.8 + 0.9) / 2));
  Vector flat = Vector::Zero(5);
  CHECK(top_k_performance(flat, perf, 2) == doctest::Approx((0.6 + 0.8) / 2));
  CHECK_THROWS_AS(top_k_performance(pred, perf, 6), Error);
}

TEST_CASE("top-k performance matches a sort-and-average oracle") {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const Vector pred = testing::random_matrix(9, 1, rng), perf = testing::random_matrix(9, 1, rng);
    std::vector<std::pair<double, int>> order;
    for (int j = 0; j < 9; ++j) order.push_back({-pred(j), j});
    std::sort(order.begin(), order.end());
    double want = 0;
    for (int j = 0; j < 4; ++j) want += perf(order[static_cast<std::size_t>(j)].second);
    CHECK(top_k_performance(pred, perf, 4) == doctest::Approx(want / 4));
  }
}

TEST_CASE("fold counts and applicability") {
  const MetaMiningData d = small_problem(1);
  CHECK(fold_count(d, Protocol::Lodo) == 12);
  CHECK(fold_count(d, Protocol::Lowo) == 6);
  CHECK(fold_count(d, Protocol::Lodwo) == 72);
  CHECK_FALSE(applicable(Strategy::F2kNN, Protocol::Lodo));
  CHECK_FALSE(applicable(Strategy::F1kNN, Protocol::Lowo));
  CHECK_FALSE(applicable(Strategy::Euclidean, Protocol::Lodwo));
  CHECK(applicable(Strategy::F3Direct, Protocol::Lodwo));
}

TEST_CASE("LOWO training R is the tournament of the remaining workflows") {
  const MetaMiningData d = small_problem(2);
  const FoldSplit split = make_fold(d, Protocol::Lowo, 2);
  CHECK(split.r_train.cols() == 5);
  for (Eigen::Index i = 0; i < split.r_train.rows(); ++i) CHECK(split.r_train.row(i).sum() == 10.0);
  const FoldSplit both = make_fold(d, Protocol::Lodwo, 7);
  CHECK(both.held_out_datasets == std::vector<std::size_t>{1});
  CHECK(both.held_out_workflows == std::vector<std::size_t>{1});
  CHECK(both.r_train.rows() == 11);
  CHECK(both.r_train.cols() == 5);
}

TEST_CASE("LODO: an exact strategy has zero mae in every fold") {
  const MetaMiningData d = identical_rows(6, 5);
  const EvaluationReport report = run_lodo(d, quick_config({Strategy::Default}));
  for (const auto& fold : report.folds) CHECK(*fold.outcome(Strategy::Default).mae == 0.0);
}

TEST_CASE("LODO report contents") {
  const MetaMiningData d = small_problem(4);
  const EvaluationReport report =
      run_lodo(d, quick_config({Strategy::Default, Strategy::Euclidean, Strategy::F1kNN,
                                Strategy::F2kNN, Strategy::F3Direct, Strategy::F4Direct,
                                Strategy::F4kNN}));
  CHECK(report.folds.size() == 12);
  CHECK_FALSE(report.has(Strategy::F2kNN));
  CHECK(report.aggregate(Strategy::Default).mean_rho.has_value());

  // Aggregate mae is the exact mean of the per-fold values.
  for (Strategy s : report.strategies) {
    double sum = 0.0;
    for (const auto& f : report.folds) sum += *f.outcome(s).mae;
    CHECK(*report.aggregate(s).mean_mae == sum / static_cast<double>(report.folds.size()));
  }

  // Win counts recounted by hand.
  for (const auto& c : report.comparisons) {
    std::int64_t wins = 0, total = 0;
    for (const auto& f : report.folds) {
      const auto& mine = f.outcome(c.strategy);
      const auto& base = f.outcome(c.baseline);
      std::optional<double> a, b;
      if (c.metric == Metric::Rho) a = mine.rho, b = base.rho;
      if (c.metric == Metric::T5p) a = mine.t5p, b = base.t5p;
      if (c.metric == Metric::Mae) a = mine.mae, b = base.mae;
      if (!a || !b) continue;
      ++total;
      wins += c.metric == Metric::Mae ? *a < *b : *a > *b;
    }
    CHECK(c.wins == wins);
    CHECK(c.total == total);
    CHECK(c.wins <= c.total);
    CHECK(c.p_value > 0.0);
    CHECK(c.p_value <= 1.0);
    CHECK(c.p_value == stats::binomial_two_sided(wins, total));
  }
}

TEST_CASE("compare_strategies: identical and dominant strategies") {
  EvaluationReport report;
  report.strategies = {Strategy::Default, Strategy::F3Direct};
  for (int f = 0; f < 6; ++f) {
    FoldResult fold;
    StrategyOutcome def, f3;
    def.strategy = Strategy::Default;
    f3.strategy = Strategy::F3Direct;
    def.rho = 0.1 * f;
    f3.rho = 0.1 * f;
    def.mae = 1.0;
    f3.mae = 0.5;
    fold.outcomes = {def, f3};
    report.folds.push_back(fold);
  }
  const auto same = compare_strategies(report, Strategy::F3Direct, Strategy::Default, Metric::Rho);
  CHECK(same->wins == 0);
  CHECK(same->p_value == doctest::Approx(std::min(1.0, 2.0 * std::pow(0.5, 6))));
  const auto dom = compare_strategies(report, Strategy::F3Direct, Strategy::Default, Metric::Mae);
  CHECK(dom->wins == 6);
  CHECK(dom->p_value == doctest::Approx(2.0 * std::pow(0.5, 6)));
  CHECK_FALSE(compare_strategies(report, Strategy::F3Direct, Strategy::Default, Metric::T5p));
  CHECK_THROWS_AS(compare_strategies(report, Strategy::F4Direct, Strategy::Default, Metric::Rho),
                  Error);
}

TEST_CASE("LOWO: def is constant and its rho is NA") {
  const MetaMiningData d = small_problem(5);
  const EvaluationReport report =
      run_lowo(d, quick_config({Strategy::Default, Strategy::Euclidean, Strategy::F2kNN,
                                Strategy::F3Direct}));
  CHECK(report.folds.size() == 6);
  for (const auto& f : report.folds) {
    const auto& def = f.outcome(Strategy::Default);
    CHECK((def.predicted.array() == def.predicted(0)).all());
    CHECK_FALSE(def.rho.has_value());
  }
  CHECK_FALSE(report.aggregate(Strategy::Default).mean_rho.has_value());
  CHECK(report_to_table(report).find("NA") != std::string::npos);
  CHECK(report_to_json(report)["aggregates"]["def"]["rho"].is_null());
}

TEST_CASE("LODWO: def is the training grand mean and EC is excluded with a notice") {
  const MetaMiningData d = small_problem(6);
  const EvaluationReport report =
      run_lodwo(d, quick_config({Strategy::Default, Strategy::Euclidean, Strategy::F3Direct}));
  CHECK(report.folds.size() == 72);
  CHECK_FALSE(report.has(Strategy::Euclidean));
  bool notice = false;
  for (const auto& n : report.notices) notice = notice || n.find("no longer applicable") != std::string::npos;
  CHECK(notice);
  for (std::size_t f = 0; f < report.folds.size(); ++f) {
    const FoldSplit split = make_fold(d, Protocol::Lodwo, f);
    CHECK(report.folds[f].outcome(Strategy::Default).predicted(0) == doctest::Approx(split.r_train.mean()));
  }
}

TEST_CASE("held-out entities never influence a fold model") {
  const MetaMiningData d = small_problem(7);
  HyperParams h;
  h.max_iters = 100;
  for (Protocol protocol : {Protocol::Lodo, Protocol::Lowo, Protocol::Lodwo}) {
    const std::size_t fold = protocol == Protocol::Lodwo ? 15 : 3;
    const FoldSplit split = make_fold(d, protocol, fold);
    MetaMiningData perturbed = d;
    std::mt19937_64 rng(9);
    for (std::size_t i : split.held_out_datasets) {
      perturbed.x.features.row(static_cast<Eigen::Index>(i)) = testing::random_matrix(1, 5, rng);
      perturbed.preference.scores.row(static_cast<Eigen::Index>(i)).reverseInPlace();
      auto& table = perturbed.pairwise->datasets[i];
      for (auto& o : table.outcomes) o = o == PairOutcome::KWins ? PairOutcome::LWins : PairOutcome::Tie;
    }
    for (std::size_t j : split.held_out_workflows) {
      perturbed.a.features.row(static_cast<Eigen::Index>(j)) = testing::random_matrix(1, 4, rng);
      perturbed.preference.scores.col(static_cast<Eigen::Index>(j)).setConstant(0.0);
      for (auto& table : perturbed.pairwise->datasets) {
        for (std::size_t l = 0; l < table.m; ++l) {
          if (l != j) {
            table.set(j, l, PairOutcome::LWins);
            table.set(l, j, PairOutcome::KWins);
          }
        }
      }
    }
    for (ObjectiveKind kind : {ObjectiveKind::F1, ObjectiveKind::F3, ObjectiveKind::F4}) {
      const FittedModel a = train_fold_model(d, protocol, fold, kind, h);
      const FittedModel b = train_fold_model(perturbed, protocol, fold, kind, h);
      CHECK(a.params.u == b.params.u);
      CHECK(a.params.v == b.params.v);
      CHECK(a.params.x_standardization.mean == b.params.x_standardization.mean);
      CHECK(a.params.a_standardization.scale == b.params.a_standardization.scale);
      CHECK(testing::non_increasing(a.trace));
    }
  }
}

TEST_CASE("parallel folds give the same report") {
  const MetaMiningData d = small_problem(8);
  EvaluationConfig config = quick_config({Strategy::Default, Strategy::Euclidean, Strategy::F4Direct,
                                          Strategy::F4kNN});
  const auto serial = report_to_json(run_lodo(d, config));
  config.jobs = 3;
  CHECK(report_to_json(run_lodo(d, config)).dump() == serial.dump());
}

TEST_CASE("table layout has value and delta rows") {
  const MetaMiningData d = small_problem(9);
  const std::string table =
      report_to_table(run_lodo(d, quick_config({Strategy::Default, Strategy::Euclidean, Strategy::F4Direct})));
  CHECK(table.find("rho") != std::string::npos);
  CHECK(table.find("t5p") != std::string::npos);
  CHECK(table.find("mae") != std::string::npos);
  CHECK(table.find("delta_EC") != std::string::npos);
  CHECK(table.find("delta ") != std::string::npos);
  CHECK(table.find(" p=") != std::string::npos);
}

TEST_CASE("outcome-level data runs end to end") {
  const MetaMiningData d = small_problem(10, synth::Mode::OutcomeLevel);
  const EvaluationReport report = run_lodo(d, quick_config({Strategy::Default, Strategy::F3Direct}));
  CHECK(report.aggregate(Strategy::F3Direct).folds_evaluated == 12);
}
