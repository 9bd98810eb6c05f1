#include "metamine/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

namespace metamine::synth {

const char* to_string(Mode mode) {
  switch (mode) {
    case Mode::ExactBilinear: return "exact";
    case Mode::NoisyBilinear: return "noisy";
    case Mode::OutcomeLevel: return "outcome";
  }
  return "?";
}

Mode mode_from_string(const std::string& name) {
  if (name == "exact") return Mode::ExactBilinear;
  if (name == "noisy") return Mode::NoisyBilinear;
  if (name == "outcome") return Mode::OutcomeLevel;
  throw Error("unknown synth mode '" + name + "'");
}

void check(const SynthConfig& c) {
  if (c.n < 3 || c.m < 3 || c.d < 3 || c.l < 3) throw Error("synth: all sizes must be >= 3");
  if (c.latent_t < 1 || c.latent_t > std::min(c.d, c.l)) {
    throw Error("synth: latent_t must lie in [1, min(d, l)]");
  }
  if (!(c.noise_sigma >= 0.0)) throw Error("synth: noise_sigma must be nonnegative");
  if (c.mode == Mode::OutcomeLevel && c.instances < 1) {
    throw Error("synth: outcome-level generation needs at least one instance per dataset");
  }
  if (!(c.tie_threshold >= 0.0)) throw Error("synth: tie threshold must be nonnegative");
}

namespace {

std::string make_id(const char* prefix, int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%03d", prefix, index);
  return buf;
}

Matrix gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

DescriptorTable descriptor_table(Matrix raw, EntityKind kind, const char* id_prefix,
                                 const char* feature_prefix) {
  DescriptorTable t;
  t.kind = kind;
  for (Eigen::Index i = 0; i < raw.rows(); ++i) t.entity_ids.push_back(make_id(id_prefix, static_cast<int>(i)));
  for (Eigen::Index j = 0; j < raw.cols(); ++j) {
    t.feature_names.push_back(make_id(feature_prefix, static_cast<int>(j)));
  }
  t.features = std::move(raw);
  return standardize(t).first;
}

}  // namespace

SynthProblem generate(const SynthConfig& c) {
  check(c);
  std::mt19937_64 rng(c.seed);
  SynthProblem p;
  p.x = descriptor_table(gaussian(c.n, c.d, rng), EntityKind::Dataset, "ds", "xf");
  p.a = descriptor_table(gaussian(c.m, c.l, rng), EntityKind::Workflow, "wf", "af");
  p.u_star = gaussian(c.d, c.latent_t, rng);
  p.v_star = gaussian(c.l, c.latent_t, rng);
  p.latent_scores = p.x.features * p.u_star * p.v_star.transpose() * p.a.features.transpose();

  Matrix scores = p.latent_scores;
  if (c.mode != Mode::ExactBilinear) scores += c.noise_sigma * gaussian(c.n, c.m, rng);

  PerformanceMatrix perf{p.x.entity_ids, p.a.entity_ids, Matrix(c.n, c.m)};
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    const double lo = scores.row(i).minCoeff();
    const double hi = scores.row(i).maxCoeff();
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
      perf.values(i, j) = hi > lo ? 0.5 + 0.45 * (scores(i, j) - lo) / (hi - lo) : 0.725;
    }
  }

  if (c.mode == Mode::OutcomeLevel) {
    OutcomeCube cube;
    cube.workflow_ids = p.a.entity_ids;
    std::vector<std::size_t> instances(static_cast<std::size_t>(c.instances));
    for (int i = 0; i < c.n; ++i) {
      OutcomeSlice slice{p.x.entity_ids[static_cast<std::size_t>(i)],
                         decltype(OutcomeSlice::correct)::Zero(c.instances, c.m)};
      for (int j = 0; j < c.m; ++j) {
        const auto hits = static_cast<int>(std::lround(perf.values(i, j) * c.instances));
        std::iota(instances.begin(), instances.end(), 0);
        std::shuffle(instances.begin(), instances.end(), rng);
        for (int k = 0; k < hits; ++k) slice.correct(static_cast<Eigen::Index>(instances[static_cast<std::size_t>(k)]), j) = 1;
        perf.values(i, j) = static_cast<double>(hits) / c.instances;
      }
      cube.datasets.push_back(std::move(slice));
    }
    p.pairwise = pairwise_from_outcomes(cube, McNemarOptions{c.alpha_level});
    p.preference = build_preference_matrix(p.pairwise);
    p.outcomes = std::move(cube);
  } else {
    p.pairwise = pairwise_from_performance(perf, c.tie_threshold);
    p.preference = build_preference_matrix(p.pairwise);
  }
  p.performance = std::move(perf);
  return p;
}

}  // namespace metamine::synth
