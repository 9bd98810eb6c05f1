#include "metamine/preference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "metamine/stats.hpp"

namespace metamine {

const char* to_string(PairOutcome outcome) {
  switch (outcome) {
    case PairOutcome::KWins: return "k_wins";
    case PairOutcome::LWins: return "l_wins";
    case PairOutcome::Tie: return "tie";
  }
  return "?";
}

PairOutcome pair_outcome_from_string(const std::string& name) {
  if (name == "k_wins") return PairOutcome::KWins;
  if (name == "l_wins") return PairOutcome::LWins;
  if (name == "tie") return PairOutcome::Tie;
  throw Error("unknown pair outcome '" + name + "'");
}

PairOutcome mcnemar_significant(std::span<const std::uint8_t> correct_k,
                                std::span<const std::uint8_t> correct_l,
                                const McNemarOptions& options) {
  if (correct_k.size() != correct_l.size()) {
    throw Error("mcnemar: outcome vectors differ in length");
  }
  std::int64_t b = 0;  // k right, l wrong
  std::int64_t c = 0;  // k wrong, l right
  for (std::size_t i = 0; i < correct_k.size(); ++i) {
    if (correct_k[i] > 1 || correct_l[i] > 1) throw Error("mcnemar: outcomes must be 0 or 1");
    if (correct_k[i] && !correct_l[i]) ++b;
    if (!correct_k[i] && correct_l[i]) ++c;
  }
  const std::int64_t discordant = b + c;
  if (discordant == 0) return PairOutcome::Tie;

  bool significant = false;
  if (options.variant == McNemarVariant::ExactSmallSample && discordant < 25) {
    significant = stats::binomial_two_sided(std::min(b, c), discordant) < options.alpha_level;
  } else {
    const double diff = std::abs(static_cast<double>(b - c)) - 1.0;
    const double statistic = diff * diff / static_cast<double>(discordant);
    significant = statistic > stats::chi_square1_critical(options.alpha_level);
  }
  if (!significant || b == c) return PairOutcome::Tie;
  return b > c ? PairOutcome::KWins : PairOutcome::LWins;
}

PairwiseTable pairwise_outcomes(const OutcomeSlice& slice, const McNemarOptions& options) {
  const auto m = static_cast<std::size_t>(slice.correct.cols());
  const auto instances = static_cast<std::size_t>(slice.correct.rows());
  PairwiseTable table{slice.dataset_id, m, std::vector<PairOutcome>(m * m, PairOutcome::Tie)};
  // Column-major storage: each workflow's outcomes are contiguous.
  for (std::size_t k = 0; k < m; ++k) {
    std::span<const std::uint8_t> col_k(slice.correct.col(static_cast<Eigen::Index>(k)).data(),
                                        instances);
    for (std::size_t l = k + 1; l < m; ++l) {
      std::span<const std::uint8_t> col_l(slice.correct.col(static_cast<Eigen::Index>(l)).data(),
                                          instances);
      table.set(k, l, mcnemar_significant(col_k, col_l, options));
    }
  }
  return table;
}

Vector score_pairwise(const PairwiseTable& table) {
  const std::size_t m = table.m;
  if (m < 2) throw Error("scoring needs at least two workflows");
  // Accumulate half-points as integers so the row-sum identity is exact.
  std::vector<std::int64_t> half_points(m, 0);
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t l = k + 1; l < m; ++l) {
      switch (table.at(k, l)) {
        case PairOutcome::KWins: half_points[k] += 2; break;
        case PairOutcome::LWins: half_points[l] += 2; break;
        case PairOutcome::Tie:
          half_points[k] += 1;
          half_points[l] += 1;
          break;
      }
    }
  }
  Vector scores(static_cast<Eigen::Index>(m));
  for (std::size_t k = 0; k < m; ++k) {
    scores(static_cast<Eigen::Index>(k)) = 0.5 * static_cast<double>(half_points[k]);
  }
  return scores;
}

Vector score_dataset(const OutcomeSlice& slice, const McNemarOptions& options) {
  if (slice.correct.cols() < 2) throw Error("scoring needs at least two workflows");
  return score_pairwise(pairwise_outcomes(slice, options));
}

PreferenceMatrix build_preference_matrix(const OutcomeCube& cube, const McNemarOptions& options) {
  const auto m = static_cast<Eigen::Index>(cube.workflow_ids.size());
  PreferenceMatrix r;
  r.workflow_ids = cube.workflow_ids;
  r.scores.resize(static_cast<Eigen::Index>(cube.datasets.size()), m);
  for (std::size_t i = 0; i < cube.datasets.size(); ++i) {
    const auto& slice = cube.datasets[i];
    if (slice.correct.cols() != m) {
      throw Error("outcomes for dataset '" + slice.dataset_id + "' have " +
                  std::to_string(slice.correct.cols()) + " workflows, expected " +
                  std::to_string(m));
    }
    r.dataset_ids.push_back(slice.dataset_id);
    r.scores.row(static_cast<Eigen::Index>(i)) = score_dataset(slice, options).transpose();
  }
  return r;
}

PreferenceMatrix build_preference_matrix(const SignificanceTensor& tensor) {
  const std::size_t m = tensor.workflow_ids.size();
  PreferenceMatrix r;
  r.workflow_ids = tensor.workflow_ids;
  r.scores.resize(static_cast<Eigen::Index>(tensor.datasets.size()), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < tensor.datasets.size(); ++i) {
    const auto& table = tensor.datasets[i];
    if (table.m != m) {
      throw Error("significance table for dataset '" + table.dataset_id + "' has wrong size");
    }
    r.dataset_ids.push_back(table.dataset_id);
    r.scores.row(static_cast<Eigen::Index>(i)) = score_pairwise(table).transpose();
  }
  return r;
}

PreferenceMatrix preference_from_performance(const PerformanceMatrix& p, double tie_threshold) {
  return build_preference_matrix(pairwise_from_performance(p, tie_threshold));
}

SignificanceTensor pairwise_from_outcomes(const OutcomeCube& cube, const McNemarOptions& options) {
  SignificanceTensor tensor;
  tensor.workflow_ids = cube.workflow_ids;
  for (const auto& slice : cube.datasets) {
    if (slice.correct.cols() != static_cast<Eigen::Index>(cube.workflow_ids.size())) {
      throw Error("outcomes for dataset '" + slice.dataset_id + "' have " +
                  std::to_string(slice.correct.cols()) + " workflows, expected " +
                  std::to_string(cube.workflow_ids.size()));
    }
    tensor.datasets.push_back(pairwise_outcomes(slice, options));
  }
  return tensor;
}

SignificanceTensor drop_workflow(const SignificanceTensor& tensor, std::size_t workflow) {
  const std::size_t m = tensor.workflow_ids.size();
  if (workflow >= m) throw Error("drop_workflow: index out of range");
  SignificanceTensor out;
  out.workflow_ids = tensor.workflow_ids;
  out.workflow_ids.erase(out.workflow_ids.begin() + static_cast<std::ptrdiff_t>(workflow));
  for (const auto& table : tensor.datasets) {
    PairwiseTable t{table.dataset_id, m - 1, {}};
    t.outcomes.reserve((m - 1) * (m - 1));
    for (std::size_t k = 0; k < m; ++k) {
      if (k == workflow) continue;
      for (std::size_t l = 0; l < m; ++l) {
        if (l != workflow) t.outcomes.push_back(table.at(k, l));
      }
    }
    out.datasets.push_back(std::move(t));
  }
  return out;
}

SignificanceTensor drop_dataset(const SignificanceTensor& tensor, std::size_t dataset) {
  if (dataset >= tensor.datasets.size()) throw Error("drop_dataset: index out of range");
  SignificanceTensor out = tensor;
  out.datasets.erase(out.datasets.begin() + static_cast<std::ptrdiff_t>(dataset));
  return out;
}

SignificanceTensor select_datasets(const SignificanceTensor& tensor,
                                   const std::vector<std::string>& dataset_ids) {
  SignificanceTensor out;
  out.workflow_ids = tensor.workflow_ids;
  for (const auto& id : dataset_ids) {
    auto it = std::find_if(tensor.datasets.begin(), tensor.datasets.end(),
                           [&](const PairwiseTable& t) { return t.dataset_id == id; });
    if (it == tensor.datasets.end()) throw Error("no pairwise outcomes for dataset '" + id + "'");
    out.datasets.push_back(*it);
  }
  return out;
}

SignificanceTensor pairwise_from_performance(const PerformanceMatrix& p, double tie_threshold) {
  const auto n = static_cast<std::size_t>(p.values.rows());
  const auto m = static_cast<std::size_t>(p.values.cols());
  SignificanceTensor tensor;
  tensor.workflow_ids = p.workflow_ids;
  for (std::size_t i = 0; i < n; ++i) {
    PairwiseTable table{p.dataset_ids.at(i), m, std::vector<PairOutcome>(m * m, PairOutcome::Tie)};
    for (std::size_t k = 0; k < m; ++k) {
      for (std::size_t l = k + 1; l < m; ++l) {
        const double diff = p.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) -
                            p.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l));
        if (diff > tie_threshold) {
          table.set(k, l, PairOutcome::KWins);
        } else if (-diff > tie_threshold) {
          table.set(k, l, PairOutcome::LWins);
        }
      }
    }
    tensor.datasets.push_back(std::move(table));
  }
  return tensor;
}

Vector average_ranks(const Vector& values) {
  const auto n = static_cast<std::size_t>(values.size());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values(static_cast<Eigen::Index>(a)) < values(static_cast<Eigen::Index>(b));
  });
  Vector ranks(values.size());
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    const double v = values(static_cast<Eigen::Index>(order[i]));
    while (j + 1 < n && values(static_cast<Eigen::Index>(order[j + 1])) == v) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks(static_cast<Eigen::Index>(order[k])) = rank;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> spearman(const Vector& x, const Vector& y) {
  if (x.size() != y.size()) throw Error("spearman: vectors differ in length");
  if (x.size() < 2) throw Error("spearman: need at least two observations");
  const Vector rx = average_ranks(x);
  const Vector ry = average_ranks(y);
  const Vector dx = rx.array() - rx.mean();
  const Vector dy = ry.array() - ry.mean();
  const double sxx = dx.squaredNorm();
  const double syy = dy.squaredNorm();
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  const double rho = dx.dot(dy) / std::sqrt(sxx * syy);
  return std::clamp(rho, -1.0, 1.0);
}

SimilarityTarget similarity_target(const Matrix& r, SimilarityAxis axis) {
  const Matrix entities = axis == SimilarityAxis::Datasets ? r : Matrix(r.transpose());
  const Eigen::Index count = entities.rows();
  SimilarityTarget target;
  target.axis = axis;
  target.matrix = Matrix::Identity(count, count);

  std::vector<bool> constant(static_cast<std::size_t>(count), false);
  for (Eigen::Index i = 0; i < count; ++i) {
    const auto row = entities.row(i);
    constant[static_cast<std::size_t>(i)] = (row.array() == row(0)).all();
    if (constant[static_cast<std::size_t>(i)]) target.constant_entities.push_back(static_cast<std::size_t>(i));
  }
  if (entities.cols() < 2) return target;

  for (Eigen::Index i = 0; i < count; ++i) {
    for (Eigen::Index j = i + 1; j < count; ++j) {
      const auto rho = spearman(entities.row(i).transpose(), entities.row(j).transpose());
      const double value = rho.value_or(0.0);
      target.matrix(i, j) = value;
      target.matrix(j, i) = value;
    }
  }
  return target;
}

}  // namespace metamine
