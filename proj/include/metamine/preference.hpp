#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "metamine/data_model.hpp"

namespace metamine {

enum class PairOutcome : std::uint8_t { KWins, LWins, Tie };

const char* to_string(PairOutcome outcome);
PairOutcome pair_outcome_from_string(const std::string& name);

enum class McNemarVariant {
  ContinuityCorrected,  // (|b-c|-1)^2/(b+c) against chi-square(1)
  ExactSmallSample,     // exact binomial on the discordant pairs when b+c < 25
};

/// Paired per-instance correctness for one dataset: rows = held-out instances
/// pooled across CV folds, columns = workflows, entries 0/1.
struct OutcomeSlice {
  std::string dataset_id;
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> correct;
};

struct OutcomeCube {
  std::vector<std::string> workflow_ids;
  std::vector<OutcomeSlice> datasets;
};

/// Pairwise significance results for one dataset; entry (k,l) with k < l is
/// the outcome of workflow k against workflow l. The lower triangle is unused.
struct PairwiseTable {
  std::string dataset_id;
  std::size_t m = 0;
  std::vector<PairOutcome> outcomes;  // row-major m x m

  PairOutcome at(std::size_t k, std::size_t l) const { return outcomes[k * m + l]; }
  void set(std::size_t k, std::size_t l, PairOutcome o) { outcomes[k * m + l] = o; }
};

/// Precomputed significance tensor (n x m x m), an alternative to OutcomeCube.
struct SignificanceTensor {
  std::vector<std::string> workflow_ids;
  std::vector<PairwiseTable> datasets;
};

struct McNemarOptions {
  double alpha_level = 0.05;
  McNemarVariant variant = McNemarVariant::ContinuityCorrected;
};

PairOutcome mcnemar_significant(std::span<const std::uint8_t> correct_k,
                                std::span<const std::uint8_t> correct_l,
                                const McNemarOptions& options = {});

inline PairOutcome mcnemar_significant(std::span<const std::uint8_t> correct_k,
                                       std::span<const std::uint8_t> correct_l,
                                       double alpha_level) {
  return mcnemar_significant(correct_k, correct_l, McNemarOptions{alpha_level});
}

/// Runs the McNemar test on every unordered workflow pair of one dataset.
PairwiseTable pairwise_outcomes(const OutcomeSlice& slice, const McNemarOptions& options = {});

/// Tournament score per workflow: 1 per significant win, 0.5 per tie.
Vector score_pairwise(const PairwiseTable& table);

Vector score_dataset(const OutcomeSlice& slice, const McNemarOptions& options = {});

/// Rows of R from per-instance outcomes. Rows are scored independently.
PreferenceMatrix build_preference_matrix(const OutcomeCube& cube,
                                         const McNemarOptions& options = {});

PreferenceMatrix build_preference_matrix(const SignificanceTensor& tensor);

/// Comparison-based R from a performance matrix: k beats l when
/// perf_k - perf_l > tie_threshold, otherwise tie.
PreferenceMatrix preference_from_performance(const PerformanceMatrix& p, double tie_threshold);

/// Pairwise outcome tables behind the two R constructions above.
SignificanceTensor pairwise_from_performance(const PerformanceMatrix& p, double tie_threshold);
SignificanceTensor pairwise_from_outcomes(const OutcomeCube& cube, const McNemarOptions& options = {});

/// The tournament restricted to the remaining workflows or datasets.
SignificanceTensor drop_workflow(const SignificanceTensor& tensor, std::size_t workflow);
SignificanceTensor drop_dataset(const SignificanceTensor& tensor, std::size_t dataset);

/// Tables reordered to `dataset_ids`; throws if one is missing.
SignificanceTensor select_datasets(const SignificanceTensor& tensor,
                                   const std::vector<std::string>& dataset_ids);

/// Average (tie-aware) ranks, 1-based.
Vector average_ranks(const Vector& values);

/// Spearman correlation with average ranks; nullopt when either vector is constant.
std::optional<double> spearman(const Vector& x, const Vector& y);

enum class SimilarityAxis { Datasets, Workflows };

struct SimilarityTarget {
  Matrix matrix;
  SimilarityAxis axis = SimilarityAxis::Datasets;
  std::vector<std::size_t> constant_entities;  // entities whose preference vector is constant
};

/// Rank-correlation target for the homogeneous metrics: pairwise spearman
/// between rows (Datasets) or columns (Workflows) of R.
SimilarityTarget similarity_target(const Matrix& r, SimilarityAxis axis);

inline SimilarityTarget similarity_target(const PreferenceMatrix& r, SimilarityAxis axis) {
  return similarity_target(r.scores, axis);
}

}  // namespace metamine
