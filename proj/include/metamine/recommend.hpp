#pragma once

#include <string>
#include <vector>

#include "metamine/data_model.hpp"

namespace metamine {

enum class Task { WorkflowPrefs, DatasetPrefs, PairScore };

enum class Strategy { F1kNN, F2kNN, F3Direct, F4Direct, F4kNN, Default, Euclidean };

const char* to_string(Task task);
Task task_from_string(const std::string& name);
const char* to_string(Strategy strategy);
Strategy strategy_from_string(const std::string& name);

enum class MetricAxis { Datasets, Workflows };

struct Neighborhood {
  std::size_t n_requested = 0;
  std::vector<std::size_t> neighbors;  // training indices, descending weight
  std::vector<double> weights;
};

struct PreferencePrediction {
  Task task = Task::WorkflowPrefs;
  Strategy strategy = Strategy::Default;
  Vector values;  // length m, length n, or a single entry for PairScore
  Neighborhood neighborhood;
  bool nonpositive_fallback = false;  // every selected similarity was <= 0
};

/// x^T U U^T x' (Datasets) or a^T V V^T a' (Workflows) on standardized inputs.
double learned_similarity(const Vector& first, const Vector& second, const ModelParams& params,
                          MetricAxis axis);

/// Learned-metric kNN; `train` holds standardized descriptors whose rows align
/// with the rows of `targets` (R for datasets, R^T for workflows).
PreferencePrediction knn_predict(const Vector& query, const Matrix& train, const Matrix& targets,
                                 const ModelParams& params, MetricAxis axis, int n_neighbors);

/// Workflow preference vector of an unseen dataset from its nearest training datasets.
PreferencePrediction knn_predict_workflow_prefs(const Vector& x_new, const Matrix& train_x,
                                                const Matrix& r, const ModelParams& params,
                                                int n_neighbors);

/// Dataset preference vector of an unseen workflow from its nearest training workflows.
PreferencePrediction knn_predict_dataset_prefs(const Vector& a_new, const Matrix& train_a,
                                               const Matrix& r, const ModelParams& params,
                                               int n_neighbors);

/// Heterogeneous score x^T U V^T a.
double predict_pair(const Vector& x_new, const Vector& a_new, const ModelParams& params);

/// predict_pair of one dataset against every row of `workflows`.
Vector predict_workflow_scores(const Vector& x_new, const Matrix& workflows,
                               const ModelParams& params);

/// predict_pair of one workflow against every row of `datasets`.
Vector predict_dataset_scores(const Vector& a_new, const Matrix& datasets,
                              const ModelParams& params);

/// def baseline: column means (WorkflowPrefs), row means (DatasetPrefs) or the
/// grand mean (PairScore) of the training R.
PreferencePrediction default_strategy(Task task, const Matrix& r_train);

/// EC baseline: n nearest neighbours under Euclidean distance, weights
/// 1/(1+dist). Only the two homogeneous tasks are supported.
PreferencePrediction euclidean_strategy(const Vector& query, const Matrix& train,
                                        const Matrix& r, int n_neighbors, Task task);

}  // namespace metamine
