#include "metamine/recommend.hpp"

#include <algorithm>
#include <numeric>

namespace metamine {

const char* to_string(Task task) {
  switch (task) {
    case Task::WorkflowPrefs: return "workflow-prefs";
    case Task::DatasetPrefs: return "dataset-prefs";
    case Task::PairScore: return "pair";
  }
  return "?";
}

Task task_from_string(const std::string& name) {
  if (name == "workflow-prefs" || name == "1") return Task::WorkflowPrefs;
  if (name == "dataset-prefs" || name == "2") return Task::DatasetPrefs;
  if (name == "pair" || name == "3") return Task::PairScore;
  throw Error("unknown task '" + name + "'");
}

const char* to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::F1kNN: return "f1-knn";
    case Strategy::F2kNN: return "f2-knn";
    case Strategy::F3Direct: return "f3";
    case Strategy::F4Direct: return "f4";
    case Strategy::F4kNN: return "f4-knn";
    case Strategy::Default: return "def";
    case Strategy::Euclidean: return "ec";
  }
  return "?";
}

Strategy strategy_from_string(const std::string& name) {
  if (name == "f1-knn" || name == "f1") return Strategy::F1kNN;
  if (name == "f2-knn" || name == "f2") return Strategy::F2kNN;
  if (name == "f3") return Strategy::F3Direct;
  if (name == "f4") return Strategy::F4Direct;
  if (name == "f4-knn") return Strategy::F4kNN;
  if (name == "def") return Strategy::Default;
  if (name == "ec") return Strategy::Euclidean;
  throw Error("unknown strategy '" + name + "'");
}

namespace {

const Matrix& projection(const ModelParams& params, MetricAxis axis) {
  return axis == MetricAxis::Datasets ? params.u : params.v;
}

// Ranks candidates by descending score with ties kept in index order.
std::vector<std::size_t> top_indices(const Vector& scores, std::size_t count) {
  std::vector<std::size_t> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores(static_cast<Eigen::Index>(a)) > scores(static_cast<Eigen::Index>(b));
  });
  order.resize(std::min(count, order.size()));
  return order;
}

PreferencePrediction weighted_average(const Matrix& targets, const std::vector<std::size_t>& picked,
                                      std::vector<double> weights, std::size_t requested) {
  PreferencePrediction out;
  out.neighborhood.n_requested = requested;
  out.neighborhood.neighbors = picked;
  double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) {
    std::fill(weights.begin(), weights.end(), 1.0);
    total = static_cast<double>(weights.size());
    out.nonpositive_fallback = true;
  }
  out.values = Vector::Zero(targets.cols());
  for (std::size_t k = 0; k < picked.size(); ++k) {
    out.values += (weights[k] / total) * targets.row(static_cast<Eigen::Index>(picked[k])).transpose();
  }
  out.neighborhood.weights = std::move(weights);
  return out;
}

}  // namespace

double learned_similarity(const Vector& first, const Vector& second, const ModelParams& params,
                          MetricAxis axis) {
  const Matrix& p = projection(params, axis);
  if (first.size() != p.rows() || second.size() != p.rows()) {
    throw Error("learned_similarity: descriptor length does not match the model");
  }
  return (p.transpose() * first).dot(p.transpose() * second);
}

PreferencePrediction knn_predict(const Vector& query, const Matrix& train, const Matrix& targets,
                                 const ModelParams& params, MetricAxis axis, int n_neighbors) {
  if (train.rows() == 0) throw Error("knn: empty training set");
  if (n_neighbors < 1) throw Error("knn: need at least one neighbour");
  if (train.rows() != targets.rows()) throw Error("knn: descriptors and targets misaligned");
  const Matrix& p = projection(params, axis);
  if (query.size() != p.rows() || train.cols() != p.rows()) {
    throw Error("knn: descriptor length does not match the model");
  }
  const Vector similarities = (train * p) * (p.transpose() * query);
  const auto picked = top_indices(similarities, static_cast<std::size_t>(n_neighbors));
  std::vector<double> weights;
  for (std::size_t idx : picked) {
    weights.push_back(std::max(similarities(static_cast<Eigen::Index>(idx)), 0.0));
  }
  auto out = weighted_average(targets, picked, std::move(weights),
                              static_cast<std::size_t>(n_neighbors));
  out.task = axis == MetricAxis::Datasets ? Task::WorkflowPrefs : Task::DatasetPrefs;
  return out;
}

PreferencePrediction knn_predict_workflow_prefs(const Vector& x_new, const Matrix& train_x,
                                                const Matrix& r, const ModelParams& params,
                                                int n_neighbors) {
  return knn_predict(x_new, train_x, r, params, MetricAxis::Datasets, n_neighbors);
}

PreferencePrediction knn_predict_dataset_prefs(const Vector& a_new, const Matrix& train_a,
                                               const Matrix& r, const ModelParams& params,
                                               int n_neighbors) {
  return knn_predict(a_new, train_a, r.transpose(), params, MetricAxis::Workflows, n_neighbors);
}

double predict_pair(const Vector& x_new, const Vector& a_new, const ModelParams& params) {
  if (x_new.size() != params.u.rows() || a_new.size() != params.v.rows()) {
    throw Error("predict_pair: descriptor length does not match the model");
  }
  return (params.u.transpose() * x_new).dot(params.v.transpose() * a_new);
}

Vector predict_workflow_scores(const Vector& x_new, const Matrix& workflows,
                               const ModelParams& params) {
  if (x_new.size() != params.u.rows() || workflows.cols() != params.v.rows()) {
    throw Error("predict_workflow_scores: descriptor length does not match the model");
  }
  return (workflows * params.v) * (params.u.transpose() * x_new);
}

Vector predict_dataset_scores(const Vector& a_new, const Matrix& datasets,
                              const ModelParams& params) {
  if (a_new.size() != params.v.rows() || datasets.cols() != params.u.rows()) {
    throw Error("predict_dataset_scores: descriptor length does not match the model");
  }
  return (datasets * params.u) * (params.v.transpose() * a_new);
}

PreferencePrediction default_strategy(Task task, const Matrix& r_train) {
  if (r_train.size() == 0) throw Error("default strategy: empty training matrix");
  PreferencePrediction out;
  out.task = task;
  out.strategy = Strategy::Default;
  switch (task) {
    case Task::WorkflowPrefs:
      out.values = r_train.colwise().mean().transpose();
      break;
    case Task::DatasetPrefs:
      out.values = r_train.rowwise().mean();
      break;
    case Task::PairScore:
      out.values = Vector::Constant(1, r_train.mean());
      break;
  }
  return out;
}

PreferencePrediction euclidean_strategy(const Vector& query, const Matrix& train,
                                        const Matrix& r, int n_neighbors, Task task) {
  if (task == Task::PairScore) {
    throw Error("Euclidean baseline cannot score dataset-workflow pairs");
  }
  if (train.rows() == 0) throw Error("Euclidean baseline: empty training set");
  if (n_neighbors < 1) throw Error("Euclidean baseline: need at least one neighbour");
  if (query.size() != train.cols()) throw Error("Euclidean baseline: descriptor length mismatch");
  const Matrix targets = task == Task::WorkflowPrefs ? r : Matrix(r.transpose());
  if (targets.rows() != train.rows()) throw Error("Euclidean baseline: descriptors and R misaligned");

  const Vector distances = (train.rowwise() - query.transpose()).rowwise().norm();
  const auto picked = top_indices(-distances, static_cast<std::size_t>(n_neighbors));
  std::vector<double> weights;
  for (std::size_t idx : picked) {
    weights.push_back(1.0 / (1.0 + distances(static_cast<Eigen::Index>(idx))));
  }
  auto out = weighted_average(targets, picked, std::move(weights),
                              static_cast<std::size_t>(n_neighbors));
  out.task = task;
  out.strategy = Strategy::Euclidean;
  return out;
}

}  // namespace metamine
