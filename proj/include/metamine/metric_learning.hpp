#pragma once

#include <string>
#include <vector>

#include "metamine/data_model.hpp"
#include "metamine/preference.hpp"

namespace metamine {

/// Training problem for one of the four factored objectives.
///
///   F1: ||S_X - X U U^T X^T||^2 + mu1 ||U||^2
///   F2: ||S_A - A V V^T A^T||^2 + mu2 ||V||^2
///   F3: ||R - X U V^T A^T||^2 + mu1 ||U||^2 + mu2 ||V||^2
///   F4: alpha fit(F1) + beta fit(F2) + gamma fit(F3) + mu1 ||U||^2 + mu2 ||V||^2
///
/// S_X and S_A are the rank-correlation similarity targets of R's rows and
/// columns. X and A are expected to be standardized already.
struct Objective {
  ObjectiveKind kind = ObjectiveKind::F4;
  Matrix x;    // n x d
  Matrix a;    // m x l
  Matrix r;    // n x m preference target
  Matrix s_x;  // n x n
  Matrix s_a;  // m x m

  Eigen::Index d() const { return x.cols(); }
  Eigen::Index l() const { return a.cols(); }
};

Objective make_objective(ObjectiveKind kind, const Matrix& x, const Matrix& a, const Matrix& r);

/// Unregularized data terms and regularizers evaluated at (u, v).
struct ObjectiveTerms {
  double fit_x = 0.0;
  double fit_a = 0.0;
  double fit_r = 0.0;
  double norm_u = 0.0;  // ||U||_F^2
  double norm_v = 0.0;
  double total = 0.0;
};

ObjectiveTerms objective_terms(const Objective& obj, const HyperParams& hyper, const Matrix& u,
                               const Matrix& v);

double objective_value(const Objective& obj, const HyperParams& hyper, const Matrix& u,
                       const Matrix& v);

inline double objective_value(const Objective& obj, const ModelParams& params) {
  return objective_value(obj, params.hyper, params.u, params.v);
}

struct Gradient {
  Matrix u;  // d x t
  Matrix v;  // l x t
};

Gradient gradient(const Objective& obj, const HyperParams& hyper, const Matrix& u, const Matrix& v);

inline Gradient gradient(const Objective& obj, const ModelParams& params) {
  return gradient(obj, params.hyper, params.u, params.v);
}

enum class Termination { RelTol, MaxIters, LineSearchFailure };

const char* to_string(Termination reason);
Termination termination_from_string(const std::string& name);

struct TrainTrace {
  std::vector<double> objective;       // objective[0] is the initial value
  std::vector<double> step_sizes;      // one per accepted step
  std::vector<double> gradient_norms;  // aligned with objective
  Termination termination = Termination::MaxIters;

  int iterations() const { return static_cast<int>(step_sizes.size()); }
  bool operator==(const TrainTrace&) const = default;
};

struct Factors {
  Matrix u;
  Matrix v;
};

/// Default projection dimensionality: min(rank(A), rank(X)), at least 1.
int default_rank(const Objective& obj);

Factors initialize(const Objective& obj, const HyperParams& hyper, int t);

struct TrainResult {
  Factors factors;
  TrainTrace trace;
};

/// Gradient descent with Armijo backtracking (shrink 0.5, sufficient-decrease
/// factor 1e-4). Trial steps use the Barzilai-Borwein length, so accepted
/// iterates still decrease the objective monotonically.
TrainResult descend(const Objective& obj, const HyperParams& hyper, Factors start);

/// Initializes per hyper.init and hyper.t (or default_rank) and descends.
TrainResult train(const Objective& obj, const HyperParams& hyper);

struct FittedModel {
  ModelParams params;
  TrainTrace trace;
};

/// Standardizes the descriptor tables, builds the objective from R and
/// trains, storing the standardization records in the returned model.
FittedModel fit_model(ObjectiveKind kind, const HyperParams& hyper, const DescriptorTable& x,
                      const DescriptorTable& a, const Matrix& r);

namespace presets {

/// Settings used in the reference meta-mining experiments, per task.
struct TaskPreset {
  HyperParams f1;
  HyperParams f2;
  HyperParams f3;
  HyperParams f4;

  const HyperParams& for_objective(ObjectiveKind kind) const;
};

TaskPreset task1();
TaskPreset task2();
TaskPreset task3();

/// Looks up "task1", "task2" or "task3".
TaskPreset by_name(const std::string& name);

}  // namespace presets

}  // namespace metamine
