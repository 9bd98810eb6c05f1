#include "metamine/metric_learning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace metamine {

namespace {

bool uses_x_fit(ObjectiveKind kind, const HyperParams& h) {
  return kind == ObjectiveKind::F1 || (kind == ObjectiveKind::F4 && h.alpha != 0.0);
}
bool uses_a_fit(ObjectiveKind kind, const HyperParams& h) {
  return kind == ObjectiveKind::F2 || (kind == ObjectiveKind::F4 && h.beta != 0.0);
}
bool uses_r_fit(ObjectiveKind kind, const HyperParams& h) {
  return kind == ObjectiveKind::F3 || (kind == ObjectiveKind::F4 && h.gamma != 0.0);
}

double weight_x(ObjectiveKind kind, const HyperParams& h) {
  return kind == ObjectiveKind::F4 ? h.alpha : 1.0;
}
double weight_a(ObjectiveKind kind, const HyperParams& h) {
  return kind == ObjectiveKind::F4 ? h.beta : 1.0;
}
double weight_r(ObjectiveKind kind, const HyperParams& h) {
  return kind == ObjectiveKind::F4 ? h.gamma : 1.0;
}
// F1 carries only the U regularizer, F2 only the V regularizer.
double reg_u(ObjectiveKind kind, const HyperParams& h) {
  return kind == ObjectiveKind::F2 ? 0.0 : h.mu1;
}
double reg_v(ObjectiveKind kind, const HyperParams& h) {
  return kind == ObjectiveKind::F1 ? 0.0 : h.mu2;
}

void check_factors(const Objective& obj, const Matrix& u, const Matrix& v) {
  if (u.rows() != obj.d()) {
    throw Error("U has " + std::to_string(u.rows()) + " rows, expected d = " +
                std::to_string(obj.d()));
  }
  if (v.rows() != obj.l()) {
    throw Error("V has " + std::to_string(v.rows()) + " rows, expected l = " +
                std::to_string(obj.l()));
  }
  if (u.cols() != v.cols()) throw Error("U and V disagree on t");
}

Matrix pseudo_inverse(const Matrix& m) {
  return Eigen::CompleteOrthogonalDecomposition<Matrix>(m).pseudoInverse();
}

void fill_gaussian(Matrix& m, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = scale * normal(rng);
  }
}

// Projection P with P P^T ~ best PSD rank-t approximation of the symmetric target.
Matrix symmetric_warm_start(const Matrix& features, const Matrix& target, int t) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(target);
  const Eigen::Index count = target.rows();
  Matrix embed = Matrix::Zero(count, t);
  for (int k = 0; k < t && k < count; ++k) {
    const Eigen::Index idx = count - 1 - k;  // eigenvalues ascending
    const double lambda = std::max(eig.eigenvalues()(idx), 0.0);
    embed.col(k) = eig.eigenvectors().col(idx) * std::sqrt(lambda);
  }
  return pseudo_inverse(features) * embed;
}

}  // namespace

Objective make_objective(ObjectiveKind kind, const Matrix& x, const Matrix& a, const Matrix& r) {
  if (x.rows() != r.rows()) {
    throw Error("X has " + std::to_string(x.rows()) + " rows but R has " +
                std::to_string(r.rows()));
  }
  if (a.rows() != r.cols()) {
    throw Error("A has " + std::to_string(a.rows()) + " rows but R has " +
                std::to_string(r.cols()) + " columns");
  }
  Objective obj;
  obj.kind = kind;
  obj.x = x;
  obj.a = a;
  obj.r = r;
  if (kind == ObjectiveKind::F1 || kind == ObjectiveKind::F4) {
    obj.s_x = similarity_target(r, SimilarityAxis::Datasets).matrix;
  }
  if (kind == ObjectiveKind::F2 || kind == ObjectiveKind::F4) {
    obj.s_a = similarity_target(r, SimilarityAxis::Workflows).matrix;
  }
  return obj;
}

ObjectiveTerms objective_terms(const Objective& obj, const HyperParams& hyper, const Matrix& u,
                               const Matrix& v) {
  check_factors(obj, u, v);
  ObjectiveTerms terms;
  const ObjectiveKind kind = obj.kind;
  Matrix xu;
  Matrix av;
  if (uses_x_fit(kind, hyper) || uses_r_fit(kind, hyper)) xu = obj.x * u;
  if (uses_a_fit(kind, hyper) || uses_r_fit(kind, hyper)) av = obj.a * v;

  if (uses_x_fit(kind, hyper)) terms.fit_x = (obj.s_x - xu * xu.transpose()).squaredNorm();
  if (uses_a_fit(kind, hyper)) terms.fit_a = (obj.s_a - av * av.transpose()).squaredNorm();
  if (uses_r_fit(kind, hyper)) terms.fit_r = (obj.r - xu * av.transpose()).squaredNorm();
  terms.norm_u = u.squaredNorm();
  terms.norm_v = v.squaredNorm();

  double total = 0.0;
  if (uses_x_fit(kind, hyper)) total += weight_x(kind, hyper) * terms.fit_x;
  if (uses_a_fit(kind, hyper)) total += weight_a(kind, hyper) * terms.fit_a;
  if (uses_r_fit(kind, hyper)) total += weight_r(kind, hyper) * terms.fit_r;
  if (reg_u(kind, hyper) != 0.0) total += reg_u(kind, hyper) * terms.norm_u;
  if (reg_v(kind, hyper) != 0.0) total += reg_v(kind, hyper) * terms.norm_v;
  terms.total = total;
  return terms;
}

double objective_value(const Objective& obj, const HyperParams& hyper, const Matrix& u,
                       const Matrix& v) {
  return objective_terms(obj, hyper, u, v).total;
}

Gradient gradient(const Objective& obj, const HyperParams& hyper, const Matrix& u,
                  const Matrix& v) {
  check_factors(obj, u, v);
  const ObjectiveKind kind = obj.kind;
  Gradient g{Matrix::Zero(u.rows(), u.cols()), Matrix::Zero(v.rows(), v.cols())};
  Matrix xu;
  Matrix av;
  if (uses_x_fit(kind, hyper) || uses_r_fit(kind, hyper)) xu = obj.x * u;
  if (uses_a_fit(kind, hyper) || uses_r_fit(kind, hyper)) av = obj.a * v;

  if (uses_x_fit(kind, hyper)) {
    const Matrix residual = obj.s_x - xu * xu.transpose();
    g.u += (-4.0 * weight_x(kind, hyper)) * (obj.x.transpose() * (residual * xu));
  }
  if (uses_a_fit(kind, hyper)) {
    const Matrix residual = obj.s_a - av * av.transpose();
    g.v += (-4.0 * weight_a(kind, hyper)) * (obj.a.transpose() * (residual * av));
  }
  if (uses_r_fit(kind, hyper)) {
    const Matrix residual = obj.r - xu * av.transpose();
    const double w = -2.0 * weight_r(kind, hyper);
    g.u += w * (obj.x.transpose() * (residual * av));
    g.v += w * (obj.a.transpose() * (residual.transpose() * xu));
  }
  if (reg_u(kind, hyper) != 0.0) g.u += (2.0 * reg_u(kind, hyper)) * u;
  if (reg_v(kind, hyper) != 0.0) g.v += (2.0 * reg_v(kind, hyper)) * v;
  return g;
}

const char* to_string(Termination reason) {
  switch (reason) {
    case Termination::RelTol: return "rel_tol";
    case Termination::MaxIters: return "max_iters";
    case Termination::LineSearchFailure: return "line_search_failure";
  }
  return "?";
}

Termination termination_from_string(const std::string& name) {
  if (name == "rel_tol") return Termination::RelTol;
  if (name == "max_iters") return Termination::MaxIters;
  if (name == "line_search_failure") return Termination::LineSearchFailure;
  throw Error("unknown termination '" + name + "'");
}

int default_rank(const Objective& obj) {
  int rank_x = obj.x.size() ? numeric_rank(obj.x) : 0;
  int rank_a = obj.a.size() ? numeric_rank(obj.a) : 0;
  int t = 0;
  if (rank_x > 0 && rank_a > 0) {
    t = std::min(rank_x, rank_a);
  } else {
    t = std::max(rank_x, rank_a);
  }
  return std::max(t, 1);
}

Factors initialize(const Objective& obj, const HyperParams& hyper, int t) {
  if (t <= 0) throw Error("projection dimensionality t must be positive");
  std::mt19937_64 rng(hyper.seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(t));
  Factors f{Matrix(obj.d(), t), Matrix(obj.l(), t)};
  fill_gaussian(f.u, rng, scale);
  fill_gaussian(f.v, rng, scale);
  if (hyper.init == InitKind::SeededGaussian) return f;

  switch (obj.kind) {
    case ObjectiveKind::F1:
      f.u = symmetric_warm_start(obj.x, obj.s_x, t);
      break;
    case ObjectiveKind::F2:
      f.v = symmetric_warm_start(obj.a, obj.s_a, t);
      break;
    case ObjectiveKind::F3:
    case ObjectiveKind::F4: {
      Eigen::JacobiSVD<Matrix> svd(obj.r, Eigen::ComputeThinU | Eigen::ComputeThinV);
      const Eigen::Index k = std::min<Eigen::Index>(t, svd.singularValues().size());
      Matrix left = Matrix::Zero(obj.r.rows(), t);
      Matrix right = Matrix::Zero(obj.r.cols(), t);
      for (Eigen::Index c = 0; c < k; ++c) {
        const double root = std::sqrt(svd.singularValues()(c));
        left.col(c) = svd.matrixU().col(c) * root;
        right.col(c) = svd.matrixV().col(c) * root;
      }
      f.u = pseudo_inverse(obj.x) * left;
      f.v = pseudo_inverse(obj.a) * right;
      break;
    }
  }
  return f;
}

TrainResult descend(const Objective& obj, const HyperParams& hyper, Factors start) {
  constexpr double kShrink = 0.5;
  constexpr double kArmijo = 1e-4;
  constexpr int kMaxBacktracks = 60;

  TrainResult result{std::move(start), {}};
  Factors& cur = result.factors;
  TrainTrace& trace = result.trace;

  double f = objective_value(obj, hyper, cur.u, cur.v);
  Gradient g = gradient(obj, hyper, cur.u, cur.v);
  double g2 = g.u.squaredNorm() + g.v.squaredNorm();
  trace.objective.push_back(f);
  trace.gradient_norms.push_back(std::sqrt(g2));
  trace.termination = Termination::MaxIters;

  Factors prev;
  Gradient prev_g;
  double step = 0.0;
  for (int iter = 0; iter < hyper.max_iters; ++iter) {
    if (g2 == 0.0) {
      trace.termination = Termination::RelTol;
      break;
    }
    double trial = 1.0 / std::sqrt(g2);
    if (iter > 0) {
      // Barzilai-Borwein length from the last displacement.
      const double ss = (cur.u - prev.u).squaredNorm() + (cur.v - prev.v).squaredNorm();
      const double sy = (cur.u - prev.u).cwiseProduct(g.u - prev_g.u).sum() +
                        (cur.v - prev.v).cwiseProduct(g.v - prev_g.v).sum();
      trial = sy > 0.0 ? ss / sy : 2.0 * step;
    }

    Factors next;
    double f_next = std::numeric_limits<double>::quiet_NaN();
    bool accepted = false;
    for (int k = 0; k <= kMaxBacktracks; ++k) {
      next.u = cur.u - trial * g.u;
      next.v = cur.v - trial * g.v;
      f_next = objective_value(obj, hyper, next.u, next.v);
      if (f_next <= f - kArmijo * trial * g2) {
        accepted = true;
        break;
      }
      trial *= kShrink;
    }
    if (!accepted) {
      trace.termination = Termination::LineSearchFailure;
      break;
    }

    prev = std::move(cur);
    prev_g = std::move(g);
    cur = std::move(next);
    step = trial;
    g = gradient(obj, hyper, cur.u, cur.v);
    g2 = g.u.squaredNorm() + g.v.squaredNorm();

    const double decrease = f - f_next;
    const double rel = f > 0.0 ? decrease / f : 0.0;
    f = f_next;
    trace.objective.push_back(f);
    trace.step_sizes.push_back(step);
    trace.gradient_norms.push_back(std::sqrt(g2));
    if (rel < hyper.rel_tol) {
      trace.termination = Termination::RelTol;
      break;
    }
  }
  return result;
}

TrainResult train(const Objective& obj, const HyperParams& hyper) {
  const int t = hyper.t.value_or(default_rank(obj));
  return descend(obj, hyper, initialize(obj, hyper, t));
}

FittedModel fit_model(ObjectiveKind kind, const HyperParams& hyper, const DescriptorTable& x,
                      const DescriptorTable& a, const Matrix& r) {
  auto [x_std, x_record] = standardize(x);
  auto [a_std, a_record] = standardize(a);
  const Objective obj = make_objective(kind, x_std.features, a_std.features, r);
  TrainResult trained = train(obj, hyper);

  FittedModel model;
  model.params.objective = kind;
  model.params.u = std::move(trained.factors.u);
  model.params.v = std::move(trained.factors.v);
  model.params.t = static_cast<int>(model.params.u.cols());
  model.params.hyper = hyper;
  model.params.x_standardization = std::move(x_record);
  model.params.a_standardization = std::move(a_record);
  model.trace = std::move(trained.trace);
  return model;
}

namespace presets {

const HyperParams& TaskPreset::for_objective(ObjectiveKind kind) const {
  switch (kind) {
    case ObjectiveKind::F1: return f1;
    case ObjectiveKind::F2: return f2;
    case ObjectiveKind::F3: return f3;
    case ObjectiveKind::F4: return f4;
  }
  return f4;
}

namespace {

HyperParams f4_setting(double mu1, double mu2) {
  HyperParams h;
  h.alpha = 1e-10;
  h.beta = 1e-3;
  h.gamma = 1e-3;
  h.mu1 = mu1;
  h.mu2 = mu2;
  return h;
}

}  // namespace

TaskPreset task1() {
  TaskPreset p;
  p.f1.mu1 = 0.5;
  p.f1.n_neighbors = 5;
  p.f2 = p.f1;
  p.f2.mu2 = 0.5;
  p.f3.mu1 = 0.5;
  p.f3.mu2 = 0.5;
  p.f4 = f4_setting(10.0, 0.0);
  return p;
}

TaskPreset task2() {
  TaskPreset p;
  p.f2.mu2 = 10.0;
  p.f2.n_neighbors = 5;
  p.f1 = p.f2;
  p.f1.mu1 = 10.0;
  p.f3.mu1 = 10.0;
  p.f3.mu2 = 10.0;
  p.f4 = f4_setting(0.5, 0.0);
  return p;
}

TaskPreset task3() {
  TaskPreset p = task1();
  p.f3.mu1 = 10.0;
  p.f3.mu2 = 10.0;
  p.f4 = f4_setting(10.0, 0.0);
  return p;
}

TaskPreset by_name(const std::string& name) {
  if (name == "task1") return task1();
  if (name == "task2") return task2();
  if (name == "task3") return task3();
  throw Error("unknown preset '" + name + "'");
}

}  // namespace presets

}  // namespace metamine
