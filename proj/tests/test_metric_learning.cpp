#include <doctest.h>

#include "gradcheck.hpp"
#include "metamine/metric_learning.hpp"
#include "support.hpp"

using namespace metamine;

namespace {

constexpr ObjectiveKind kAll[] = {ObjectiveKind::F1, ObjectiveKind::F2, ObjectiveKind::F3,
                                  ObjectiveKind::F4};

double loop_bilinear_fit(const Matrix& target, const Matrix& left, const Matrix& p, const Matrix& q,
                         const Matrix& right) {
  // sum_ij (target_ij - sum_k (left_i . p_k)(right_j . q_k))^2
  double total = 0.0;
  for (Eigen::Index i = 0; i < target.rows(); ++i) {
    for (Eigen::Index j = 0; j < target.cols(); ++j) {
      double pred = 0.0;
      for (Eigen::Index k = 0; k < p.cols(); ++k) {
        double lp = 0.0, rq = 0.0;
        for (Eigen::Index a = 0; a < left.cols(); ++a) lp += left(i, a) * p(a, k);
        for (Eigen::Index b = 0; b < right.cols(); ++b) rq += right(j, b) * q(b, k);
        pred += lp * rq;
      }
      total += (target(i, j) - pred) * (target(i, j) - pred);
    }
  }
  return total;
}

double sq(const Matrix& m) { return m.squaredNorm(); }

// Noiseless bilinear problem: R = X U* V*^T A^T.
struct Planted {
  Matrix x, a, u, v, r;
};

Planted planted(std::uint64_t seed, int n, int m, int d, int l, int t) {
  std::mt19937_64 rng(seed);
  Planted p;
  p.x = testing::random_matrix(n, d, rng);
  p.a = testing::random_matrix(m, l, rng);
  p.u = testing::random_matrix(d, t, rng);
  p.v = testing::random_matrix(l, t, rng);
  p.r = p.x * p.u * p.v.transpose() * p.a.transpose();
  return p;
}

}  // namespace

TEST_CASE("objective terms match naive loops") {
  for (ObjectiveKind kind : kAll) {
    const auto inst = gradcheck::random_instance(kind, 99);
    const Objective& o = inst.objective;
    const HyperParams& h = inst.hyper;
    const double fx = loop_bilinear_fit(o.s_x, o.x, inst.u, inst.u, o.x);
    const double fa = loop_bilinear_fit(o.s_a, o.a, inst.v, inst.v, o.a);
    const double fr = loop_bilinear_fit(o.r, o.x, inst.u, inst.v, o.a);
    double want = 0.0;
    switch (kind) {
      case ObjectiveKind::F1: want = fx + h.mu1 * sq(inst.u); break;
      case ObjectiveKind::F2: want = fa + h.mu2 * sq(inst.v); break;
      case ObjectiveKind::F3: want = fr + h.mu1 * sq(inst.u) + h.mu2 * sq(inst.v); break;
      case ObjectiveKind::F4:
        want = h.alpha * fx + h.beta * fa + h.gamma * fr + h.mu1 * sq(inst.u) + h.mu2 * sq(inst.v);
        break;
    }
    CHECK(objective_value(o, h, inst.u, inst.v) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("F3 at zero parameters equals the squared norm of R") {
  const auto inst = gradcheck::random_instance(ObjectiveKind::F3, 4);
  const Matrix u0 = Matrix::Zero(inst.u.rows(), 2), v0 = Matrix::Zero(inst.v.rows(), 2);
  CHECK(objective_value(inst.objective, inst.hyper, u0, v0) ==
        doctest::Approx(inst.objective.r.squaredNorm()).epsilon(1e-14));
}

TEST_CASE("F3 is zero at the planted parameters and the gradient vanishes") {
  const Planted p = planted(7, 10, 7, 5, 4, 2);
  const Objective o = make_objective(ObjectiveKind::F3, p.x, p.a, p.r);
  HyperParams h;
  h.mu1 = h.mu2 = 0.0;
  CHECK(objective_value(o, h, p.u, p.v) < 1e-20 * p.r.squaredNorm());
  const Gradient g = gradient(o, h, p.u, p.v);
  CHECK(g.u.cwiseAbs().maxCoeff() < 1e-9);
  CHECK(g.v.cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("analytic gradients agree with central differences") {
  for (ObjectiveKind kind : kAll) {
    CAPTURE(to_string(kind));
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      CHECK(gradcheck::max_relative_error(gradcheck::random_instance(kind, 1000 + seed)) < 1e-5);
    }
  }
}

TEST_CASE("regularizer-only gradient when the data term is fitted exactly") {
  auto inst = gradcheck::random_instance(ObjectiveKind::F1, 12);
  inst.objective.s_x = inst.objective.x * inst.u * inst.u.transpose() * inst.objective.x.transpose();
  inst.hyper.mu1 = 0.7;
  const Gradient g = gradient(inst.objective, inst.hyper, inst.u, inst.v);
  CHECK((g.u - 2.0 * 0.7 * inst.u).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("F4 with only alpha and no mu2 equals F1") {
  const auto f1 = gradcheck::random_instance(ObjectiveKind::F1, 31);
  Objective f4 = f1.objective;
  f4.kind = ObjectiveKind::F4;
  HyperParams h = f1.hyper;
  h.alpha = 1.0;
  h.beta = 0.0;
  h.gamma = 0.0;
  h.mu2 = 0.0;
  CHECK(objective_value(f4, h, f1.u, f1.v) == objective_value(f1.objective, h, f1.u, f1.v));
}

TEST_CASE("training recovers a noiseless rank-2 bilinear problem") {
  const Planted p = planted(3, 20, 9, 6, 5, 2);
  const Objective o = make_objective(ObjectiveKind::F3, p.x, p.a, p.r);
  HyperParams h;
  h.mu1 = h.mu2 = 0.0;
  h.t = 2;
  h.rel_tol = 1e-14;
  h.max_iters = 20000;
  const TrainResult res = train(o, h);
  CHECK(testing::non_increasing(res.trace));
  CHECK(res.trace.objective.back() < 1e-6 * p.r.squaredNorm());
}

TEST_CASE("every objective descends monotonically") {
  for (ObjectiveKind kind : kAll) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      auto inst = gradcheck::random_instance(kind, 500 + seed, 12, 7, 5, 4, 3);
      inst.hyper.max_iters = 400;
      inst.hyper.seed = seed;
      const TrainResult res = train(inst.objective, inst.hyper);
      CHECK(testing::non_increasing(res.trace));
      CHECK(res.trace.objective.size() == res.trace.step_sizes.size() + 1);
      CHECK(res.trace.objective.back() < res.trace.objective.front());
    }
  }
}

TEST_CASE("max_iters = 0 returns the initialization") {
  const auto inst = gradcheck::random_instance(ObjectiveKind::F4, 8);
  HyperParams h = inst.hyper;
  h.max_iters = 0;
  h.seed = 77;
  h.t = 2;
  const TrainResult res = train(inst.objective, h);
  const Factors init = initialize(inst.objective, h, 2);
  CHECK(res.factors.u == init.u);
  CHECK(res.factors.v == init.v);
  CHECK(res.trace.iterations() == 0);
  CHECK(res.trace.termination == Termination::MaxIters);
}

TEST_CASE("same seed gives an identical trace; a different seed does not") {
  const auto inst = gradcheck::random_instance(ObjectiveKind::F4, 9);
  HyperParams h = inst.hyper;
  h.max_iters = 200;
  h.seed = 5;
  const TrainResult a = train(inst.objective, h);
  const TrainResult b = train(inst.objective, h);
  CHECK(a.trace == b.trace);
  CHECK(a.factors.u == b.factors.u);
  h.seed = 6;
  CHECK_FALSE(train(inst.objective, h).trace == a.trace);
}

TEST_CASE("default rank is min(rank X, rank A)") {
  const Planted p = planted(1, 10, 8, 6, 3, 2);
  Matrix x = p.x;
  x.col(5) = x.col(0);
  x.col(4) = x.col(1);
  const Objective o = make_objective(ObjectiveKind::F3, x, p.a, p.r);
  CHECK(default_rank(o) == 3);
  Matrix a = p.a;
  a.col(2) = a.col(1);
  CHECK(default_rank(make_objective(ObjectiveKind::F3, p.x, a, p.r)) == 2);
}

TEST_CASE("SVD warm start begins closer than a Gaussian start") {
  const Planted p = planted(13, 25, 10, 6, 5, 3);
  const Objective o = make_objective(ObjectiveKind::F3, p.x, p.a, p.r);
  HyperParams h;
  h.mu1 = h.mu2 = 0.0;
  h.t = 3;
  h.max_iters = 0;
  const double gaussian_start = train(o, h).trace.objective.front();
  h.init = InitKind::SvdWarmStart;
  const TrainResult warm = train(o, h);
  CHECK(warm.trace.objective.front() < gaussian_start);
  CHECK(warm.trace.objective.front() < 1e-12 * p.r.squaredNorm());
}

TEST_CASE("fit_model stores standardization and is invariant to feature scaling") {
  std::mt19937_64 rng(21);
  const DescriptorTable x = testing::table(testing::random_matrix(12, 4, rng), EntityKind::Dataset, "d");
  const DescriptorTable a = testing::table(testing::random_matrix(6, 3, rng), EntityKind::Workflow, "w");
  const Matrix r = testing::random_matrix(12, 6, rng);
  HyperParams h;
  h.max_iters = 100;
  const FittedModel base = fit_model(ObjectiveKind::F3, h, x, a, r);
  CHECK(base.params.x_standardization.feature_names == x.feature_names);
  CHECK(testing::non_increasing(base.trace));

  DescriptorTable scaled = x;
  scaled.features = (x.features.array() * 7.0 + 3.0).matrix();
  const FittedModel moved = fit_model(ObjectiveKind::F3, h, scaled, a, r);
  CHECK(moved.trace.objective.front() == doctest::Approx(base.trace.objective.front()).epsilon(1e-12));
  HyperParams few = h;
  few.max_iters = 10;
  const auto u0 = fit_model(ObjectiveKind::F3, few, x, a, r).params.u;
  const auto u1 = fit_model(ObjectiveKind::F3, few, scaled, a, r).params.u;
  CHECK((u0 - u1).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("presets carry the reference settings") {
  const auto t1 = presets::task1();
  CHECK(t1.f1.mu1 == 0.5);
  CHECK(t1.f1.n_neighbors == 5);
  CHECK(t1.f4.alpha == 1e-10);
  CHECK(t1.f4.beta == 1e-3);
  CHECK(t1.f4.gamma == 1e-3);
  CHECK(t1.f4.mu1 == 10);
  CHECK(t1.f4.mu2 == 0);
  const auto t2 = presets::task2();
  CHECK(t2.f2.mu2 == 10);
  CHECK(t2.f3.mu1 == 10);
  CHECK(t2.f4.mu1 == 0.5);
  const auto t3 = presets::by_name("task3");
  CHECK(t3.f3.mu2 == 10);
  CHECK(t3.f4.mu1 == 10);
  CHECK_THROWS_AS(presets::by_name("task9"), Error);
}

TEST_CASE("termination names round trip") {
  for (Termination t : {Termination::RelTol, Termination::MaxIters, Termination::LineSearchFailure}) {
    CHECK(termination_from_string(to_string(t)) == t);
  }
}
