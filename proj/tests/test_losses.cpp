#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "rfm/losses.hpp"

using namespace rfm;

namespace {

ad::Classifier make_classifier(const Matrix& W, const Vec& b) {
  ad::Classifier clf(W.rows(), W.cols(), 1);
  clf.weight_param().value = W;
  clf.bias_param().value = Matrix::row(b);
  return clf;
}

Vec random_radii(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 3.0);
  Vec r(n);
  for (double& x : r) x = u(rng);
  return r;
}

}  // namespace

TEST_CASE("task loss examples") {
  auto zero = make_classifier(Matrix(4, 2), Vec(4, 0.0));
  CHECK(std::abs(task_loss(zero, Matrix{{0.3, -0.2}}, {3}) - std::log(4.0)) < 1e-15);
  CHECK(std::abs(task_loss(zero, Matrix{{0.3, -0.2}}, {3}) - 1.386294) < 1e-6);

  auto id = make_classifier(Matrix::identity(2), {0.0, 0.0});
  const double e2 = oracle::exp_series(2.0);
  CHECK(std::abs(task_loss(id, Matrix{{2.0, 0.0}}, {0}) - (-std::log(e2 / (e2 + 1.0)))) < 1e-14);
  CHECK(std::abs(task_loss(id, Matrix{{2.0, 0.0}}, {0}) - 0.126928) < 1e-6);
  CHECK(task_loss(id, Matrix{{60.0, 0.0}}, {0}) < 1e-20);

  CHECK_THROWS_AS(task_loss(id, Matrix{{1.0, 0.0}}, {2}), LabelOutOfRange);
}

TEST_CASE("task loss tape form agrees") {
  std::mt19937_64 rng(3);
  ad::Classifier clf(3, 4, 9);
  const Matrix v = oracle::random_matrix(rng, 6, 4);
  const std::vector<std::size_t> y{0, 1, 2, 2, 1, 0};
  ad::Tape t;
  CHECK(std::abs(task_loss(t, clf, t.constant(v), y).item() - task_loss(clf, v, y)) < 1e-14);
}

TEST_CASE("radial wasserstein examples") {
  CHECK(radial_wasserstein(Vec{0.5, 1.0, 2.0}, Vec{2.0, 0.5, 1.0}) == 0.0);
  CHECK(radial_wasserstein(Vec{0.0, 1.0}, Vec{1.0, 2.0}) == 1.0);
  CHECK(oracle::brute_force_w1({0.0, 1.0}, {1.0, 2.0}) == 1.0);
  CHECK(radial_wasserstein(Vec{5.0}, Vec{2.0}) == 3.0);
  CHECK_THROWS_AS(radial_wasserstein(Vec{1.0}, Vec{1.0, 2.0}), BatchSizeMismatch);
  CHECK_THROWS_AS(radial_wasserstein(Vec{}, Vec{}), EmptyBatch);
}

TEST_CASE("radial wasserstein equals brute-force assignment") {
  std::mt19937_64 rng(17);
  for (int k = 0; k < 200; ++k) {
    const std::size_t n = 1 + k % 6;
    const Vec a = random_radii(rng, n), b = random_radii(rng, n);
    CHECK(std::abs(radial_wasserstein(a, b) - oracle::brute_force_w1(a, b)) < 1e-12);
  }
}

TEST_CASE("radial wasserstein is a pseudometric") {
  std::mt19937_64 rng(23);
  for (int k = 0; k < 200; ++k) {
    const Vec a = random_radii(rng, 5), b = random_radii(rng, 5), c = random_radii(rng, 5);
    const double ab = radial_wasserstein(a, b);
    CHECK(ab >= 0.0);
    CHECK(ab == radial_wasserstein(b, a));
    CHECK(ab <= radial_wasserstein(a, c) + radial_wasserstein(c, b) + 1e-12);
  }
}

TEST_CASE("radial wasserstein tape form and gradient") {
  std::mt19937_64 rng(2);
  const Matrix a = Matrix::column(random_radii(rng, 5));
  const Matrix b = Matrix::column(random_radii(rng, 5));
  ad::Tape t;
  CHECK(std::abs(radial_wasserstein(t.constant(a), t.constant(b)).item() -
                 radial_wasserstein(a.data(), b.data())) < 1e-14);
  const double err = oracle::gradient_check(
      [](ad::Tape&, const std::vector<ad::Var>& v) { return radial_wasserstein(v[0], v[1]); }, {a, b});
  CHECK(err < 1e-6);
}

TEST_CASE("angular gate examples") {
  const double l9 = std::log(9.0);
  auto clf = make_classifier(Matrix{{1.0, 0.0}, {0.0, 1.0}}, {0.0, 0.0});
  const auto r = angular_gate(clf, Matrix{{l9, 0.0}, {0.0, 0.0}, {0.6, 0.8}}, 0.7);
  CHECK(std::abs(r.confidence[0] - 0.9) < 1e-14);
  CHECK(r.mask[0]);
  CHECK(r.pseudo_label[0] == 0);
  CHECK(r.confidence[1] == 0.5);
  CHECK_FALSE(r.mask[1]);
  CHECK(std::abs(r.weight[2] - 1.0 / oracle::exp_series(1.0)) < 1e-15);
  CHECK(std::abs(r.weight[2] - 0.367879) < 1e-6);
  CHECK_FALSE(r.mask[2]);
  CHECK(r.gated() == 1);
  CHECK(std::abs(r.effective_count - r.weight[0]) < 1e-15);

  // Bias is ignored by the gate.
  auto biased = make_classifier(Matrix{{1.0, 0.0}, {0.0, 1.0}}, {0.0, 50.0});
  CHECK(angular_gate(biased, Matrix{{l9, 0.0}}, 0.7).pseudo_label[0] == 0);
}

TEST_CASE("raising the gate threshold never admits more samples") {
  std::mt19937_64 rng(5);
  ad::Classifier clf(3, 4, 2);
  const Matrix v = oracle::random_matrix(rng, 64, 4, -3.0, 3.0);
  std::size_t prev = 65;
  for (double z = 0.34; z < 1.0; z += 0.05) {
    const std::size_t g = angular_gate(clf, v, z).gated();
    CHECK(g <= prev);
    prev = g;
  }
}

TEST_CASE("angular loss examples") {
  auto clf = make_classifier(Matrix{{1.0, 0.0}, {-1.0, 0.0}}, {0.0, 0.0});
  const Matrix v{{2.0, 0.0}};
  const auto r = angular_gate(clf, v, 0.7);
  REQUIRE(r.mask[0]);
  const double want = std::log1p(1.0 / oracle::exp_series(20.0));
  const double got = angular_loss(clf, v, r);
  CHECK(std::abs(got - want) < 1e-14);
  CHECK(std::abs(got - 2.06e-9) < 1e-11);

  auto none = angular_gate(clf, Matrix{{0.0, 1.0}}, 0.7);
  CHECK_FALSE(none.mask[0]);
  CHECK(angular_loss(clf, Matrix{{0.0, 1.0}}, none) == 0.0);
}

TEST_CASE("cosine similarity is scale invariant") {
  std::mt19937_64 rng(14);
  const Matrix v = oracle::random_matrix(rng, 5, 3), w = oracle::random_matrix(rng, 4, 3);
  const Matrix s = cosine_similarity(v, w);
  Matrix v2 = v, w2 = w;
  for (double& x : v2.data()) x *= 4.0;
  for (double& x : w2.data()) x *= 0.5;
  CHECK(cosine_similarity(v2, w2).data() == s.data());
  for (double x : s.data()) CHECK(std::abs(x) <= 1.0 + 1e-15);
}

TEST_CASE("angular loss tape form and classifier gradient") {
  std::mt19937_64 rng(10);
  ad::Classifier clf(3, 4, 1);
  const Matrix v = oracle::random_matrix(rng, 16, 4, -3.0, 3.0);
  const auto r = angular_gate(clf, v, 0.4);
  REQUIRE(r.gated() > 0);
  {
    ad::Tape t;
    CHECK(std::abs(angular_loss(t, clf, t.constant(v), r).item() - angular_loss(clf, v, r)) < 1e-12);
  }
  auto build = [&](ad::Tape& t) { return angular_loss(t, clf, t.constant(v), r, 2.0); };
  const double err = oracle::parameter_gradient_check(
      [&] {
        ad::Tape t;
        return build(t).item();
      },
      [&] {
        ad::Tape t;
        t.backward(build(t));
      },
      clf.parameters());
  CHECK(err < 1e-4);
}

TEST_CASE("total loss") {
  const auto b = total_loss(1.0, 2.0, 3.0, 4.0, Lambdas{});
  CHECK(std::abs(b.total - 1.9) < 1e-15);
  CHECK(total_loss(1.25, 2.0, 3.0, 4.0, Lambdas{0.0, 0.0, 0.0}).total == 1.25);
  CHECK_THROWS_AS(total_loss(1.0, 1.0, 1.0, 1.0, Lambdas{-0.1, 0.0, 0.0}), InvalidSpec);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int k = 0; k < 100; ++k) {
    const Lambdas l{u(rng), u(rng), u(rng)};
    const auto t = total_loss(u(rng), u(rng), u(rng), u(rng), l);
    CHECK(std::abs(t.task + l.rad * t.rad + l.ang * t.ang + l.fm * t.fm - t.total) < 1e-12);
  }
}
