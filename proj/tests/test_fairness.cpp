#include <cmath>
#include <random>

#include "doctest.h"
#include "lbw/fairness.hpp"
#include "test_util.hpp"

using namespace lbw;
using namespace lbw::fairness;

namespace {

Eigen::VectorXd scores_of(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Eigen::VectorXi labels_of(std::initializer_list<int> v) {
  Eigen::VectorXi out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (int x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST_CASE("dp_gamma basics") {
  // Identical per-group score multisets: no predictability.
  CHECK(dp_gamma(scores_of({0.1, 0.5, 0.1, 0.5}), labels_of({0, 0, 1, 1})) == 0.0);

  // Perfect separation.
  CHECK(dp_gamma(scores_of({0.1, 0.2, 0.8, 0.9}), labels_of({0, 0, 1, 1})) == 1.0);

  // Derived example: group 1 scores {0.3, 0.9}, group 0 scores {0.1, 0.4}.
  CHECK(dp_gamma(scores_of({0.3, 0.9, 0.1, 0.4}), labels_of({1, 1, 0, 0})) ==
        doctest::Approx(0.5));
}

TEST_CASE("dp_gamma is a rank statistic and group-symmetric") {
  std::mt19937_64 rng(7);
  Eigen::VectorXd s(40);
  Eigen::VectorXi z(40);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> coin(0, 1);
  for (Eigen::Index i = 0; i < 40; ++i) {
    z(i) = coin(rng);
    s(i) = normal(rng) + z(i);
  }
  const double base = dp_gamma(s, z);

  // Strictly monotone transforms leave it unchanged.
  const Eigen::VectorXd warped = (3.0 * s).array().exp() + 2.0;
  CHECK(dp_gamma(warped, z) == doctest::Approx(base).epsilon(1e-12));

  // Swapping group labels leaves it unchanged.
  const Eigen::VectorXi flipped = (1 - z.array()).matrix();
  CHECK(dp_gamma(s, flipped) == doctest::Approx(base).epsilon(1e-12));

  // sqrt(2) variant is the same statistic rescaled.
  CHECK(dp_gamma(s, z, true) == doctest::Approx(base / std::sqrt(2.0)));
}

TEST_CASE("dp_gamma error paths") {
  try {
    dp_gamma(scores_of({0.1, 0.2}), labels_of({1, 1}));
    FAIL("expected kSingleGroup");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSingleGroup);
  }
  CHECK_THROWS_AS(dp_gamma(scores_of({0.1}), labels_of({1, 0})), Error);
}

TEST_CASE("auc basics") {
  CHECK(auc(scores_of({0.1, 0.2, 0.8, 0.9}), labels_of({0, 0, 1, 1})) == 1.0);
  CHECK(auc(scores_of({0.9, 0.8, 0.2, 0.1}), labels_of({0, 0, 1, 1})) == 0.0);

  // Derived pair count: 3 of 4 positive-negative pairs ranked correctly.
  CHECK(auc(scores_of({0.9, 0.4, 0.5, 0.1}), labels_of({1, 1, 0, 0})) ==
        doctest::Approx(0.75));

  // All-tied scores give exactly 1/2.
  CHECK(auc(scores_of({0.5, 0.5, 0.5, 0.5}), labels_of({0, 1, 0, 1})) == 0.5);

  try {
    auc(scores_of({0.1, 0.2}), labels_of({1, 1}));
    FAIL("expected kSingleClass");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSingleClass);
  }
}

TEST_CASE("linear scorer separates separable data") {
  std::mt19937_64 rng(11);
  const Eigen::Index n = 400;
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXi y(n);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    y(i) = i % 2;
    const double offset = y(i) == 1 ? 2.5 : -2.5;
    x(i, 0) = offset + normal(rng);
    x(i, 1) = normal(rng);
  }
  const LinearScorer scorer = LinearScorer::fit(x, y, 1e-3);
  CHECK(auc(scorer.score(x), y) > 0.95);
}

TEST_CASE("linear scorer on constant features is uninformative") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Constant(100, 3, 2.0);
  Eigen::VectorXi y(100);
  for (Eigen::Index i = 0; i < 100; ++i) y(i) = i % 2;
  const LinearScorer scorer = LinearScorer::fit(x, y, 1e-3);
  const double a = auc(scorer.score(x), y);
  CHECK(std::abs(a - 0.5) < 0.05);
}

TEST_CASE("linear scorer on label-independent features stays near chance") {
  std::mt19937_64 rng(13);
  const Eigen::Index n = 1000;
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXi y(n);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, 0) = normal(rng);
    x(i, 1) = normal(rng);
    y(i) = i % 2;  // independent of the features
  }
  const LinearScorer scorer = LinearScorer::fit(x, y, 1e-3);
  const double a = auc(scorer.score(x), y);
  CHECK(a > 0.4);
  CHECK(a < 0.6);
}

TEST_CASE("repair on identically distributed groups is a near-identity") {
  std::mt19937_64 rng(17);
  const Eigen::Index n = 1000;
  LabeledDataset data;
  data.features.resize(2 * n, 2);
  data.target.resize(2 * n);
  data.group.resize(2 * n);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    data.features(i, 0) = normal(rng);
    data.features(i, 1) = normal(rng);
    data.target(i) = 0;
    data.group[static_cast<size_t>(i)] = i < n ? "a" : "b";
  }
  const RepairResult result = repair(data, 1);
  double total = 0.0;
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    total += (result.repaired.row(i) - data.features.row(i)).norm();
  }
  CHECK(total / static_cast<double>(2 * n) < 0.1);
}

TEST_CASE("repair pulls both group means to the midpoint") {
  std::mt19937_64 rng(19);
  const Eigen::Index n = 1000;
  LabeledDataset data;
  data.features.resize(2 * n, 1);
  data.target.resize(2 * n);
  data.group.resize(2 * n);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    const bool second = i >= n;
    data.features(i, 0) = normal(rng) + (second ? 4.0 : 0.0);
    data.target(i) = 0;
    data.group[static_cast<size_t>(i)] = second ? "b" : "a";
  }
  const RepairResult result = repair(data, 1);
  const double mean_a = result.repaired.topRows(n).mean();
  const double mean_b = result.repaired.bottomRows(n).mean();
  CHECK(std::abs(mean_a - 2.0) < 0.1);
  CHECK(std::abs(mean_b - 2.0) < 0.1);
}

TEST_CASE("repair with k=1 equals whole-group Gaussian transport") {
  std::mt19937_64 rng(23);
  const Eigen::Index n = 200;
  LabeledDataset data;
  data.features.resize(2 * n, 2);
  data.target.resize(2 * n);
  data.group.resize(2 * n);
  const Eigen::MatrixXd cov_a = test::random_spd(2, rng);
  const Eigen::MatrixXd cov_b = test::random_spd(2, rng);
  data.features.topRows(n) =
      test::sample_gaussian(Eigen::Vector2d(0, 0), cov_a, n, rng);
  data.features.bottomRows(n) =
      test::sample_gaussian(Eigen::Vector2d(3, -1), cov_b, n, rng);
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    data.target(i) = 0;
    data.group[static_cast<size_t>(i)] = i < n ? "a" : "b";
  }
  const RepairResult result = repair(data, 1);

  // Reconstruct the same map from the fitted single components.
  for (const std::string label : {"a", "b"}) {
    const int g = result.model.find_group(label);
    const AffineMap map =
        monge_map(result.model.gmm(g).component(0).params,
                  GaussianParams{result.bary.components[0].mean,
                                 result.bary.components[0].cov});
    for (Eigen::Index i = (g == 0 ? 0 : n); i < (g == 0 ? n : 2 * n); ++i) {
      const Eigen::VectorXd expected = map.apply(data.features.row(i).transpose());
      CHECK((result.repaired.row(i).transpose() - expected).norm() <=
            1e-12 * (1.0 + expected.norm()));
    }
  }
}

TEST_CASE("repair validation") {
  LabeledDataset data;
  data.features = Eigen::MatrixXd::Zero(4, 1);
  data.target = Eigen::VectorXi::Zero(4);
  data.group = {"a", "a", "a", "a"};
  try {
    repair(data, 1);
    FAIL("expected kSingleGroup");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSingleGroup);
  }

  data.group = {"a", "a", "a", "b"};
  try {
    repair(data, 2);  // group b has 1 < k samples
    FAIL("expected kInsufficientData");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInsufficientData);
  }
}
