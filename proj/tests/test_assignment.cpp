#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "doctest.h"
#include "lbw/assignment.hpp"

using namespace lbw;

namespace {

// Exhaustive oracle: scan permutations in lexicographic order with strict
// improvement, so the first minimum (the lexicographically smallest optimal
// pair list) wins.
MatchMatrix brute_force(const Eigen::MatrixXd& cost) {
  const int k = static_cast<int>(cost.rows());
  std::vector<int> perm(static_cast<size_t>(k));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best = perm;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (int i = 0; i < k; ++i) total += cost(i, perm[static_cast<size_t>(i)]);
    if (total < best_cost) {
      best_cost = total;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  MatchMatrix m;
  m.k = k;
  for (int i = 0; i < k; ++i) m.pairs.emplace_back(i, best[static_cast<size_t>(i)]);
  double total = 0.0;
  for (int i = 0; i < k; ++i) total += cost(i, best[static_cast<size_t>(i)]);
  m.total_cost = total;
  return m;
}

bool is_permutation_matching(const MatchMatrix& m) {
  std::vector<char> rows(static_cast<size_t>(m.k), 0), cols(static_cast<size_t>(m.k), 0);
  for (const auto& [i, j] : m.pairs) {
    if (i < 0 || i >= m.k || j < 0 || j >= m.k) return false;
    if (rows[static_cast<size_t>(i)] || cols[static_cast<size_t>(j)]) return false;
    rows[static_cast<size_t>(i)] = cols[static_cast<size_t>(j)] = 1;
  }
  return m.pairs.size() == static_cast<size_t>(m.k);
}

Eigen::VectorXd vec1(double v) {
  Eigen::VectorXd out(1);
  out << v;
  return out;
}

}  // namespace

TEST_CASE("mean_cost_matrix squared distances") {
  const std::vector<Eigen::VectorXd> a{vec1(0), vec1(10)};
  const std::vector<Eigen::VectorXd> b{vec1(1), vec1(9)};
  const Eigen::MatrixXd c = mean_cost_matrix(a, b);
  CHECK(c(0, 0) == 1.0);
  CHECK(c(0, 1) == 81.0);
  CHECK(c(1, 0) == 81.0);
  CHECK(c(1, 1) == 1.0);
  CHECK((c.array() >= 0.0).all());

  const Eigen::MatrixXd zero_diag = mean_cost_matrix(a, a);
  CHECK(zero_diag(0, 0) == 0.0);
  CHECK(zero_diag(1, 1) == 0.0);
}

TEST_CASE("mean_cost_matrix validation") {
  const std::vector<Eigen::VectorXd> a{vec1(0)};
  const std::vector<Eigen::VectorXd> two{vec1(0), vec1(1)};
  CHECK_THROWS_AS(mean_cost_matrix(a, two), Error);

  Eigen::VectorXd v2(2);
  v2 << 0, 0;
  const std::vector<Eigen::VectorXd> mixed{v2};
  CHECK_THROWS_AS(mean_cost_matrix(a, mixed), Error);
}

TEST_CASE("hungarian trivial cases") {
  Eigen::MatrixXd one(1, 1);
  one << 3.5;
  const MatchMatrix m1 = hungarian(one);
  CHECK(m1.pairs == std::vector<std::pair<int, int>>{{0, 0}});
  CHECK(m1.total_cost == 3.5);

  Eigen::MatrixXd swap(2, 2);
  swap << 0, 1, 1, 0;
  const MatchMatrix m2 = hungarian(swap);
  CHECK(m2.pairs == std::vector<std::pair<int, int>>{{0, 0}, {1, 1}});
  CHECK(m2.total_cost == 0.0);
}

TEST_CASE("hungarian picks the cheaper crossing") {
  Eigen::MatrixXd cost(2, 2);
  cost << 4, 1, 2, 8;
  const MatchMatrix m = hungarian(cost);
  // 1 + 2 = 3 beats 4 + 8 = 12.
  CHECK(m.pairs == std::vector<std::pair<int, int>>{{0, 1}, {1, 0}});
  CHECK(m.total_cost == 3.0);
}

TEST_CASE("hungarian breaks ties to the lexicographically smallest pairs") {
  Eigen::MatrixXd flat = Eigen::MatrixXd::Ones(4, 4);
  const MatchMatrix m = hungarian(flat);
  CHECK(m.pairs == std::vector<std::pair<int, int>>{{0, 0}, {1, 1}, {2, 2}, {3, 3}});
  CHECK(m.total_cost == 4.0);

  // 1+4 == 2+3: a genuine tie between the two 2x2 matchings.
  Eigen::MatrixXd tied(2, 2);
  tied << 1, 2, 3, 4;
  const MatchMatrix t = hungarian(tied);
  CHECK(t.pairs == std::vector<std::pair<int, int>>{{0, 0}, {1, 1}});
  CHECK(t.total_cost == 5.0);
}

TEST_CASE("hungarian equals the brute-force oracle exactly") {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> unif(0.0, 10.0);
  for (int k = 2; k <= 6; ++k) {
    for (int trial = 0; trial < 200; ++trial) {
      Eigen::MatrixXd cost(k, k);
      for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) cost(i, j) = unif(rng);
      }
      const MatchMatrix fast = hungarian(cost);
      const MatchMatrix slow = brute_force(cost);
      CHECK(fast.total_cost == slow.total_cost);
      CHECK(is_permutation_matching(fast));
    }
  }
}

TEST_CASE("hungarian equals the oracle pairs on integer ties") {
  std::mt19937_64 rng(103);
  std::uniform_int_distribution<int> small(0, 3);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 2 + trial % 4;
    Eigen::MatrixXd cost(k, k);
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) cost(i, j) = static_cast<double>(small(rng));
    }
    const MatchMatrix fast = hungarian(cost);
    const MatchMatrix slow = brute_force(cost);
    CHECK(fast.total_cost == slow.total_cost);
    CHECK(fast.pairs == slow.pairs);
  }
}

TEST_CASE("hungarian error paths") {
  Eigen::MatrixXd rect(2, 3);
  rect.setZero();
  CHECK_THROWS_AS(hungarian(rect), Error);

  Eigen::MatrixXd with_nan(2, 2);
  with_nan << 1, 2, std::numeric_limits<double>::quiet_NaN(), 3;
  try {
    hungarian(with_nan);
    FAIL("expected kNonFiniteCost");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNonFiniteCost);
  }
}

TEST_CASE("inverse_partner inverts partner") {
  Eigen::MatrixXd cost(3, 3);
  cost << 5, 1, 9,
          1, 9, 5,
          9, 5, 1;
  const MatchMatrix m = hungarian(cost);
  for (int i = 0; i < 3; ++i) {
    CHECK(m.inverse_partner(m.partner(i)) == i);
  }
}
