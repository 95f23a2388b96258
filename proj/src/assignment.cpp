#include "lbw/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace lbw {

namespace {

// Shortest augmenting path solver with dual potentials (Jonker-Volgenant
// flavour). Returns row -> column assignment and the dual vectors, which are
// needed afterwards to identify tight edges.
struct JvResult {
  std::vector<int> row_to_col;
  std::vector<double> u, v;
};

JvResult solve_jv(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, std::numeric_limits<double>::infinity());
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = 0;
      double delta = std::numeric_limits<double>::infinity();
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  JvResult res;
  res.row_to_col.assign(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (p[j]) res.row_to_col[p[j] - 1] = j - 1;
  }
  res.u.assign(u.begin() + 1, u.end());
  res.v.assign(v.begin() + 1, v.end());
  return res;
}

// Kuhn's augmenting-path check: can rows [row..n) be perfectly matched into
// the unused columns of the tight-edge graph?
bool feasible(const std::vector<std::vector<int>>& adj, int first_row, int n,
              std::vector<char> col_used) {
  std::vector<int> col_owner(n, -1);
  std::vector<char> visited(n);
  // Recursive lambda for one augmenting attempt.
  auto try_row = [&](auto&& self, int row) -> bool {
    for (int j : adj[static_cast<size_t>(row)]) {
      if (col_used[static_cast<size_t>(j)] || visited[static_cast<size_t>(j)]) continue;
      visited[static_cast<size_t>(j)] = 1;
      if (col_owner[static_cast<size_t>(j)] < 0 ||
          self(self, col_owner[static_cast<size_t>(j)])) {
        col_owner[static_cast<size_t>(j)] = row;
        return true;
      }
    }
    return false;
  };
  for (int row = first_row; row < n; ++row) {
    std::fill(visited.begin(), visited.end(), 0);
    if (!try_row(try_row, row)) return false;
  }
  return true;
}

double pair_total(const Eigen::MatrixXd& cost, const std::vector<int>& row_to_col) {
  double total = 0.0;
  for (int i = 0; i < static_cast<int>(row_to_col.size()); ++i) {
    total += cost(i, row_to_col[static_cast<size_t>(i)]);
  }
  return total;
}

// Lexicographically smallest perfect matching within the tight-edge graph of
// the optimal duals. Falls back to the solver's assignment if floating-point
// noise lets a spuriously tight edge produce a different total.
std::vector<int> lexicographic_refine(const Eigen::MatrixXd& cost,
                                      const JvResult& jv) {
  const int n = static_cast<int>(cost.rows());
  const double scale = std::max(1.0, cost.cwiseAbs().maxCoeff());
  const double tol = 1e-9 * scale;

  std::vector<std::vector<int>> adj(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (cost(i, j) - jv.u[static_cast<size_t>(i)] - jv.v[static_cast<size_t>(j)] <= tol) {
        adj[static_cast<size_t>(i)].push_back(j);
      }
    }
  }

  std::vector<int> refined(static_cast<size_t>(n), -1);
  std::vector<char> col_used(static_cast<size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    bool fixed = false;
    for (int j : adj[static_cast<size_t>(i)]) {
      if (col_used[static_cast<size_t>(j)]) continue;
      col_used[static_cast<size_t>(j)] = 1;
      if (feasible(adj, i + 1, n, col_used)) {
        refined[static_cast<size_t>(i)] = j;
        fixed = true;
        break;
      }
      col_used[static_cast<size_t>(j)] = 0;
    }
    if (!fixed) return jv.row_to_col;  // tight graph inconsistent, keep solver's
  }

  // Only accept the refinement when it reproduces the optimal total exactly.
  if (pair_total(cost, refined) != pair_total(cost, jv.row_to_col)) {
    return jv.row_to_col;
  }
  return refined;
}

}  // namespace

int MatchMatrix::inverse_partner(int j) const {
  for (const auto& [a, b] : pairs) {
    if (b == j) return a;
  }
  fail(ErrorCode::kInvalidArgument,
       "column " + std::to_string(j) + " is not matched");
}

Eigen::MatrixXd mean_cost_matrix(const std::vector<Eigen::VectorXd>& means_a,
                                 const std::vector<Eigen::VectorXd>& means_b) {
  if (means_a.size() != means_b.size()) {
    fail(ErrorCode::kCountMismatch, "mean lists have different lengths");
  }
  if (means_a.empty()) {
    fail(ErrorCode::kInvalidArgument, "mean lists are empty");
  }
  const Eigen::Index p = means_a.front().size();
  const int k = static_cast<int>(means_a.size());
  Eigen::MatrixXd cost(k, k);
  for (int i = 0; i < k; ++i) {
    if (means_a[static_cast<size_t>(i)].size() != p ||
        means_b[static_cast<size_t>(i)].size() != p) {
      fail(ErrorCode::kDimensionMismatch, "mean vectors have mixed dimensions");
    }
  }
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      cost(i, j) =
          (means_a[static_cast<size_t>(i)] - means_b[static_cast<size_t>(j)]).squaredNorm();
    }
  }
  return cost;
}

MatchMatrix hungarian(const Eigen::MatrixXd& cost) {
  if (cost.rows() == 0 || cost.rows() != cost.cols()) {
    fail(ErrorCode::kInvalidArgument, "cost matrix must be square and nonempty");
  }
  if (!cost.allFinite()) {
    fail(ErrorCode::kNonFiniteCost, "cost matrix contains non-finite entries");
  }
  const int n = static_cast<int>(cost.rows());

  const JvResult jv = solve_jv(cost);
  const std::vector<int> row_to_col = lexicographic_refine(cost, jv);

  MatchMatrix match;
  match.k = n;
  match.pairs.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    match.pairs.emplace_back(i, row_to_col[static_cast<size_t>(i)]);
  }
  match.total_cost = pair_total(cost, row_to_col);
  return match;
}

MatchMatrix identity_matching(int k) {
  if (k <= 0) fail(ErrorCode::kInvalidArgument, "matching needs k >= 1");
  MatchMatrix match;
  match.k = k;
  match.pairs.reserve(static_cast<size_t>(k));
  for (int i = 0; i < k; ++i) match.pairs.emplace_back(i, i);
  match.total_cost = 0.0;
  return match;
}

}  // namespace lbw
