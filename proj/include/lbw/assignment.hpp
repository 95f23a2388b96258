#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "lbw/error.hpp"

namespace lbw {

/// Perfect matching between two sets of k components, stored as (i, j) pairs
/// sorted by i. Rows and columns each appear exactly once (a permutation).
struct MatchMatrix {
  int k = 0;
  std::vector<std::pair<int, int>> pairs;
  double total_cost = 0.0;

  /// Column matched to row i.
  int partner(int i) const { return pairs[static_cast<size_t>(i)].second; }
  /// Row matched to column j.
  int inverse_partner(int j) const;
};

/// Squared Euclidean distances between mean vectors: C(i, j) = ||a_i - b_j||^2.
Eigen::MatrixXd mean_cost_matrix(const std::vector<Eigen::VectorXd>& means_a,
                                 const std::vector<Eigen::VectorXd>& means_b);

/// Minimum-cost perfect matching of a square cost matrix (Hungarian /
/// Jonker-Volgenant, O(k^3)). Among equal-cost optima the lexicographically
/// smallest pair list is returned.
MatchMatrix hungarian(const Eigen::MatrixXd& cost);

/// The identity matching (i, i) with its cost under `cost`; used for the
/// reference group, where no assignment problem needs solving.
MatchMatrix identity_matching(int k);

}  // namespace lbw
