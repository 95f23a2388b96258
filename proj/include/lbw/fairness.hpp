#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "lbw/model.hpp"

namespace lbw::fairness {

struct LabeledDataset {
  Eigen::MatrixXd features;        // n x p
  Eigen::VectorXi target;          // binary labels
  std::vector<std::string> group;  // protected attribute per row
};

struct RepairResult {
  Eigen::MatrixXd repaired;  // transported features, same row order
  LbwModel model;
  BarycenterModel bary;
};

/// Demographic-parity repair: fit one mixture per protected group, build the
/// uniform-weight barycenter, and transport every row to it along its own
/// group's map. Targets are never consulted.
RepairResult repair(const LabeledDataset& data, int k, const GmmConfig& gmm_cfg = {},
                    const BarycenterConfig& bary_cfg = {});

/// Demographic-parity score: the maximum vertical gap |TPR - FPR| of the ROC
/// curve predicting the group label from the scores, i.e. the two-sample
/// Kolmogorov-Smirnov statistic of the per-group score distributions. 0 means
/// the scores carry no group information. With `diagonal_distance` the value
/// is divided by sqrt(2), the geometric distance from the ROC diagonal.
double dp_gamma(const Eigen::VectorXd& scores, const Eigen::VectorXi& group,
                bool diagonal_distance = false);

/// Area under the ROC curve via the rank formulation; ties count 1/2.
double auc(const Eigen::VectorXd& scores, const Eigen::VectorXi& target);

struct LinearScorerConfig {
  int iterations = 400;
  double learning_rate = 0.5;
  std::uint64_t seed = 0;
};

/// Ridge-regularized logistic scorer fit by deterministic full-batch gradient
/// descent on internally standardized features. Minimal by intent: it exists
/// to drive repair end to end, not to compete with real classifiers.
class LinearScorer {
 public:
  static LinearScorer fit(const Eigen::MatrixXd& features,
                          const Eigen::VectorXi& target, double l2,
                          const LinearScorerConfig& cfg = {});

  /// Sigmoid scores in (0, 1).
  Eigen::VectorXd score(const Eigen::MatrixXd& features) const;

 private:
  Eigen::VectorXd weights_;
  double bias_ = 0.0;
  Eigen::VectorXd feature_mean_;
  Eigen::VectorXd feature_scale_;
};

}  // namespace lbw::fairness
