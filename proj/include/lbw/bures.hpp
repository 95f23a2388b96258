#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "lbw/spd.hpp"

namespace lbw {

/// Default eigenvalue floor used when inverting covariance roots.
inline constexpr double kDefaultEigenFloor = 1e-12;

struct GaussianParams {
  Eigen::VectorXd mean;
  SpdMatrix cov;
};

/// Affine transport map x -> offset_target + linear * (x - offset_source).
/// Maps produced by monge_map have a symmetric PSD linear part.
struct AffineMap {
  Eigen::MatrixXd linear;
  Eigen::VectorXd offset_source;
  Eigen::VectorXd offset_target;

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
};

Eigen::VectorXd apply_map(const AffineMap& t, const Eigen::VectorXd& x);

/// Squared 2-Wasserstein distance between Gaussians:
///   ||m1 - m2||^2 + Tr(S1 + S2) - 2 Tr[(S1^{1/2} S2 S1^{1/2})^{1/2}],
/// clamped at 0 to absorb round-off.
double bw_distance_sq(const GaussianParams& a, const GaussianParams& b);

/// Optimal (Monge) transport map from Gaussian a onto Gaussian b:
///   linear = S1^{-1/2} (S1^{1/2} S2 S1^{1/2})^{1/2} S1^{-1/2}.
AffineMap monge_map(const GaussianParams& a, const GaussianParams& b,
                    double floor = kDefaultEigenFloor);

struct BarycenterConfig {
  int max_iter = 200;
  double tol = 1e-9;  // relative Frobenius change between iterates
  enum class Init { kWeightedAverage, kIdentity };
  Init init = Init::kWeightedAverage;
  double floor = kDefaultEigenFloor;
};

struct BarycenterSolveReport {
  int iterations = 0;
  double residual = 0.0;  // Frobenius norm of the fixed-point defect
  bool converged = false;
  // Defect per iterate, residual == defect_history.back().
  std::vector<double> defect_history;
};

/// Weighted Wasserstein barycenter of Gaussians. The mean is the weighted
/// average of input means; the covariance is the fixed point of
///   S = sum_i w_i (S^{1/2} S_i S^{1/2})^{1/2},
/// solved by averaging the transport maps from the current iterate to each
/// input and retracting S <- T S T. Stops when the relative change between
/// iterates drops below cfg.tol or max_iter is hit; the reported residual is
/// the defect of the equation above (converged requires residual <= tol*||S||).
std::pair<GaussianParams, BarycenterSolveReport> bw_barycenter(
    const std::vector<GaussianParams>& inputs, const Eigen::VectorXd& weights,
    const BarycenterConfig& cfg = BarycenterConfig{});

}  // namespace lbw
