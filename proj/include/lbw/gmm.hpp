#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "lbw/bures.hpp"

namespace lbw {

struct GmmConfig {
  double reg = 1e-6;      // added to covariance diagonals after every M-step
  int max_iter = 300;
  double ll_tol = 1e-7;   // relative log-likelihood change for convergence
  std::uint64_t seed = 0;
  int n_init = 4;         // restarts; best final log-likelihood wins, ties by index
};

struct GaussianComponent {
  double weight = 0.0;
  GaussianParams params;
};

/// Fitted k-component full-covariance Gaussian mixture. Immutable once built;
/// per-component Cholesky factors are precomputed so density queries are cheap
/// and safe to run concurrently.
class GmmModel {
 public:
  GmmModel(std::vector<GaussianComponent> components, double reg,
           std::uint64_t seed, double final_log_likelihood,
           std::vector<double> log_likelihood_history = {});

  int k() const { return static_cast<int>(components_.size()); }
  Eigen::Index dim() const { return components_.front().params.mean.size(); }
  const std::vector<GaussianComponent>& components() const { return components_; }
  const GaussianComponent& component(int j) const {
    return components_[static_cast<size_t>(j)];
  }
  double reg() const { return reg_; }
  std::uint64_t seed() const { return seed_; }
  double final_log_likelihood() const { return final_log_likelihood_; }
  const std::vector<double>& log_likelihood_history() const {
    return ll_history_;
  }

  /// Posterior component probabilities for one sample (log-sum-exp path);
  /// entries are nonnegative and sum to 1.
  Eigen::VectorXd responsibilities(const Eigen::VectorXd& x) const;

  /// argmax_j of the responsibilities; ties break to the lowest index.
  int hard_assign(const Eigen::VectorXd& x) const;

  /// log p(x) under the mixture.
  double log_density(const Eigen::VectorXd& x) const;

  /// Sum of log densities of all rows.
  double log_likelihood(const Eigen::MatrixXd& data) const;

 private:
  Eigen::VectorXd component_log_terms(const Eigen::VectorXd& x) const;

  std::vector<GaussianComponent> components_;
  double reg_ = 0.0;
  std::uint64_t seed_ = 0;
  double final_log_likelihood_ = 0.0;
  std::vector<double> ll_history_;

  // Cached per component: log weight, Cholesky factor L of the covariance,
  // and log det(cov).
  std::vector<double> log_weights_;
  std::vector<Eigen::MatrixXd> chol_;
  std::vector<double> log_det_;
};

/// Fit a full-covariance GMM by expectation-maximization. Means are seeded
/// k-means++ style from data points, covariances start at the global data
/// covariance, weights uniform. Deterministic for fixed (data, cfg).
GmmModel fit_em(const Eigen::MatrixXd& data, int k, const GmmConfig& cfg = {});

/// Akaike information criterion: 2 * n_params - 2 * log_likelihood(data),
/// where n_params = k * (p + p (p + 1) / 2) + (k - 1).
double aic(const GmmModel& model, const Eigen::MatrixXd& data);

/// Fit every k in the grid and pick the AIC minimizer. Returns the winner and
/// the full (k, aic) sweep.
std::pair<int, std::vector<std::pair<int, double>>> select_k(
    const Eigen::MatrixXd& data, const std::vector<int>& k_grid,
    const GmmConfig& cfg = {});

}  // namespace lbw
