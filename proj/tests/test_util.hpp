#pragma once

#include <Eigen/Dense>
#include <random>

#include "lbw/bures.hpp"

namespace lbw::test {

/// Random SPD matrix G G^T + eps I with entries of G standard normal.
inline Eigen::MatrixXd random_spd(Eigen::Index p, std::mt19937_64& rng,
                                  double eps = 0.1) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd g(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) g(i, j) = normal(rng);
  }
  Eigen::MatrixXd m = g * g.transpose();
  m.diagonal().array() += eps;
  return 0.5 * (m + m.transpose());
}

inline Eigen::VectorXd random_vector(Eigen::Index p, std::mt19937_64& rng,
                                     double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Eigen::VectorXd v(p);
  for (Eigen::Index i = 0; i < p; ++i) v(i) = normal(rng);
  return v;
}

inline GaussianParams random_gaussian(Eigen::Index p, std::mt19937_64& rng) {
  return GaussianParams{random_vector(p, rng, 2.0), SpdMatrix(random_spd(p, rng))};
}

/// Draw n samples from N(mean, cov) via the covariance's Cholesky factor.
inline Eigen::MatrixXd sample_gaussian(const Eigen::VectorXd& mean,
                                       const Eigen::MatrixXd& cov, Eigen::Index n,
                                       std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::MatrixXd l = Eigen::LLT<Eigen::MatrixXd>(cov).matrixL();
  Eigen::MatrixXd out(n, mean.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd z(mean.size());
    for (Eigen::Index j = 0; j < mean.size(); ++j) z(j) = normal(rng);
    out.row(i) = (mean + l * z).transpose();
  }
  return out;
}

inline double rel_frobenius(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).norm() / std::max(1e-300, b.norm());
}

}  // namespace lbw::test
