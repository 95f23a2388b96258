#include "lbw/bures.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lbw {

namespace {

void check_same_dim(const GaussianParams& a, const GaussianParams& b) {
  if (a.mean.size() != b.mean.size() || a.cov.dim() != b.cov.dim()) {
    fail(ErrorCode::kDimensionMismatch,
         "Gaussian parameters have mismatched dimensions");
  }
}

void check_simplex(const Eigen::VectorXd& weights, Eigen::Index expected) {
  if (weights.size() != expected) {
    fail(ErrorCode::kCountMismatch, "weight count does not match input count");
  }
  if ((weights.array() < 0.0).any()) {
    fail(ErrorCode::kInvalidArgument, "barycenter weights must be nonnegative");
  }
  if (std::abs(weights.sum() - 1.0) > 1e-9) {
    fail(ErrorCode::kInvalidArgument,
         "barycenter weights must sum to 1 (got " + std::to_string(weights.sum()) + ")");
  }
}

}  // namespace

Eigen::VectorXd AffineMap::apply(const Eigen::VectorXd& x) const {
  if (x.size() != offset_source.size()) {
    fail(ErrorCode::kDimensionMismatch, "point dimension does not match map");
  }
  return offset_target + linear * (x - offset_source);
}

Eigen::VectorXd apply_map(const AffineMap& t, const Eigen::VectorXd& x) {
  return t.apply(x);
}

double bw_distance_sq(const GaussianParams& a, const GaussianParams& b) {
  check_same_dim(a, b);
  const SpdMatrix root_a = spd_sqrt(a.cov);
  const SpdMatrix inner(
      symmetrized(root_a.matrix() * b.cov.matrix() * root_a.matrix()));
  const double cross = inner.eig().values.cwiseSqrt().sum();
  const double d2 = (a.mean - b.mean).squaredNorm() + a.cov.trace() +
                    b.cov.trace() - 2.0 * cross;
  return std::max(d2, 0.0);
}

AffineMap monge_map(const GaussianParams& a, const GaussianParams& b,
                    double floor) {
  check_same_dim(a, b);
  const SpdMatrix root_a = spd_sqrt(a.cov);
  const SpdMatrix inv_root_a = spd_inv_sqrt(a.cov, floor);
  const SpdMatrix mid = spd_sqrt(
      SpdMatrix(symmetrized(root_a.matrix() * b.cov.matrix() * root_a.matrix())));
  AffineMap map;
  map.linear =
      symmetrized(inv_root_a.matrix() * mid.matrix() * inv_root_a.matrix());
  map.offset_source = a.mean;
  map.offset_target = b.mean;
  return map;
}

std::pair<GaussianParams, BarycenterSolveReport> bw_barycenter(
    const std::vector<GaussianParams>& inputs, const Eigen::VectorXd& weights,
    const BarycenterConfig& cfg) {
  if (inputs.empty()) {
    fail(ErrorCode::kInvalidArgument, "barycenter needs at least one input");
  }
  check_simplex(weights, static_cast<Eigen::Index>(inputs.size()));
  const Eigen::Index p = inputs.front().cov.dim();
  for (const auto& in : inputs) {
    if (in.cov.dim() != p || in.mean.size() != p) {
      fail(ErrorCode::kDimensionMismatch, "barycenter inputs have mixed dimensions");
    }
  }

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(p);
  for (size_t i = 0; i < inputs.size(); ++i) {
    mean += weights(static_cast<Eigen::Index>(i)) * inputs[i].mean;
  }

  // K(S) = sum_i w_i (S^{1/2} S_i S^{1/2})^{1/2}; the defect is ||S - K(S)||_F.
  const auto mixed_root_sum = [&](const SpdMatrix& s) {
    const SpdMatrix root = spd_sqrt(s);
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(p, p);
    for (size_t i = 0; i < inputs.size(); ++i) {
      const SpdMatrix mixed(symmetrized(root.matrix() *
                                        inputs[i].cov.matrix() * root.matrix()));
      k += weights(static_cast<Eigen::Index>(i)) * spd_sqrt(mixed).matrix();
    }
    return symmetrized(k);
  };

  BarycenterSolveReport report;

  if (inputs.size() == 1) {
    const SpdMatrix& s = inputs.front().cov;
    report.residual = (s.matrix() - mixed_root_sum(s)).norm();
    report.defect_history.push_back(report.residual);
    report.converged = report.residual <= cfg.tol * s.matrix().norm();
    return {GaussianParams{std::move(mean), s}, report};
  }

  Eigen::MatrixXd init;
  if (cfg.init == BarycenterConfig::Init::kIdentity) {
    init = Eigen::MatrixXd::Identity(p, p);
  } else {
    init = Eigen::MatrixXd::Zero(p, p);
    for (size_t i = 0; i < inputs.size(); ++i) {
      init += weights(static_cast<Eigen::Index>(i)) * inputs[i].cov.matrix();
    }
  }

  SpdMatrix current(init);
  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    const Eigen::MatrixXd k = mixed_root_sum(current);
    report.defect_history.push_back((current.matrix() - k).norm());

    const SpdMatrix inv_root = spd_inv_sqrt(current, cfg.floor);
    const Eigen::MatrixXd t =
        symmetrized(inv_root.matrix() * k * inv_root.matrix());
    const Eigen::MatrixXd next = symmetrized(t * current.matrix() * t);

    const double denom = std::max(current.matrix().norm(), 1e-300);
    const double change = (next - current.matrix()).norm() / denom;
    current = SpdMatrix(next);
    report.iterations = iter + 1;
    if (change <= cfg.tol) break;
  }

  report.residual = (current.matrix() - mixed_root_sum(current)).norm();
  report.defect_history.push_back(report.residual);
  report.converged = report.residual <= cfg.tol * current.matrix().norm();
  return {GaussianParams{std::move(mean), current}, report};
}

}  // namespace lbw
