#include "lbw/spd.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

namespace lbw {

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& a) {
  return 0.5 * (a + a.transpose());
}

SpdMatrix::SpdMatrix(const Eigen::MatrixXd& entries, const SpdTolerances& tol) {
  if (entries.rows() == 0 || entries.rows() != entries.cols()) {
    fail(ErrorCode::kInvalidArgument,
         "SpdMatrix requires a nonempty square matrix, got " +
             std::to_string(entries.rows()) + "x" + std::to_string(entries.cols()));
  }
  if (!entries.allFinite()) {
    fail(ErrorCode::kNonFiniteInput, "SpdMatrix entries must be finite");
  }
  const double scale = entries.cwiseAbs().maxCoeff();
  const double sym_gap = (entries - entries.transpose()).cwiseAbs().maxCoeff();
  if (sym_gap > tol.sym_rel * scale && sym_gap > 0.0) {
    fail(ErrorCode::kNotSpd, "matrix is not symmetric: max asymmetry " +
                                 std::to_string(sym_gap));
  }
  entries_ = symmetrized(entries);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(entries_);
  if (solver.info() != Eigen::Success) {
    fail(ErrorCode::kNonConvergence, "symmetric eigensolver did not converge");
  }
  Eigen::VectorXd values = solver.eigenvalues();
  const double eig_scale = values.cwiseAbs().maxCoeff();
  const double psd_tol = tol.psd_rel * eig_scale;
  if (values(0) < -psd_tol) {
    fail(ErrorCode::kNotSpd, "matrix is not positive semidefinite: min eigenvalue " +
                                 std::to_string(values(0)));
  }
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values(i) < 0.0) values(i) = 0.0;
  }
  eig_ = SymEig{std::move(values), solver.eigenvectors()};
}

SpdMatrix SpdMatrix::Identity(Eigen::Index dim) {
  return SpdMatrix(Eigen::MatrixXd::Identity(dim, dim));
}

SymEig sym_eig(const SpdMatrix& m) { return m.eig(); }

SpdMatrix spd_sqrt(const SpdMatrix& m) {
  const SymEig& e = m.eig();
  const Eigen::VectorXd root = e.values.cwiseSqrt();
  return SpdMatrix(
      symmetrized(e.vectors * root.asDiagonal() * e.vectors.transpose()));
}

SpdMatrix spd_inv_sqrt(const SpdMatrix& m, double floor) {
  if (!(floor > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "spd_inv_sqrt floor must be positive");
  }
  const SymEig& e = m.eig();
  if ((e.values.array() < floor).all()) {
    fail(ErrorCode::kDegenerateMatrix,
         "all eigenvalues below floor; matrix has collapsed");
  }
  Eigen::VectorXd inv_root(e.values.size());
  for (Eigen::Index i = 0; i < e.values.size(); ++i) {
    inv_root(i) = 1.0 / std::sqrt(std::max(e.values(i), floor));
  }
  return SpdMatrix(
      symmetrized(e.vectors * inv_root.asDiagonal() * e.vectors.transpose()));
}

}  // namespace lbw
