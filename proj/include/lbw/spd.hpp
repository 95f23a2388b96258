#pragma once

#include <Eigen/Dense>

#include "lbw/error.hpp"

namespace lbw {

/// Relative tolerances used when validating symmetric PSD matrices.
struct SpdTolerances {
  double sym_rel = 1e-9;  // |m(i,j)-m(j,i)| <= sym_rel * max|entry|
  double psd_rel = 1e-8;  // min eigenvalue >= -psd_rel * max|eigenvalue|
};

struct SymEig {
  Eigen::VectorXd values;   // ascending, negatives within tolerance clamped to 0
  Eigen::MatrixXd vectors;  // orthonormal columns, vectors.col(i) <-> values(i)
};

/// Symmetric positive semidefinite matrix with its eigendecomposition attached.
/// Construction validates symmetry and positive semidefiniteness and stores the
/// exactly symmetrized entries, so downstream code never re-checks.
class SpdMatrix {
 public:
  explicit SpdMatrix(const Eigen::MatrixXd& entries,
                     const SpdTolerances& tol = SpdTolerances{});

  static SpdMatrix Identity(Eigen::Index dim);

  Eigen::Index dim() const { return entries_.rows(); }
  const Eigen::MatrixXd& matrix() const { return entries_; }
  const SymEig& eig() const { return eig_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }
  double trace() const { return entries_.trace(); }

 private:
  Eigen::MatrixXd entries_;
  SymEig eig_;
};

/// Eigendecomposition of m (eigenvalues ascending, orthonormal eigenvectors).
/// Returns a copy so the result may outlive a temporary argument; use
/// m.eig() directly on long-lived objects.
SymEig sym_eig(const SpdMatrix& m);

/// Principal matrix square root, result * result == m.
SpdMatrix spd_sqrt(const SpdMatrix& m);

/// Inverse square root with eigenvalue flooring: eigenvalues below `floor` are
/// clamped to `floor` before inversion. Throws kDegenerateMatrix when every
/// eigenvalue is below the floor (a collapsed matrix).
SpdMatrix spd_inv_sqrt(const SpdMatrix& m, double floor);

/// (a + a^T) / 2. Products of symmetric matrices drift asymmetric in floating
/// point; every SPD-producing operation routes its result through this.
Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& a);

}  // namespace lbw
