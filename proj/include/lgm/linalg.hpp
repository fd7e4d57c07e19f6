#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace lgm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct EigenSym {
  Vector values;   // ascending
  Matrix vectors;  // columns
};

/// Symmetric eigendecomposition; throws NonSymmetric if the input is not
/// symmetric to 1e-12 relative tolerance.
EigenSym sym_eigen(const Matrix& m);

/// Spectral cutoff for numerical rank decisions: K * eps * max|lambda|.
double rank_tolerance(const Vector& eigenvalues);

/// Moore-Penrose pseudo-inverse of a symmetric PSD matrix. Eigenvalues above
/// the rank tolerance are inverted, the rest zeroed; an eigenvalue below
/// -tolerance raises NegativeEigenvalue.
Matrix pseudo_inverse_sym(const Matrix& m);

/// Sum of log eigenvalues above the rank tolerance.
double pseudo_log_det_sym(const Matrix& m);

/// K x r factor F with F F^T = cov, built from the nonzero eigenpairs.
Matrix sqrt_factor_sym(const Matrix& cov);

/// Structure matrix of a (possibly intrinsic) GMRF: symmetric PSD entries at
/// unit variance, with rank deficiency d and a K x d matrix spanning the kernel.
struct StructureMatrix {
  Matrix entries;
  int rank_deficiency = 0;
  Matrix null_space;  // K x d

  StructureMatrix() = default;
  StructureMatrix(Matrix q, int d, Matrix s);  // validates the invariants
  int size() const { return static_cast<int>(entries.rows()); }
};

Matrix generalized_inverse(const StructureMatrix& q);
double pseudo_log_det(const StructureMatrix& q);

/// Columns (1^m, 2^m, ..., K^m) for m = 0..d-1; the polynomial kernel of
/// random-walk structure matrices on regular locations.
Matrix polynomial_null_space(int K, int d);

/// Kriging-style conditioning on A u = 0:
///   cov_c = cov - cov A^T (A cov A^T)^{-1} A cov.
/// Requires A cov A^T invertible (SingularConstraintGram otherwise).
Matrix condition_on_constraints(const Matrix& cov, const Matrix& a);

/// Zero-mean Gaussian with structure matrix Q, variance multiplier sigma2 and
/// linear constraints A u = 0. Constraint rows already annihilated by Q^* (the
/// kernel directions) are no-ops and skipped when conditioning.
struct ConstrainedGaussian {
  StructureMatrix structure;
  double sigma2 = 1.0;
  Matrix constraints;  // c x K, possibly 0 x K

  ConstrainedGaussian(StructureMatrix s, double sigma2, Matrix a);
  /// sigma2 * conditioned covariance.
  Matrix constrained_covariance() const;
};

/// n x K draws from the constrained Gaussian; deterministic for a fixed seed.
Matrix sample_constrained(const ConstrainedGaussian& g, int n, std::uint64_t seed);

/// Filters out rows of `a` that the covariance already annihilates and
/// conditions on the rest. Used wherever null-space rows and 0-mean rows are
/// stacked into one constraint set.
Matrix condition_dropping_null_rows(const Matrix& cov, const Matrix& a);

}  // namespace lgm
