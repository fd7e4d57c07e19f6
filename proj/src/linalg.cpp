#include "lgm/linalg.hpp"

#include <cmath>
#include <limits>

#include "lgm/error.hpp"
#include "lgm/rng.hpp"

namespace lgm {

namespace {

void check_symmetric(const Matrix& m, const char* where) {
  require(m.rows() == m.cols(), Errc::NonSymmetric, std::string(where) + ": matrix not square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double dev = (m - m.transpose()).cwiseAbs().maxCoeff();
  require(dev <= 1e-12 * scale, Errc::NonSymmetric,
          std::string(where) + ": symmetry violated beyond 1e-12 relative tolerance");
}

}  // namespace

EigenSym sym_eigen(const Matrix& m) {
  check_symmetric(m, "sym_eigen");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (m + m.transpose()));
  require(solver.info() == Eigen::Success, Errc::InvalidArgument, "sym_eigen: solver failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

double rank_tolerance(const Vector& eigenvalues) {
  const int k = static_cast<int>(eigenvalues.size());
  const double lmax = eigenvalues.size() ? eigenvalues.cwiseAbs().maxCoeff() : 0.0;
  return k * std::numeric_limits<double>::epsilon() * lmax;
}

namespace {

EigenSym checked_psd_eigen(const Matrix& m, const char* where) {
  EigenSym es = sym_eigen(m);
  const double tol = rank_tolerance(es.values);
  require(es.values.size() == 0 || es.values.minCoeff() >= -std::max(tol, 1e-300),
          Errc::NegativeEigenvalue,
          std::string(where) + ": eigenvalue below -K*eps*lambda_max");
  return es;
}

}  // namespace

Matrix pseudo_inverse_sym(const Matrix& m) {
  EigenSym es = checked_psd_eigen(m, "pseudo_inverse_sym");
  const double tol = rank_tolerance(es.values);
  Vector inv = Vector::Zero(es.values.size());
  for (int i = 0; i < es.values.size(); ++i)
    if (es.values[i] > tol) inv[i] = 1.0 / es.values[i];
  Matrix out = es.vectors * inv.asDiagonal() * es.vectors.transpose();
  return 0.5 * (out + out.transpose());
}

double pseudo_log_det_sym(const Matrix& m) {
  EigenSym es = checked_psd_eigen(m, "pseudo_log_det_sym");
  const double tol = rank_tolerance(es.values);
  double acc = 0.0;
  for (int i = 0; i < es.values.size(); ++i)
    if (es.values[i] > tol) acc += std::log(es.values[i]);
  return acc;
}

Matrix sqrt_factor_sym(const Matrix& cov) {
  EigenSym es = checked_psd_eigen(cov, "sqrt_factor_sym");
  const double tol = rank_tolerance(es.values);
  int r = 0;
  for (int i = 0; i < es.values.size(); ++i)
    if (es.values[i] > tol) ++r;
  Matrix f(cov.rows(), r);
  int j = 0;
  for (int i = 0; i < es.values.size(); ++i)
    if (es.values[i] > tol) f.col(j++) = std::sqrt(es.values[i]) * es.vectors.col(i);
  return f;
}

StructureMatrix::StructureMatrix(Matrix q, int d, Matrix s)
    : entries(std::move(q)), rank_deficiency(d), null_space(std::move(s)) {
  check_symmetric(entries, "StructureMatrix");
  require(d >= 0 && d < entries.rows(), Errc::InvalidArgument,
          "StructureMatrix: rank deficiency out of range");
  require(null_space.cols() == d && (d == 0 || null_space.rows() == entries.rows()),
          Errc::InvalidArgument, "StructureMatrix: null space shape mismatch");
  if (d > 0) {
    const double scale = std::max(1.0, entries.cwiseAbs().maxCoeff());
    const double colscale = std::max(1.0, null_space.cwiseAbs().maxCoeff());
    const double dev = (entries * null_space).cwiseAbs().maxCoeff();
    require(dev <= 1e-10 * scale * colscale, Errc::InvalidArgument,
            "StructureMatrix: Q * S is not numerically zero");
  }
  checked_psd_eigen(entries, "StructureMatrix");
}

Matrix generalized_inverse(const StructureMatrix& q) { return pseudo_inverse_sym(q.entries); }

double pseudo_log_det(const StructureMatrix& q) { return pseudo_log_det_sym(q.entries); }

Matrix polynomial_null_space(int K, int d) {
  require(d >= 1, Errc::InvalidArgument, "polynomial_null_space: d must be >= 1");
  require(d < K, Errc::OrderTooLarge, "polynomial_null_space: d must be < K");
  Matrix s(K, d);
  for (int k = 0; k < K; ++k)
    for (int m = 0; m < d; ++m) s(k, m) = std::pow(static_cast<double>(k + 1), m);
  return s;
}

Matrix condition_on_constraints(const Matrix& cov, const Matrix& a) {
  check_symmetric(cov, "condition_on_constraints");
  require(a.cols() == cov.rows(), Errc::InvalidArgument,
          "condition_on_constraints: constraint width mismatch");
  if (a.rows() == 0) return cov;
  const Matrix cov_at = cov * a.transpose();
  const Matrix gram = a * cov_at;
  // The Gram matrix is singular when a row sits in the kernel of the
  // covariance or rows are dependent; compare its smallest eigenvalue against
  // the natural scale |cov| * max_i |a_i|^2.
  const double row_scale = a.rowwise().squaredNorm().maxCoeff();
  const double scale = std::max(1e-300, cov.cwiseAbs().maxCoeff() * row_scale);
  const EigenSym ges = sym_eigen(0.5 * (gram + gram.transpose()));
  require(ges.values.minCoeff() > 1e-12 * scale, Errc::SingularConstraintGram,
          "condition_on_constraints: A cov A^T numerically singular");
  Matrix out = cov - cov_at * gram.ldlt().solve(cov_at.transpose());
  return 0.5 * (out + out.transpose());
}

Matrix condition_dropping_null_rows(const Matrix& cov, const Matrix& a) {
  if (a.rows() == 0) return cov;
  // A row is a no-op when it lies in the kernel of the covariance; compare the
  // Rayleigh quotient a^T cov a / (|a|^2 scale) against a scale-free cutoff so
  // ill-conditioned covariances do not leak kernel rows into the conditioning.
  const double scale = std::max(1e-300, cov.cwiseAbs().maxCoeff());
  std::vector<int> live;
  for (int i = 0; i < a.rows(); ++i) {
    const Vector row = a.row(i).transpose();
    const double quad = row.dot(cov * row);
    if (quad > 1e-9 * scale * row.squaredNorm()) live.push_back(i);
  }
  if (live.empty()) return cov;
  Matrix sub(static_cast<int>(live.size()), a.cols());
  for (size_t i = 0; i < live.size(); ++i) sub.row(static_cast<int>(i)) = a.row(live[i]);
  return condition_on_constraints(cov, sub);
}

ConstrainedGaussian::ConstrainedGaussian(StructureMatrix s, double sig2, Matrix a)
    : structure(std::move(s)), sigma2(sig2), constraints(std::move(a)) {
  require(sigma2 > 0.0, Errc::InvalidArgument, "ConstrainedGaussian: sigma2 must be positive");
  if (constraints.size() == 0) constraints = Matrix(0, structure.size());
  require(constraints.cols() == structure.size(), Errc::InvalidArgument,
          "ConstrainedGaussian: constraint width mismatch");
  if (constraints.rows() > 0) {
    Eigen::FullPivLU<Matrix> lu(constraints);
    require(lu.rank() == constraints.rows(), Errc::InvalidArgument,
            "ConstrainedGaussian: constraint rows must be linearly independent");
  }
}

Matrix ConstrainedGaussian::constrained_covariance() const {
  const Matrix base = generalized_inverse(structure);
  return sigma2 * condition_dropping_null_rows(base, constraints);
}

Matrix sample_constrained(const ConstrainedGaussian& g, int n, std::uint64_t seed) {
  require(n >= 1, Errc::InvalidArgument, "sample_constrained: n must be >= 1");
  const Matrix cov = g.constrained_covariance();
  const Matrix f = sqrt_factor_sym(cov);
  const int k = g.structure.size();
  const int r = static_cast<int>(f.cols());
  Rng rng(seed);
  Matrix out(n, k);
  Vector z(r);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < r; ++j) z[j] = rng.normal();
    out.row(i) = (f * z).transpose();
  }
  return out;
}

}  // namespace lgm
