#pragma once

#include <optional>

#include "lgm/bspline.hpp"
#include "lgm/covariate.hpp"
#include "lgm/linalg.hpp"
#include "lgm/neldermead.hpp"

namespace lgm {

/// Replacement of a random-walk penalty on spline coefficients by a structure
/// matrix whose null space holds the basis moment vectors, so that null-space
/// constraints remove the polynomial trend of the spline effect. The
/// replacement is Q_tilde = (Lambda R_tilde^* Lambda)^* with R_tilde as sparse
/// as the original penalty, and the positive weights lambda are fitted by
/// minimizing the Kullback-Leibler divergence to the original model.

struct QModOptions {
  int max_iterations = 5000;
  double tolerance = 1e-10;
  int restarts = 2;
  double initial_step = 0.2;
  /// Warm start on the log scale (defaults to lambda = 1). Chaining fits
  /// across neighbouring K keeps the search local for large bases.
  std::optional<Vector> initial_log_lambda;
  /// Optimize over a mirrored half-vector. The objective is invariant under
  /// index reversal for the uniform equidistant setting, so the minimizer is
  /// symmetric; this halves the search dimension.
  bool symmetric = false;
};

struct QModResult {
  Vector lambda_hat;
  StructureMatrix Q_tilde;  // null space = S_tilde
  Matrix R_tilde;           // same sparsity and sign pattern as the penalty
  Matrix S_tilde;
  double kl_value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Moment vectors [E[B(X)]] (order 1) or [E[B(X)], E[X B(X)]] (order 2);
/// closed forms for the uniform covariate, quadrature or sample averages
/// otherwise. Orders above 2 are rejected.
Matrix target_null_space(const BSplineBasis& b, const CovariateDist& dist, int order);

/// R_tilde = G_tilde - W_tilde from the order-specific entry formulas;
/// satisfies R_tilde * Lambda * S_tilde = 0 by construction.
Matrix build_r_tilde(const Matrix& q, const Matrix& s_tilde, const Vector& lambda, int order);

/// Divergence from the modified model to the original one: the zero-mean
/// Gaussian KL formula with generalized inverses and pseudo-determinants,
///   1/2 [ tr(Q Qt*(lambda)) - (K - d) - logpdet(Qt*(lambda)) - logpdet(Q) ].
/// Equals the ordinary KL divergence whenever the two kernels coincide (and is
/// then nonnegative, zero at equality); with distinct kernels it is the formal
/// extension used for fitting. Throws ProjectionRankMismatch if the modified
/// covariance does not have rank K - d.
double kl_objective(const Vector& lambda, const Matrix& q, const Matrix& s_tilde, int order);

/// Minimizes the KL objective over log(lambda) by simplex search from
/// lambda = 1.
QModResult fit_lambda(const Matrix& q, const Matrix& s_tilde, int order,
                      const QModOptions& opts = {});

/// Modification fit for the uniform-covariate spline penalty at arbitrary K:
/// above K = 12 the search chains warm starts over a ladder of intermediate
/// sizes (mirrored half-vector, offset-mapped starts, dimension-scaled
/// budget), which the plain cold start needs for convergence. Deterministic.
QModResult fit_modification_chained(int K, int order, double lo = 0.0, double hi = 1.0);

}  // namespace lgm
