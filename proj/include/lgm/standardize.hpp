#pragma once

#include <cstdint>
#include <vector>

#include "lgm/effects.hpp"

namespace lgm {

enum class ScalingMethod { Expectation, GeometricMean, None };

std::string to_string(ScalingMethod m);

/// An effect together with its constraint set, scaling constant C and basis
/// centering, such that Var_{X,u}[f(X) | sigma2 = 1] = 1 under Expectation
/// scaling and the fixed-effect zero-mean constraint holds exactly.
struct StandardizedEffect {
  EffectSpec base;
  Matrix constraints;   // stacked null-space rows and 0-mean row (when added)
  Vector basis_center;  // subtracted from D(x); nonzero only for single-basis effects
  double C = 1.0;
  ScalingMethod method = ScalingMethod::Expectation;
  Matrix sigma_c;       // conditioned covariance of u at sigma2 = 1 (basis unscaled)

  /// (D(x) - center) / sqrt(C)
  Vector eval_basis(double x) const { return (base.eval_basis(x) - basis_center) / std::sqrt(C); }
  /// Covariance of the coefficients at the given variance parameter.
  Matrix coefficient_covariance(double sigma2) const { return sigma2 * sigma_c; }
};

/// a = E_X[D(X)]; the 0-mean constraint row for fixed effects.
Vector zero_mean_row(const EffectSpec& e);

/// C = E_X[D(X)^T cov_c D(X)] with cov_c the covariance conditioned on A u = 0;
/// exact finite sums for discrete covariates, per-cell quadrature for
/// continuous ones. Throws DegenerateConstant outside (1e-12, inf).
double scaling_constant(const EffectSpec& e, const Matrix& constraints);

/// Monte-Carlo estimator of the scaling constant (canonical sequential order).
double mc_scaling_constant(const EffectSpec& e, const Matrix& constraints, int n,
                           std::uint64_t seed);

/// Geometric mean of the conditional variance Var_u[f(x) | sigma2 = 1, X = x]
/// under pi(x). Throws ZeroConditionalVariance when the conditional variance
/// vanishes at a covariate value of positive density in the open support.
double geometric_mean_constant(const EffectSpec& e, const Matrix& constraints);

/// The two-step standardization: 0-mean constraint for fixed effects (basis
/// centering for single-basis ones, a constraint row otherwise, skipped when
/// the null-space rows already imply it) and scaling by the chosen constant.
StandardizedEffect standardize(const EffectSpec& e,
                               ScalingMethod method = ScalingMethod::Expectation);

/// Draws of the standardized effect value f(X) with both X and u random,
/// at the given sigma2. Used by variance post-condition checks.
Vector sample_effect_values(const StandardizedEffect& se, double sigma2, int n,
                            std::uint64_t seed);

// --- Composite (trend + residual) representation of intrinsic effects ---

struct QModResult;  // qmod.hpp

/// Trend sub-effects (one per polynomial degree 1..d-1, each standardized) and
/// the standardized residual effect under null-space (or moment-vector)
/// constraints.
struct CompositeEffect {
  std::vector<StandardizedEffect> trend;
  StandardizedEffect residual;
};

/// Decomposition of an intrinsic effect. For P-splines the structure matrix is
/// first replaced by the fitted modification so the null-space constraints
/// remove the polynomial trend of the spline.
CompositeEffect decompose(const EffectSpec& e);
CompositeEffect decompose(const EffectSpec& e, const QModResult& qmod);

/// P-spline effect with the structure matrix (and null space) replaced by the
/// fitted modification.
EffectSpec apply_qmod(const EffectSpec& e, const QModResult& qmod);

/// Polynomial trend basis h_m(x) = x^m - sum_l c_l x^l with E[X^l h_m(X)] = 0
/// for l = 0..m-1 under pi(x); the degree-m trend term of the decomposition.
std::function<Vector(double)> polynomial_trend_basis(const CovariateDist& dist,
                                                     const std::vector<double>& breakpoints,
                                                     int degree);

}  // namespace lgm
