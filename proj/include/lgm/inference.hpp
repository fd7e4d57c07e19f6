#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lgm/bspline.hpp"
#include "lgm/priors.hpp"
#include "lgm/standardize.hpp"

namespace lgm {

enum class PriorChoice { IG, PC, VP };
enum class Scaling { Expectation, GeometricMean, None };

std::string to_string(PriorChoice p);
std::string to_string(Scaling s);

/// Exact Gaussian marginal log likelihood with every effect and the intercept
/// integrated out:
///   log N(y; 0, sum_j D_j cov_j D_j^T + sigma2_eps I + tau2_mu 1 1^T).
/// Dense reference implementation; the grid engine uses algebraically
/// equivalent fast paths that are tested against this one.
double gaussian_log_marginal(const Vector& y, const std::vector<Matrix>& designs,
                             const std::vector<Matrix>& effect_covs, double sigma2_eps,
                             double tau2_mu = 1e3);

struct GridAxis {
  std::string name;
  std::vector<double> values;
  bool log_spaced = true;
  bool expandable = true;
};

/// Deterministic hyperparameter posterior on a product grid. Node masses are
/// exp(log_joint - normalization) and sum to one; outermost slabs of
/// expandable axes must carry < 1% of the mass or the grid is widened.
struct GridPosterior {
  std::vector<GridAxis> axes;
  std::vector<double> log_joint;  // flattened row-major over the axes
  double normalization = 0.0;
  int expansions = 0;

  std::size_t size() const;
  std::vector<double> weights() const;
};

struct FitSummary {
  double phi_mean = 0.0, phi_low = 0.0, phi_high = 0.0;
  double T_mean = 0.0, T_low = 0.0, T_high = 0.0;
  double beta_mean = std::numeric_limits<double>::quiet_NaN();
  int expansions = 0;
};

/// Local-level model: one observation per location of a standardized
/// first-order random-walk effect plus iid noise, with a N(0, tau2_mu)
/// intercept. Precomputed once and shared across fits.
struct LocalLevelContext {
  int K = 25;
  double tau2_mu = 1e3;
  double C = 1.0;          // expectation scaling constant
  double sigma2_ref = 1.0; // geometric-mean reference variance
  Matrix cov;              // constrained covariance at sigma2 = 1
  Matrix sqrt_f;           // factor of cov, for data generation
  Vector eig_values;
  Matrix eig_vectors;
  int kernel_index = 0;    // eigen direction aligned with the intercept

  static LocalLevelContext make(int K = 25);
};

FitSummary fit_local_level(const Vector& y, PriorChoice prior, Scaling scaling,
                           const LocalLevelContext& ctx, int points_per_axis = 80,
                           GridPosterior* grid_out = nullptr);

/// Linear trend plus cubic spline model on Unif(0,1), fitted either with the
/// modified penalty (moment-vector null space) or the original one; both arms
/// carry their own scaling constant.
struct SplineContext {
  int K = 10;
  bool modified = true;
  double tau2_mu = 1e3;
  double C = 1.0;
  std::optional<BSplineBasis> basis;
  Matrix cov;      // constrained coefficient covariance at sigma2 = 1
  Matrix sqrt_f;
  StandardizedEffect linear;

  static SplineContext make(int K = 10, bool modified = true);
};

struct Dataset {
  Vector x;
  Vector y;
};

FitSummary fit_linear_spline(const Dataset& data, PriorChoice prior, const SplineContext& ctx,
                             int points_per_axis = 80, GridPosterior* grid_out = nullptr);

}  // namespace lgm
