#include "lgm/standardize.hpp"

#include <cmath>

#include "lgm/error.hpp"

namespace lgm {

std::string to_string(ScalingMethod m) {
  switch (m) {
    case ScalingMethod::Expectation: return "expectation";
    case ScalingMethod::GeometricMean: return "geometric_mean";
    case ScalingMethod::None: return "none";
  }
  return "?";
}

namespace {

Matrix conditioned_covariance(const EffectSpec& e, const Matrix& constraints) {
  const Matrix base = generalized_inverse(e.structure);
  return condition_dropping_null_rows(base, constraints);
}

double quad_form(const EffectSpec& e, const Matrix& cov, double x) {
  if (e.indicator_basis()) {
    const int k = static_cast<int>(std::lround(x));
    return cov(k - 1, k - 1);
  }
  const Vector d = e.eval_basis(x);
  return d.dot(cov * d);
}

}  // namespace

Vector zero_mean_row(const EffectSpec& e) {
  Vector a = Vector::Zero(e.K);
  for (const auto& pt : expectation_rule(e.dist, e.breakpoints)) a += pt.w * e.eval_basis(pt.x);
  return a;
}

double scaling_constant(const EffectSpec& e, const Matrix& constraints) {
  const Matrix cov = conditioned_covariance(e, constraints);
  double c = 0.0;
  for (const auto& pt : expectation_rule(e.dist, e.breakpoints))
    c += pt.w * quad_form(e, cov, pt.x);
  require(std::isfinite(c) && c > 1e-12, Errc::DegenerateConstant,
          "scaling_constant: C must satisfy 0 < C < inf");
  return c;
}

double mc_scaling_constant(const EffectSpec& e, const Matrix& constraints, int n,
                           std::uint64_t seed) {
  require(n >= 1, Errc::InvalidArgument, "mc_scaling_constant: n must be >= 1");
  const Matrix cov = conditioned_covariance(e, constraints);
  Rng rng(seed);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += quad_form(e, cov, sample_covariate(e.dist, rng));
  const double c = acc / n;
  require(std::isfinite(c) && c > 1e-12, Errc::DegenerateConstant,
          "mc_scaling_constant: estimate not in (0, inf)");
  return c;
}

double geometric_mean_constant(const EffectSpec& e, const Matrix& constraints) {
  const Matrix cov = conditioned_covariance(e, constraints);
  const auto rule = expectation_rule(e.dist, e.breakpoints);

  double mean_var = 0.0;
  for (const auto& pt : rule) mean_var += pt.w * quad_form(e, cov, pt.x);
  const double floor = 1e-10 * std::max(mean_var, 1e-300);

  if (is_discrete(e.dist) || std::holds_alternative<EmpiricalDist>(e.dist)) {
    for (const auto& pt : rule)
      require(quad_form(e, cov, pt.x) > floor, Errc::ZeroConditionalVariance,
              "geometric_mean_constant: conditional variance vanishes on the support");
  } else {
    // A zero of the conditional variance strictly inside the open support makes
    // the geometric mean degenerate; a zero approached only at the interval
    // boundary does not (the log stays integrable and no realizable x attains
    // it). Locate the minimum by grid search plus golden-section refinement.
    const auto& cu = std::get<ContinuousUniform>(e.dist);
    const double h = 1e-4 * (cu.hi - cu.lo);
    auto var_at = [&](double x) { return quad_form(e, cov, x); };
    const int probes = 2049;
    double best_x = cu.lo + h, best_v = var_at(best_x);
    for (int i = 0; i < probes; ++i) {
      const double x = cu.lo + h + (cu.hi - cu.lo - 2 * h) * i / (probes - 1.0);
      const double v = var_at(x);
      if (v < best_v) {
        best_v = v;
        best_x = x;
      }
    }
    const double step = (cu.hi - cu.lo - 2 * h) / (probes - 1.0);
    double a = std::max(cu.lo + h, best_x - step), b = std::min(cu.hi - h, best_x + step);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = var_at(x1), f2 = var_at(x2);
    for (int it = 0; it < 200; ++it) {
      if (f1 < f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - gr * (b - a);
        f1 = var_at(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + gr * (b - a);
        f2 = var_at(x2);
      }
    }
    const double xmin = 0.5 * (a + b), vmin = var_at(xmin);
    const bool interior = (xmin - cu.lo > 2 * h) && (cu.hi - xmin > 2 * h);
    require(!(interior && vmin <= floor), Errc::ZeroConditionalVariance,
            "geometric_mean_constant: conditional variance vanishes inside the support");
  }

  double log_gm = 0.0;
  for (const auto& pt : rule) log_gm += pt.w * std::log(quad_form(e, cov, pt.x));
  const double gm = std::exp(log_gm);
  require(std::isfinite(gm) && gm > 1e-12, Errc::DegenerateConstant,
          "geometric_mean_constant: degenerate value");
  return gm;
}

StandardizedEffect standardize(const EffectSpec& e, ScalingMethod method) {
  StandardizedEffect se;
  se.base = e;
  se.method = method;
  se.basis_center = Vector::Zero(e.K);

  const Matrix& ns = e.structure.null_space;
  Matrix rows(0, e.K);
  if (e.structure.rank_deficiency > 0) rows = ns.transpose();

  if (e.kind == EffectKind::Fixed) {
    const Vector a = zero_mean_row(e);
    if (e.K == 1) {
      se.basis_center = a;  // centering the single basis function is equivalent
    } else {
      bool implied = false;
      if (e.structure.rank_deficiency > 0) {
        // Null-space rows already imply the 0-mean constraint when a lies in
        // their span.
        const Vector resid =
            a - ns * (ns.transpose() * ns).ldlt().solve(ns.transpose() * a);
        implied = resid.norm() <= 1e-10 * std::max(1.0, a.norm());
      }
      if (!implied) {
        rows.conservativeResize(rows.rows() + 1, Eigen::NoChange);
        rows.row(rows.rows() - 1) = a.transpose();
      }
    }
  }
  se.constraints = rows;
  se.sigma_c = conditioned_covariance(e, rows);

  EffectSpec centered = e;
  if (se.basis_center.cwiseAbs().maxCoeff() > 0.0) {
    auto raw = e.basis;
    const Vector center = se.basis_center;
    centered.basis = [raw, center](double x) -> Vector { return raw(x) - center; };
  }
  switch (method) {
    case ScalingMethod::Expectation:
      se.C = scaling_constant(centered, rows);
      break;
    case ScalingMethod::GeometricMean:
      se.C = geometric_mean_constant(centered, rows);
      break;
    case ScalingMethod::None:
      se.C = 1.0;
      break;
  }
  return se;
}

Vector sample_effect_values(const StandardizedEffect& se, double sigma2, int n,
                            std::uint64_t seed) {
  require(n >= 1, Errc::InvalidArgument, "sample_effect_values: n must be >= 1");
  const Matrix f = sqrt_factor_sym(se.coefficient_covariance(sigma2));
  const int r = static_cast<int>(f.cols());
  Rng rng(seed);
  Rng xrng = rng.fork(1);
  Vector out(n), z(r);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < r; ++j) z[j] = rng.normal();
    const double x = sample_covariate(se.base.dist, xrng);
    out[i] = se.eval_basis(x).dot(f * z);
  }
  return out;
}

}  // namespace lgm
