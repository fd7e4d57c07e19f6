#include <cmath>

#include "lgm/error.hpp"
#include "lgm/qmod.hpp"
#include "lgm/standardize.hpp"

namespace lgm {

namespace {

}  // namespace

// Built from the covariate moments: Gram-Schmidt of the degree-m monomial
// against all lower orders under pi(x).
std::function<Vector(double)> polynomial_trend_basis(const CovariateDist& dist,
                                                     const std::vector<double>& breakpoints,
                                                     int m) {
  const auto rule = expectation_rule(dist, breakpoints);
  std::vector<double> moments(2 * m + 1, 0.0);
  for (const auto& pt : rule)
    for (int j = 0; j <= 2 * m; ++j) moments[j] += pt.w * std::pow(pt.x, j);
  Matrix gram(m, m);
  Vector rhs(m);
  for (int l = 0; l < m; ++l) {
    for (int j = 0; j < m; ++j) gram(l, j) = moments[l + j];
    rhs[l] = moments[l + m];
  }
  const Vector coef = gram.ldlt().solve(rhs);
  return [coef, m](double x) {
    Vector d(1);
    double acc = std::pow(x, m);
    for (int j = 0; j < m; ++j) acc -= coef[j] * std::pow(x, j);
    d[0] = acc;
    return d;
  };
}

namespace {

CompositeEffect decompose_impl(const EffectSpec& e, const EffectSpec& residual_spec) {
  CompositeEffect out;
  const int d = residual_spec.structure.rank_deficiency;
  for (int m = 1; m <= d - 1; ++m) {
    EffectSpec t = make_linear(e.dist, EffectKind::Fixed);
    if (m > 1) t.basis = polynomial_trend_basis(e.dist, e.breakpoints, m);
    out.trend.push_back(standardize(t));
  }
  out.residual = standardize(residual_spec);
  return out;
}

}  // namespace

EffectSpec apply_qmod(const EffectSpec& e, const QModResult& qmod) {
  require(e.family == EffectFamily::PSpline, Errc::UnsupportedFamily,
          "apply_qmod: only spline effects take the modified structure matrix");
  EffectSpec out = e;
  out.structure = qmod.Q_tilde;
  return out;
}

CompositeEffect decompose(const EffectSpec& e) {
  switch (e.family) {
    case EffectFamily::RW1:
    case EffectFamily::RW2:
    case EffectFamily::Icar:
      return decompose_impl(e, e);
    case EffectFamily::PSpline: {
      const Matrix s_tilde = target_null_space(*e.bspline, e.dist, e.penalty_order);
      return decompose(e, fit_lambda(e.structure.entries, s_tilde, e.penalty_order));
    }
    default:
      fail(Errc::UnsupportedFamily, "decompose: effect has no trend/residual decomposition");
  }
}

CompositeEffect decompose(const EffectSpec& e, const QModResult& qmod) {
  require(e.family == EffectFamily::PSpline, Errc::UnsupportedFamily,
          "decompose: precomputed modification only applies to spline effects");
  return decompose_impl(e, apply_qmod(e, qmod));
}

}  // namespace lgm
