#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "lgm/covariate.hpp"
#include "lgm/linalg.hpp"

namespace lgm {

/// Cubic B-spline basis of K functions on equidistant knots over [lo, hi].
/// Evaluation uses the degree recursion on K-3 cells; cells are half-open with
/// the last one closed, so the endpoints themselves are well defined.
class BSplineBasis {
 public:
  BSplineBasis(int K, double lo, double hi);

  int size() const { return K_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

  /// [B_1(x), ..., B_K(x)]; throws OutOfInterval outside [lo, hi].
  Vector eval(double x) const;

  /// Cell edges lo = t_0 < ... < t_{K-3} = hi.
  std::vector<double> knots() const;

 private:
  int K_;
  double lo_, hi_;
};

/// Exact moment vectors (E[B(X)], E[X B(X)]) for X ~ Unif(lo, hi); closed
/// forms, K >= 4. Throws KTooSmall below that.
std::pair<Vector, Vector> exact_moments(const BSplineBasis& b);

/// Monte-Carlo estimates of the same moments under an arbitrary covariate
/// distribution; deterministic for a fixed seed.
std::pair<Vector, Vector> mc_moments(const BSplineBasis& b, const CovariateDist& dist, int n,
                                     std::uint64_t seed);

}  // namespace lgm
