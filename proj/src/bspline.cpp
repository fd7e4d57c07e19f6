#include "lgm/bspline.hpp"

#include <cmath>

#include "lgm/error.hpp"

namespace lgm {

BSplineBasis::BSplineBasis(int K, double lo, double hi) : K_(K), lo_(lo), hi_(hi) {
  require(K >= 4, Errc::KTooSmall, "BSplineBasis: cubic basis needs K >= 4");
  require(lo < hi, Errc::InvalidArgument, "BSplineBasis: need lo < hi");
}

Vector BSplineBasis::eval(double x) const {
  require(x >= lo_ && x <= hi_, Errc::OutOfInterval, "BSplineBasis::eval: x outside [lo, hi]");
  const int cells = K_ - 3;
  const double z = (x - lo_) / (hi_ - lo_) * cells;
  // Degree-0 indicators on half-open cells, last cell closed.
  const int cell = std::min(cells - 1, static_cast<int>(z));  // 0-based
  std::vector<double> b(K_ + 1, 0.0), next(K_ + 1, 0.0);      // 1-based basis index
  b[cell + 1] = 1.0;
  for (int d = 1; d <= 3; ++d) {
    std::fill(next.begin(), next.end(), 0.0);
    const int kmax = cells + d;
    for (int k = 1; k <= kmax; ++k) {
      double acc = 0.0;
      if (k >= 2) acc += (d + z - k + 1.0) * b[k - 1];
      acc += (k - z) * b[k];
      next[k] = acc / d;
    }
    std::swap(b, next);
  }
  Vector out(K_);
  for (int k = 0; k < K_; ++k) out[k] = b[k + 1];
  return out;
}

std::vector<double> BSplineBasis::knots() const {
  const int cells = K_ - 3;
  std::vector<double> t(cells + 1);
  for (int j = 0; j <= cells; ++j) t[j] = lo_ + (hi_ - lo_) * j / cells;
  return t;
}

std::pair<Vector, Vector> exact_moments(const BSplineBasis& b) {
  const int K = b.size();
  require(K >= 4, Errc::KTooSmall, "exact_moments: K >= 4 required");
  Vector s0(K), v(K);
  if (K >= 7) {
    const double c = K - 3.0;
    s0.setConstant(1.0 / c);
    s0[0] = s0[K - 1] = 1.0 / (24.0 * c);
    s0[1] = s0[K - 2] = 1.0 / (2.0 * c);
    s0[2] = s0[K - 3] = 23.0 / (24.0 * c);
    const double c2 = c * c;
    v[0] = 1.0 / (120.0 * c2);
    v[1] = 7.0 / (30.0 * c2);
    v[2] = 121.0 / (120.0 * c2);
    for (int k = 4; k <= K - 3; ++k) v[k - 1] = (k - 2.0) / c2;
    v[K - 3] = 23.0 / (24.0 * c) - 121.0 / (120.0 * c2);
    v[K - 2] = 1.0 / (2.0 * c) - 7.0 / (30.0 * c2);
    v[K - 1] = 1.0 / (24.0 * c) - 1.0 / (120.0 * c2);
  } else if (K == 6) {
    s0 << 1.0 / 72, 1.0 / 6, 23.0 / 72, 23.0 / 72, 1.0 / 6, 1.0 / 72;
    v << 1.0 / 1080, 7.0 / 270, 121.0 / 1080, 28.0 / 135, 19.0 / 135, 7.0 / 540;
  } else if (K == 5) {
    s0 << 1.0 / 48, 1.0 / 4, 11.0 / 24, 1.0 / 4, 1.0 / 48;
    v << 1.0 / 480, 7.0 / 120, 11.0 / 48, 23.0 / 120, 3.0 / 160;
  } else {
    s0 << 1.0 / 24, 11.0 / 24, 11.0 / 24, 1.0 / 24;
    v << 1.0 / 120, 11.0 / 60, 11.0 / 40, 1.0 / 30;
  }
  Vector s1 = b.lo() * s0 + (b.hi() - b.lo()) * v;
  return {s0, s1};
}

std::pair<Vector, Vector> mc_moments(const BSplineBasis& b, const CovariateDist& dist, int n,
                                     std::uint64_t seed) {
  require(n >= 1, Errc::InvalidArgument, "mc_moments: n must be >= 1");
  Rng rng(seed);
  Vector m0 = Vector::Zero(b.size()), m1 = Vector::Zero(b.size());
  for (int i = 0; i < n; ++i) {
    const double x = sample_covariate(dist, rng);
    const Vector bx = b.eval(x);
    m0 += bx;
    m1 += x * bx;
  }
  return {m0 / n, m1 / n};
}

}  // namespace lgm
