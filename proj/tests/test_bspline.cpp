#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "lgm/bspline.hpp"
#include "lgm/error.hpp"

using namespace lgm;

namespace {

// Closed-form cubic pieces of an equidistant basis, in cell-index coordinates.
double g1(double y) { return 0.5 * (-y * y * y / 3.0 + y * y - y + 1.0 / 3.0); }
double g2(double y) { return y * y * y / 2.0 - y * y + 2.0 / 3.0; }
double g3(double y) { return 0.5 * (-y * y * y + y * y + y + 1.0 / 3.0); }
double g4(double y) { return y * y * y / 6.0; }

double closed_form(int K, int k, double xhat) {
  const double z = xhat * (K - 3);
  double acc = 0.0;
  if (k - 1 < z && z < k) acc += g1(z - (k - 1));
  if (k - 2 < z && z < k - 1) acc += g2(z - (k - 2));
  if (k - 3 < z && z < k - 2) acc += g3(z - (k - 3));
  if (k - 4 < z && z < k - 3) acc += g4(z - (k - 4));
  return acc;
}

}  // namespace

TEST_CASE("recursion matches the closed-form cubic pieces") {
  for (int K : {4, 5, 7, 10, 23}) {
    BSplineBasis b(K, 0.0, 1.0);
    for (int i = 1; i <= 9; ++i) {
      const double xhat = (i + 0.437) / 10.5;  // stays clear of every knot
      const Vector v = b.eval(xhat);
      for (int k = 1; k <= K; ++k)
        CHECK(v[k - 1] == doctest::Approx(closed_form(K, k, xhat)).epsilon(1e-12));
    }
  }
}

TEST_CASE("partition of unity on a fine interior grid") {
  for (int K = 4; K <= 50; ++K) {
    BSplineBasis b(K, -2.0, 5.0);
    for (int i = 0; i < 1000; ++i) {
      const double x = -2.0 + 7.0 * (i + 0.5) / 1000.0;
      CHECK(b.eval(x).sum() == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("endpoints are defined and local support holds at the left edge") {
  BSplineBasis b(10, 0.0, 1.0);
  const Vector at_lo = b.eval(0.0);
  CHECK(at_lo.sum() == doctest::Approx(1.0).epsilon(1e-12));
  for (int k = 4; k < 10; ++k) CHECK(at_lo[k] == 0.0);
  const Vector at_hi = b.eval(1.0);
  CHECK(at_hi.sum() == doctest::Approx(1.0).epsilon(1e-12));
  for (int k = 0; k < 6; ++k) CHECK(at_hi[k] == 0.0);
  CHECK_THROWS_AS(b.eval(1.0 + 1e-9), Error);
  CHECK_THROWS_AS(b.eval(-1e-9), Error);
}

TEST_CASE("support width is 4 cells") {
  const int K = 20;
  BSplineBasis b(K, 0.0, 1.0);
  const int cells = K - 3;
  for (int i = 0; i < 2000; ++i) {
    const double x = (i + 0.5) / 2000.0;
    const Vector v = b.eval(x);
    const double z = x * cells;
    for (int k = 1; k <= K; ++k) {
      const bool inside = (z > k - 4) && (z < k);
      if (!inside) CHECK(v[k - 1] == 0.0);
    }
  }
}

TEST_CASE("exact moments for the reference sizes") {
  {
    BSplineBasis b(7, 0.0, 1.0);
    auto [s0, s1] = exact_moments(b);
    Vector expected(7);
    expected << 1.0 / 24, 1.0 / 2, 23.0 / 24, 1.0, 23.0 / 24, 1.0 / 2, 1.0 / 24;
    expected /= 4.0;
    CHECK((s0 - expected).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(s1.sum() == doctest::Approx(0.5).epsilon(1e-13));  // E[X] under Unif(0,1)
  }
  {
    BSplineBasis b(4, 0.0, 1.0);
    auto [s0, s1] = exact_moments(b);
    Vector expected(4);
    expected << 1.0 / 24, 11.0 / 24, 11.0 / 24, 1.0 / 24;
    CHECK((s0 - expected).cwiseAbs().maxCoeff() < 1e-15);
  }
  for (int K : {4, 5, 6, 7, 11, 30}) {
    BSplineBasis b(K, 0.0, 1.0);
    auto [s0, s1] = exact_moments(b);
    CHECK(s0.sum() == doctest::Approx(1.0).epsilon(1e-13));
    // reflection identity: v_k + v_{K+1-k} = s0_k on the unit interval
    for (int k = 0; k < K; ++k)
      CHECK(s1[k] + s1[K - 1 - k] == doctest::Approx(s0[k]).epsilon(1e-12));
  }
}

TEST_CASE("exact moments transform affinely with the interval") {
  BSplineBasis unit(9, 0.0, 1.0), shifted(9, 2.0, 6.0);
  auto [s0u, s1u] = exact_moments(unit);
  auto [s0s, s1s] = exact_moments(shifted);
  CHECK((s0s - s0u).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((s1s - (2.0 * s0u + 4.0 * s1u)).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("quadrature reproduces the closed-form moments") {
  for (int K : {4, 5, 6, 7, 10, 20}) {
    BSplineBasis b(K, 0.0, 1.0);
    auto [s0, s1] = exact_moments(b);
    Vector q0 = Vector::Zero(K), q1 = Vector::Zero(K);
    for (const auto& pt : expectation_rule(ContinuousUniform{0.0, 1.0}, b.knots())) {
      const Vector bx = b.eval(pt.x);
      q0 += pt.w * bx;
      q1 += pt.w * pt.x * bx;
    }
    CHECK((q0 - s0).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((q1 - s1).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("monte-carlo moments agree with the closed forms") {
  const int n = 1000000;
  for (int K : {4, 5, 6, 7, 10, 20}) {
    BSplineBasis b(K, 0.0, 1.0);
    auto [s0, s1] = exact_moments(b);
    auto [m0, m1] = mc_moments(b, ContinuousUniform{0.0, 1.0}, n, 31 + K);
    for (int k = 0; k < K; ++k) {
      CHECK(m0[k] == doctest::Approx(s0[k]).epsilon(0.01));
      CHECK(m1[k] == doctest::Approx(s1[k]).epsilon(0.01));
    }
  }
}

TEST_CASE("monte-carlo moments: point mass and determinism") {
  BSplineBasis b(8, 0.0, 1.0);
  EmpiricalDist point{{0.37, 0.37}};
  auto [m0, m1] = mc_moments(b, point, 50, 3);
  CHECK((m0 - b.eval(0.37)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((m1 - 0.37 * b.eval(0.37)).cwiseAbs().maxCoeff() < 1e-14);
  auto again = mc_moments(b, ContinuousUniform{0.0, 1.0}, 1000, 5);
  auto again2 = mc_moments(b, ContinuousUniform{0.0, 1.0}, 1000, 5);
  CHECK((again.first - again2.first).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("too small a basis is rejected") {
  CHECK_THROWS_AS(BSplineBasis(3, 0.0, 1.0), Error);
  try {
    BSplineBasis(2, 0.0, 1.0);
    FAIL("expected KTooSmall");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::KTooSmall);
  }
}
