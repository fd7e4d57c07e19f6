#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "lgm/error.hpp"
#include "lgm/numeric.hpp"
#include "lgm/priors.hpp"
#include "lgm/rng.hpp"

using namespace lgm;

namespace {

constexpr double kRw1Constant = 4.16;       // local-level effect, 25 levels
constexpr double kRw1Reference = 3.773848;  // its geometric-mean counterpart

std::vector<PhiPrior> section_priors() {
  PhiPrior ig;
  ig.kind = PhiPriorKind::IGPair;
  PhiPrior pc;
  pc.kind = PhiPriorKind::PCPair;
  PhiPrior vp;
  vp.kind = PhiPriorKind::BetaOmega;
  return {ig, pc, vp};
}

std::vector<double> scaling_constants() {
  return {1.0, kRw1Constant, kRw1Constant / kRw1Reference};
}

}  // namespace

TEST_CASE("vp reparameterization round trips") {
  Vector s(2);
  s << 1.0, 1.0;
  VPState v = vp_from_sigmas(s);
  CHECK(v.V == 2.0);
  CHECK(v.omega[0] == doctest::Approx(0.5));
  s << 0.2, 0.8;
  v = vp_from_sigmas(s);
  CHECK(v.V == doctest::Approx(1.0));
  CHECK(v.omega[1] == doctest::Approx(0.8));

  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    const int j = 2 + static_cast<int>(rng.uniform() * 5);
    Vector sig(j);
    for (int i = 0; i < j; ++i) sig[i] = std::exp(2.0 * rng.normal());
    const Vector back = sigmas_from_vp(vp_from_sigmas(sig));
    CHECK((back - sig).cwiseAbs().maxCoeff() < 1e-12 * sig.cwiseAbs().maxCoeff());
  }
  CHECK_THROWS_AS(vp_from_sigmas(Vector::Zero(3)), Error);
}

TEST_CASE("pc0 density normalizes and calibrates the tail") {
  const double mass = integrate_tanh_sinh(
      [](double s2) { return pc0_density(s2, 3.0, 0.05); }, 0.0, 5000.0, 1e-12, 14);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
  // P(sigma > U) = alpha: integrate above U^2
  const double tail = integrate_tanh_sinh(
      [](double s2) { return pc0_density(s2, 3.0, 0.05); }, 9.0, 5000.0, 1e-12, 14);
  CHECK(tail == doctest::Approx(0.05).epsilon(1e-6));
  // doubling the rate halves the median of sigma
  const double delta = pc0_rate(3.0, 0.05);
  const double median1 = std::log(2.0) / delta;
  const double median2 = std::log(2.0) / (2.0 * delta);
  CHECK(median2 == doctest::Approx(0.5 * median1));
}

TEST_CASE("inverse gamma density integrates to one") {
  const double mass = integrate_tanh_sinh(
      [](double s2) { return ig_density(s2, 1.0, 5e-5); }, 0.0, 1e4, 1e-12, 16);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("implied densities integrate to one for all section arms") {
  for (const PhiPrior& prior : section_priors()) {
    for (double c : scaling_constants()) {
      const double mass = integrate_tanh_sinh(
          [&](double phi) { return implied_phi_density(prior, c, phi); }, 0.0, 1.0, 1e-13, 14);
      CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("uniform weight with no distortion implies a flat proportion") {
  PhiPrior vp;
  vp.kind = PhiPriorKind::BetaOmega;
  for (double phi : {0.05, 0.3, 0.5, 0.77, 0.99})
    CHECK(implied_phi_density(vp, 1.0, phi) == doctest::Approx(1.0).epsilon(1e-12));
  PhiPrior ig;
  ig.kind = PhiPriorKind::IGPair;
  for (double phi : {0.1, 0.5, 0.9})
    CHECK(implied_phi_density(ig, 1.0, phi) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("distorted proportion density at a reference point") {
  PhiPrior ig;
  ig.kind = PhiPriorKind::IGPair;
  const double c = kRw1Constant;
  const double expected = c / std::pow(0.5 + c - 0.5 * c, 2.0);
  CHECK(implied_phi_density(ig, c, 0.5) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(0.625).epsilon(0.001));
}

TEST_CASE("shape-1 inverse-gamma and flat-weight curves coincide") {
  PhiPrior ig;
  ig.kind = PhiPriorKind::IGPair;
  PhiPrior vp;
  vp.kind = PhiPriorKind::BetaOmega;
  for (double c : scaling_constants())
    for (int i = 1; i < 100; ++i) {
      const double phi = i / 100.0;
      CHECK(std::abs(implied_phi_density(ig, c, phi) - implied_phi_density(vp, c, phi)) <
            1e-10);
    }
}

TEST_CASE("monte-carlo oracle agrees with every closed form") {
  const int n = 1000000;
  std::uint64_t seed = 100;
  for (const PhiPrior& prior : section_priors())
    for (double c : scaling_constants()) {
      const double ks = implied_phi_ks(prior, c, n, ++seed);
      CHECK(ks < 0.02);
    }
}

TEST_CASE("histogram estimate is deterministic and matches the density") {
  PhiPrior pc;
  pc.kind = PhiPriorKind::PCPair;
  const Histogram h1 = implied_phi_mc(pc, kRw1Constant, 200000, 9, 50);
  const Histogram h2 = implied_phi_mc(pc, kRw1Constant, 200000, 9, 50);
  for (size_t i = 0; i < h1.density.size(); ++i) CHECK(h1.density[i] == h2.density[i]);
  // compare a few interior bins against the closed form
  for (int b : {10, 25, 40}) {
    const double mid = (h1.edges[b] + h1.edges[b + 1]) / 2.0;
    CHECK(h1.density[b] ==
          doctest::Approx(implied_phi_density(pc, kRw1Constant, mid)).epsilon(0.1));
  }
}

TEST_CASE("scaling distortion orders the cdfs at the deciles") {
  // C > 1: mass shifts toward large proportions, so the distorted CDF sits
  // below the undistorted one; the geometric-mean arm sits in between.
  for (const PhiPrior& prior : section_priors()) {
    for (int d = 1; d <= 9; ++d) {
      const double phi = d / 10.0;
      const double plain = implied_phi_cdf(prior, 1.0, phi);
      const double gm = implied_phi_cdf(prior, kRw1Constant / kRw1Reference, phi);
      const double none = implied_phi_cdf(prior, kRw1Constant, phi);
      CHECK(none < gm);
      CHECK(gm < plain);
    }
  }
  // C < 1 reverses the direction
  PhiPrior ig;
  ig.kind = PhiPriorKind::IGPair;
  for (int d = 1; d <= 9; ++d) {
    const double phi = d / 10.0;
    CHECK(implied_phi_cdf(ig, 0.4, phi) > implied_phi_cdf(ig, 1.0, phi));
  }
}

TEST_CASE("general inverse-gamma shape induces a symmetric beta weight") {
  PhiPrior ig;
  ig.kind = PhiPriorKind::IGPair;
  ig.shape = 2.5;
  // density of omega should match Beta(a, a); check through phi at C = 1
  for (double phi : {0.2, 0.5, 0.7}) {
    const double expected = std::exp(beta_log_density(phi, 2.5, 2.5));
    CHECK(implied_phi_density(ig, 1.0, phi) == doctest::Approx(expected).epsilon(1e-12));
  }
  // the closed-form cdf falls back to quadrature for a != 1
  CHECK(implied_phi_cdf(ig, 1.0, 0.5) == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("dirichlet density for general weight splits") {
  Vector omega(3), alpha(3);
  omega << 0.2, 0.3, 0.5;
  alpha << 1.0, 1.0, 1.0;
  CHECK(dirichlet_log_density(omega, alpha) == doctest::Approx(std::lgamma(3.0)).epsilon(1e-12));
  alpha << 2.0, 1.0, 1.0;
  const double expected = std::lgamma(4.0) - std::lgamma(2.0) + std::log(0.2);
  CHECK(dirichlet_log_density(omega, alpha) == doctest::Approx(expected).epsilon(1e-12));
}
