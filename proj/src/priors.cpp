#include "lgm/priors.hpp"

#include <algorithm>
#include <cmath>

#include "lgm/error.hpp"
#include "lgm/numeric.hpp"
#include "lgm/rng.hpp"

namespace lgm {

VPState vp_from_sigmas(const Vector& sigma2) {
  require(sigma2.size() >= 1 && sigma2.minCoeff() >= 0.0, Errc::InvalidArgument,
          "vp_from_sigmas: variances must be nonnegative");
  const double v = sigma2.sum();
  require(v > 0.0, Errc::AllZeroVariances, "vp_from_sigmas: all variances are zero");
  return {v, sigma2 / v};
}

Vector sigmas_from_vp(const VPState& state) {
  require(state.V > 0.0, Errc::InvalidArgument, "sigmas_from_vp: V must be positive");
  require(state.omega.size() >= 1 && state.omega.minCoeff() >= 0.0 &&
              std::abs(state.omega.sum() - 1.0) <= 1e-12,
          Errc::InvalidArgument, "sigmas_from_vp: omega must lie on the simplex");
  return state.V * state.omega;
}

double pc0_rate(double U, double alpha) {
  require(U > 0.0 && alpha > 0.0 && alpha < 1.0, Errc::InvalidArgument,
          "pc0_rate: need U > 0 and alpha in (0,1)");
  return -std::log(alpha) / U;
}

double pc0_density(double sigma2, double U, double alpha) {
  return std::exp(pc0_log_density(sigma2, U, alpha));
}

double pc0_log_density(double sigma2, double U, double alpha) {
  require(sigma2 > 0.0, Errc::InvalidArgument, "pc0_density: sigma2 must be positive");
  const double delta = pc0_rate(U, alpha);
  const double sigma = std::sqrt(sigma2);
  return std::log(delta) - std::log(2.0 * sigma) - delta * sigma;
}

double ig_density(double sigma2, double shape, double rate) {
  return std::exp(ig_log_density(sigma2, shape, rate));
}

double ig_log_density(double sigma2, double shape, double rate) {
  require(sigma2 > 0.0 && shape > 0.0 && rate > 0.0, Errc::InvalidArgument,
          "ig_density: positive arguments required");
  return shape * std::log(rate) - std::lgamma(shape) - (shape + 1.0) * std::log(sigma2) -
         rate / sigma2;
}

double beta_log_density(double x, double a, double b) {
  require(x > 0.0 && x < 1.0 && a > 0.0 && b > 0.0, Errc::InvalidArgument,
          "beta_density: bad arguments");
  return std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + (a - 1.0) * std::log(x) +
         (b - 1.0) * std::log1p(-x);
}

double dirichlet_log_density(const Vector& omega, const Vector& alpha) {
  require(omega.size() == alpha.size() && omega.size() >= 2, Errc::InvalidArgument,
          "dirichlet_density: dimension mismatch");
  require(omega.minCoeff() > 0.0 && std::abs(omega.sum() - 1.0) <= 1e-10 &&
              alpha.minCoeff() > 0.0,
          Errc::InvalidArgument, "dirichlet_density: arguments off the simplex");
  double acc = std::lgamma(alpha.sum());
  for (int j = 0; j < omega.size(); ++j)
    acc += (alpha[j] - 1.0) * std::log(omega[j]) - std::lgamma(alpha[j]);
  return acc;
}

namespace {

// omega as a function of phi under effective scaling constant C, plus the
// Jacobian d omega / d phi = C / (phi + C - phi C)^2.
inline double omega_of_phi(double phi, double c) { return phi / (phi + c - phi * c); }

double omega_density(const PhiPrior& prior, double w) {
  switch (prior.kind) {
    case PhiPriorKind::IGPair:
      // An iid inverse-gamma pair with common shape a induces omega ~ Beta(a, a)
      // regardless of the rate.
      return std::exp(beta_log_density(w, prior.shape, prior.shape));
    case PhiPriorKind::PCPair:
      return 1.0 / (2.0 * std::sqrt(w * (1.0 - w)) *
                    (std::sqrt(w) + std::sqrt(1.0 - w)) * (std::sqrt(w) + std::sqrt(1.0 - w)));
    case PhiPriorKind::BetaOmega:
      return std::exp(beta_log_density(w, prior.beta_a, prior.beta_b));
  }
  fail(Errc::UnsupportedPrior, "implied_phi_density: no closed form for this prior");
}

double omega_cdf(const PhiPrior& prior, double w) {
  switch (prior.kind) {
    case PhiPriorKind::IGPair:
      if (prior.shape == 1.0) return w;
      break;
    case PhiPriorKind::PCPair:
      return std::sqrt(w) / (std::sqrt(w) + std::sqrt(1.0 - w));
    case PhiPriorKind::BetaOmega:
      if (prior.beta_a == 1.0 && prior.beta_b == 1.0) return w;
      break;
  }
  // Generic fallback: integrate the density (endpoint-singularity safe).
  return integrate_tanh_sinh([&](double t) { return omega_density(prior, t); }, 0.0, w, 1e-10);
}

}  // namespace

double implied_phi_density(const PhiPrior& prior, double C, double phi) {
  require(phi > 0.0 && phi < 1.0, Errc::InvalidArgument, "implied_phi_density: phi in (0,1)");
  require(C > 0.0, Errc::InvalidArgument, "implied_phi_density: C must be positive");
  const double denom = phi + C - phi * C;
  return omega_density(prior, omega_of_phi(phi, C)) * C / (denom * denom);
}

double implied_phi_cdf(const PhiPrior& prior, double C, double phi) {
  require(phi >= 0.0 && phi <= 1.0, Errc::InvalidArgument, "implied_phi_cdf: phi in [0,1]");
  if (phi <= 0.0) return 0.0;
  if (phi >= 1.0) return 1.0;
  return omega_cdf(prior, omega_of_phi(phi, C));
}

namespace {

double sample_phi(const PhiPrior& prior, double c, Rng& rng) {
  switch (prior.kind) {
    case PhiPriorKind::IGPair: {
      require(prior.shape == 1.0, Errc::UnsupportedPrior,
              "implied_phi_mc: sampling implemented for shape-1 inverse gamma");
      const double s2 = -prior.rate / std::log(rng.uniform());
      const double e2 = -prior.rate / std::log(rng.uniform());
      return s2 * c / (s2 * c + e2);
    }
    case PhiPriorKind::PCPair: {
      const double delta = pc0_rate(prior.U, prior.alpha);
      const double s = -std::log(rng.uniform()) / delta;
      const double e = -std::log(rng.uniform()) / delta;
      return s * s * c / (s * s * c + e * e);
    }
    case PhiPriorKind::BetaOmega: {
      require(prior.beta_a == 1.0 && prior.beta_b == 1.0, Errc::UnsupportedPrior,
              "implied_phi_mc: sampling implemented for the uniform simplex weight");
      const double w = rng.uniform();
      return w * c / (w * c + 1.0 - w);
    }
  }
  fail(Errc::UnsupportedPrior, "implied_phi_mc: unknown prior");
}

}  // namespace

Histogram implied_phi_mc(const PhiPrior& prior, double C, int n, std::uint64_t seed, int bins) {
  require(n >= 1 && bins >= 1, Errc::InvalidArgument, "implied_phi_mc: n and bins must be >= 1");
  Rng rng(seed);
  Histogram h;
  h.edges.resize(bins + 1);
  for (int i = 0; i <= bins; ++i) h.edges[i] = static_cast<double>(i) / bins;
  h.density.assign(bins, 0.0);
  for (int i = 0; i < n; ++i) {
    const double phi = sample_phi(prior, C, rng);
    const int b = std::min(bins - 1, static_cast<int>(phi * bins));
    h.density[b] += 1.0;
  }
  for (double& d : h.density) d *= bins / static_cast<double>(n);
  return h;
}

double implied_phi_ks(const PhiPrior& prior, double C, int n, std::uint64_t seed) {
  require(n >= 1, Errc::InvalidArgument, "implied_phi_ks: n must be >= 1");
  Rng rng(seed);
  std::vector<double> draws(n);
  for (int i = 0; i < n; ++i) draws[i] = sample_phi(prior, C, rng);
  std::sort(draws.begin(), draws.end());
  double ks = 0.0;
  for (int i = 0; i < n; ++i) {
    const double f = implied_phi_cdf(prior, C, draws[i]);
    ks = std::max(ks, std::abs(f - static_cast<double>(i) / n));
    ks = std::max(ks, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return ks;
}

}  // namespace lgm
