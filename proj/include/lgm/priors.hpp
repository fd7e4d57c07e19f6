#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "lgm/linalg.hpp"

namespace lgm {

/// Total-variance / simplex-weights reparameterization of per-effect variances.
struct VPState {
  double V = 0.0;
  Vector omega;
};

VPState vp_from_sigmas(const Vector& sigma2);
Vector sigmas_from_vp(const VPState& state);

// --- Elementary prior densities ---

struct InvGamma {
  double shape = 1.0, rate = 5e-5;
};
struct PC0 {
  double U = 3.0, alpha = 0.05;
};
struct Jeffreys {};
struct BetaOnOmega {
  double a = 1.0, b = 1.0;
};
struct DirichletOnOmega {
  Vector alpha;
};
using PriorSpec = std::variant<InvGamma, PC0, Jeffreys, BetaOnOmega, DirichletOnOmega>;

/// Exponential rate on the standard deviation implied by P(sigma > U) = alpha.
double pc0_rate(double U, double alpha);
/// pi(sigma2) = delta / (2 sqrt(sigma2)) exp(-delta sqrt(sigma2)).
double pc0_density(double sigma2, double U, double alpha);
double pc0_log_density(double sigma2, double U, double alpha);
double ig_density(double sigma2, double shape, double rate);
double ig_log_density(double sigma2, double shape, double rate);
double beta_log_density(double x, double a, double b);
double dirichlet_log_density(const Vector& omega, const Vector& alpha);

// --- Implied prior on the interpretable variance proportion phi ---
//
// With sigma2 scaled by an effective constant C, phi = sigma2 C / (sigma2 C +
// sigma2_eps), and a prior on (sigma2, sigma2_eps) induces a closed-form
// density on phi through omega = phi / (phi + C - phi C).

enum class PhiPriorKind { IGPair, PCPair, BetaOmega };

struct PhiPrior {
  PhiPriorKind kind = PhiPriorKind::IGPair;
  double shape = 1.0, rate = 5e-5;  // IGPair
  double U = 3.0, alpha = 0.05;     // PCPair
  double beta_a = 1.0, beta_b = 1.0;
};

double implied_phi_density(const PhiPrior& prior, double C, double phi);
double implied_phi_cdf(const PhiPrior& prior, double C, double phi);

struct Histogram {
  std::vector<double> edges;
  std::vector<double> density;
};

/// Samples (sigma2, sigma2_eps) from the prior, maps to phi, and bins the
/// draws; deterministic for a fixed seed.
Histogram implied_phi_mc(const PhiPrior& prior, double C, int n, std::uint64_t seed,
                         int bins = 200);

/// Kolmogorov-Smirnov distance between n Monte-Carlo draws of phi and the
/// closed-form CDF.
double implied_phi_ks(const PhiPrior& prior, double C, int n, std::uint64_t seed);

}  // namespace lgm
