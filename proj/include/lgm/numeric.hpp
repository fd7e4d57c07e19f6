#pragma once

#include <functional>
#include <span>
#include <vector>

namespace lgm {

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Cached rule; computed once per n by Newton iteration on Legendre polynomials.
const GaussLegendre& gauss_legendre(int n);

/// Integral of f over [a, b] with an n-point Gauss-Legendre rule.
double integrate_gl(const std::function<double(double)>& f, double a, double b, int n = 64);

/// Tanh-sinh quadrature on (a, b). Handles integrable endpoint singularities;
/// f is called as f(x, dist_to_nearest_endpoint) so integrands can stay stable
/// arbitrarily close to the endpoints.
double integrate_tanh_sinh(const std::function<double(double, double)>& f, double a, double b,
                           double rel_tol = 1e-12, int max_level = 12);
double integrate_tanh_sinh(const std::function<double(double)>& f, double a, double b,
                           double rel_tol = 1e-12, int max_level = 12);

double log_sum_exp(std::span<const double> v);

/// Inverse standard normal CDF, Wichura's AS 241 (PPND16). Pure arithmetic, so
/// results are bit-identical across platforms.
double normal_quantile(double p);

/// Two-sided exact sign test: k positives out of m non-tied pairs under Bin(m, 1/2).
double sign_test_p_value(int k, int m);

double median(std::vector<double> v);

}  // namespace lgm
