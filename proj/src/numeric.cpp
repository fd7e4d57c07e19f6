#include "lgm/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

#include "lgm/error.hpp"

namespace lgm {

namespace {

GaussLegendre compute_gauss_legendre(int n) {
  GaussLegendre rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Chebyshev starting guess, then Newton on P_n.
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

}  // namespace

const GaussLegendre& gauss_legendre(int n) {
  require(n >= 1, Errc::InvalidArgument, "gauss_legendre: n must be >= 1");
  static std::mutex mu;
  static std::map<int, GaussLegendre> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss_legendre(n)).first;
  return it->second;
}

double integrate_gl(const std::function<double(double)>& f, double a, double b, int n) {
  const GaussLegendre& rule = gauss_legendre(n);
  const double mid = 0.5 * (a + b), halfw = 0.5 * (b - a);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += rule.weights[i] * f(mid + halfw * rule.nodes[i]);
  return sum * halfw;
}

double integrate_tanh_sinh(const std::function<double(double, double)>& f, double a, double b,
                           double rel_tol, int max_level) {
  // x = c + s*tanh(pi/2 sinh t); the distance to the nearest endpoint is
  // computed in a cancellation-free form so integrands with log or power
  // singularities at a or b can be evaluated safely.
  const double s = 0.5 * (b - a), c = 0.5 * (a + b);
  const double tmax = 3.8;
  auto eval = [&](double t, double& w) {
    const double u = 0.5 * M_PI * std::sinh(t);
    const double ch = std::cosh(u);
    w = 0.5 * M_PI * std::cosh(t) / (ch * ch);
    const double dist = s * 2.0 / (std::exp(2.0 * std::abs(u)) + 1.0);  // s*(1-|tanh u|)
    // Build the abscissa from the nearer endpoint so it stays strictly inside
    // (a, b); skip nodes that underflow onto an endpoint (their weight is ~0).
    const double x = u >= 0.0 ? b - dist : a + dist;
    if (!(x > a && x < b)) return 0.0;
    return f(x, dist);
  };
  double h = 1.0;
  double w0;
  double integral = eval(0.0, w0) * w0;
  for (double t = h; t <= tmax; t += h) {
    double w1, w2;
    const double f1 = eval(t, w1);
    const double f2 = eval(-t, w2);
    if (std::isfinite(f1)) integral += f1 * w1;
    if (std::isfinite(f2)) integral += f2 * w2;
  }
  double prev = std::numeric_limits<double>::infinity();
  for (int level = 0; level < max_level; ++level) {
    // Halve the spacing: add the midpoints of the current grid.
    double sum = 0.0;
    for (double t = h * 0.5; t <= tmax; t += h) {
      double w1, w2;
      const double f1 = eval(t, w1);
      const double f2 = eval(-t, w2);
      if (std::isfinite(f1)) sum += f1 * w1;
      if (std::isfinite(f2)) sum += f2 * w2;
    }
    integral = 0.5 * integral + 0.5 * h * sum;
    h *= 0.5;
    if (level >= 2 && std::abs(integral - prev) <= rel_tol * std::max(1e-300, std::abs(integral)))
      return integral * s;
    prev = integral;
  }
  return integral * s;
}

double integrate_tanh_sinh(const std::function<double(double)>& f, double a, double b,
                           double rel_tol, int max_level) {
  return integrate_tanh_sinh([&](double x, double) { return f(x); }, a, b, rel_tol, max_level);
}

double log_sum_exp(std::span<const double> v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double sum = 0.0;
  for (double x : v) sum += std::exp(x - m);
  return m + std::log(sum);
}

double normal_quantile(double p) {
  require(p > 0.0 && p < 1.0, Errc::InvalidArgument, "normal_quantile: p must be in (0,1)");
  // AS 241 PPND16 rational approximations (Wichura 1988).
  const double q = p - 0.5;
  double r;
  if (std::abs(q) <= 0.425) {
    r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                 6.7265770927008700853e+4) *
                    r +
                4.5921953931549871457e+4) *
                   r +
               1.3731693765509461125e+4) *
                  r +
              1.9715909503065514427e+3) *
                 r +
             1.3314166789178437745e+2) *
                r +
            3.3871328727963666080e+0) /
           (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                 3.9307895800092710610e+4) *
                    r +
                2.1213794301586595867e+4) *
                   r +
               5.3941960214247511077e+3) *
                  r +
              6.8718700749205790830e+2) *
                 r +
             4.2313330701600911252e+1) *
                r +
            1.0);
  }
  r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                2.41780725177450611770e-1) *
                   r +
               1.27045825245236838258e+0) *
                  r +
              3.64784832476320460504e+0) *
                 r +
             5.76949722146069140550e+0) *
                r +
            4.63033784615654529590e+0) *
               r +
           1.42343711074968357734e+0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                1.51986665636164571966e-2) *
                   r +
               1.48103976427480074590e-1) *
                  r +
              6.89767334985100004550e-1) *
                 r +
             1.67638483018380384940e+0) *
                r +
            2.05319162663775882187e+0) *
               r +
           1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                1.24266094738807843860e-3) *
                   r +
               2.65321895265761230930e-2) *
                  r +
              2.96560571828504891230e-1) *
                 r +
             1.78482653991729133580e+0) *
                r +
            5.46378491116411436990e+0) *
               r +
           6.65790464350110377720e+0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                1.84631831751005468180e-5) *
                   r +
               7.86869131145613259100e-4) *
                  r +
              1.48753612908506148525e-2) *
                 r +
             1.36929880922735805310e-1) *
                r +
            5.99832206555887937690e-1) *
               r +
           1.0);
  }
  return (q < 0.0) ? -val : val;
}

double sign_test_p_value(int k, int m) {
  require(m >= 0 && k >= 0 && k <= m, Errc::InvalidArgument, "sign_test: bad counts");
  if (m == 0) return 1.0;
  const int lo = std::min(k, m - k);
  // 2 * P(X <= lo) for X ~ Bin(m, 1/2), via stable log terms.
  double acc = -std::numeric_limits<double>::infinity();
  for (int j = 0; j <= lo; ++j) {
    double lc = std::lgamma(m + 1.0) - std::lgamma(j + 1.0) - std::lgamma(m - j + 1.0) -
                m * std::log(2.0);
    acc = (acc > lc) ? acc + std::log1p(std::exp(lc - acc)) : lc + std::log1p(std::exp(acc - lc));
  }
  return std::min(1.0, 2.0 * std::exp(acc));
}

double median(std::vector<double> v) {
  require(!v.empty(), Errc::InvalidArgument, "median: empty vector");
  const size_t n = v.size();
  std::nth_element(v.begin(), v.begin() + n / 2, v.end());
  double hi = v[n / 2];
  if (n % 2 == 1) return hi;
  std::nth_element(v.begin(), v.begin() + n / 2 - 1, v.end());
  return 0.5 * (v[n / 2 - 1] + hi);
}

}  // namespace lgm
