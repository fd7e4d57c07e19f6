#include "lgm/neldermead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lgm/error.hpp"

namespace lgm {

namespace {

struct SimplexState {
  std::vector<Vector> x;
  std::vector<double> fx;
  std::vector<int> order;

  void sort() {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return fx[a] < fx[b]; });
  }
};

NelderMeadResult run_simplex(const std::function<double(const Vector&)>& f, const Vector& start,
                             double step, double tol, int max_iter, int* evals) {
  const int n = static_cast<int>(start.size());
  const double alpha = 1.0;
  const double beta = 1.0 + 2.0 / n;
  const double gamma = 0.75 - 0.5 / n;
  const double delta = 1.0 - 1.0 / n;

  SimplexState s;
  s.x.assign(n + 1, start);
  for (int i = 0; i < n; ++i) s.x[i + 1][i] += step;
  s.fx.resize(n + 1);
  s.order.resize(n + 1);
  for (int i = 0; i <= n; ++i) {
    s.fx[i] = f(s.x[i]);
    ++*evals;
  }

  NelderMeadResult res;
  Vector centroid(n), xr(n), xe(n), xc(n);
  int it = 0;
  for (; it < max_iter; ++it) {
    s.sort();
    const int best = s.order[0], worst = s.order[n], second = s.order[n - 1];
    if (std::abs(s.fx[worst] - s.fx[best]) <= tol * std::max(1.0, std::abs(s.fx[best]))) {
      res.converged = true;
      break;
    }
    centroid.setZero();
    for (int i = 0; i < n; ++i) centroid += s.x[s.order[i]];
    centroid /= n;

    xr = centroid + alpha * (centroid - s.x[worst]);
    const double fr = f(xr);
    ++*evals;
    if (fr < s.fx[best]) {
      xe = centroid + beta * (xr - centroid);
      const double fe = f(xe);
      ++*evals;
      if (fe < fr) {
        s.x[worst] = xe;
        s.fx[worst] = fe;
      } else {
        s.x[worst] = xr;
        s.fx[worst] = fr;
      }
    } else if (fr < s.fx[second]) {
      s.x[worst] = xr;
      s.fx[worst] = fr;
    } else {
      const bool outside = fr < s.fx[worst];
      if (outside)
        xc = centroid + gamma * (xr - centroid);
      else
        xc = centroid - gamma * (centroid - s.x[worst]);
      const double fc = f(xc);
      ++*evals;
      if (fc < std::min(fr, s.fx[worst])) {
        s.x[worst] = xc;
        s.fx[worst] = fc;
      } else {
        for (int i = 1; i <= n; ++i) {
          const int idx = s.order[i];
          s.x[idx] = s.x[best] + delta * (s.x[idx] - s.x[best]);
          s.fx[idx] = f(s.x[idx]);
          ++*evals;
        }
      }
    }
  }
  s.sort();
  res.x = s.x[s.order[0]];
  res.value = s.fx[s.order[0]];
  res.iterations = it;
  return res;
}

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const Vector&)>& f, const Vector& x0,
                             const NelderMeadOptions& opts) {
  require(x0.size() >= 1, Errc::InvalidArgument, "nelder_mead: empty start point");
  int evals = 0;
  int budget = opts.max_iterations;
  double step = opts.initial_step;
  NelderMeadResult best = run_simplex(f, x0, step, opts.tolerance, budget, &evals);
  budget -= best.iterations;
  int total_iters = best.iterations;
  for (int r = 0; r < opts.restarts && budget > 0; ++r) {
    step *= 0.25;
    NelderMeadResult next = run_simplex(f, best.x, step, opts.tolerance, budget, &evals);
    budget -= next.iterations;
    total_iters += next.iterations;
    if (next.value < best.value) {
      next.iterations = total_iters;
      next.converged = next.converged && best.converged;
      best.x = next.x;
      best.value = next.value;
      best.converged = next.converged;
    }
  }
  best.iterations = total_iters;
  return best;
}

}  // namespace lgm
