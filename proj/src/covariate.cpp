#include "lgm/covariate.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "lgm/error.hpp"
#include "lgm/numeric.hpp"

namespace lgm {

void validate(const CovariateDist& dist) {
  std::visit(
      [](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, DiscreteUniform>) {
          require(d.K >= 1, Errc::InvalidArgument, "DiscreteUniform: K must be >= 1");
        } else if constexpr (std::is_same_v<T, CategoricalDist>) {
          require(d.p.size() >= 1, Errc::InvalidProbabilityVector, "Categorical: empty p");
          require(d.p.minCoeff() > 0.0, Errc::InvalidProbabilityVector,
                  "Categorical: probabilities must be positive");
          require(std::abs(d.p.sum() - 1.0) <= 1e-12, Errc::InvalidProbabilityVector,
                  "Categorical: probabilities must sum to 1 within 1e-12");
        } else if constexpr (std::is_same_v<T, ContinuousUniform>) {
          require(d.lo < d.hi, Errc::InvalidArgument, "ContinuousUniform: need lo < hi");
        } else {
          require(!d.samples.empty(), Errc::InvalidArgument, "Empirical: no samples");
        }
      },
      dist);
}

// Effects additionally demand a non-degenerate empirical support (a bare
// point mass is still a valid sampling distribution).
void validate_for_effect(const CovariateDist& dist) {
  validate(dist);
  if (const auto* emp = std::get_if<EmpiricalDist>(&dist))
    require(std::set<double>(emp->samples.begin(), emp->samples.end()).size() >= 2,
            Errc::InvalidArgument, "Empirical: effects need at least 2 distinct values");
}

bool is_discrete(const CovariateDist& dist) {
  return std::holds_alternative<DiscreteUniform>(dist) ||
         std::holds_alternative<CategoricalDist>(dist);
}

double dist_mean(const CovariateDist& dist) {
  return std::visit(
      [](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, DiscreteUniform>) {
          return 0.5 * (d.K + 1.0);
        } else if constexpr (std::is_same_v<T, CategoricalDist>) {
          double m = 0.0;
          for (int k = 0; k < d.p.size(); ++k) m += (k + 1.0) * d.p[k];
          return m;
        } else if constexpr (std::is_same_v<T, ContinuousUniform>) {
          return 0.5 * (d.lo + d.hi);
        } else {
          double m = 0.0;
          for (double x : d.samples) m += x;
          return m / d.samples.size();
        }
      },
      dist);
}

double dist_variance(const CovariateDist& dist) {
  return std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, DiscreteUniform>) {
          return (d.K * static_cast<double>(d.K) - 1.0) / 12.0;
        } else if constexpr (std::is_same_v<T, CategoricalDist>) {
          const double m = dist_mean(dist);
          double v = 0.0;
          for (int k = 0; k < d.p.size(); ++k) v += (k + 1.0 - m) * (k + 1.0 - m) * d.p[k];
          return v;
        } else if constexpr (std::is_same_v<T, ContinuousUniform>) {
          return (d.hi - d.lo) * (d.hi - d.lo) / 12.0;
        } else {
          const double m = dist_mean(dist);
          double v = 0.0;
          for (double x : d.samples) v += (x - m) * (x - m);
          return v / d.samples.size();
        }
      },
      dist);
}

std::vector<WeightedPoint> expectation_rule(const CovariateDist& dist,
                                            const std::vector<double>& breakpoints,
                                            int nodes_per_cell) {
  validate(dist);
  std::vector<WeightedPoint> rule;
  if (const auto* du = std::get_if<DiscreteUniform>(&dist)) {
    for (int k = 1; k <= du->K; ++k) rule.push_back({static_cast<double>(k), 1.0 / du->K});
  } else if (const auto* cat = std::get_if<CategoricalDist>(&dist)) {
    for (int k = 0; k < cat->p.size(); ++k) rule.push_back({k + 1.0, cat->p[k]});
  } else if (const auto* emp = std::get_if<EmpiricalDist>(&dist)) {
    for (double x : emp->samples) rule.push_back({x, 1.0 / emp->samples.size()});
  } else {
    const auto& cu = std::get<ContinuousUniform>(dist);
    std::vector<double> edges{cu.lo, cu.hi};
    for (double b : breakpoints)
      if (b > cu.lo && b < cu.hi) edges.push_back(b);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    const GaussLegendre& gl = gauss_legendre(nodes_per_cell);
    const double density = 1.0 / (cu.hi - cu.lo);
    for (size_t c = 0; c + 1 < edges.size(); ++c) {
      const double mid = 0.5 * (edges[c] + edges[c + 1]);
      const double halfw = 0.5 * (edges[c + 1] - edges[c]);
      for (int i = 0; i < nodes_per_cell; ++i)
        rule.push_back({mid + halfw * gl.nodes[i], gl.weights[i] * halfw * density});
    }
  }
  return rule;
}

double sample_covariate(const CovariateDist& dist, Rng& rng) {
  return std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, DiscreteUniform>) {
          const double u = rng.uniform();
          return std::min(d.K, static_cast<int>(u * d.K) + 1);
        } else if constexpr (std::is_same_v<T, CategoricalDist>) {
          double u = rng.uniform();
          for (int k = 0; k < d.p.size(); ++k) {
            u -= d.p[k];
            if (u <= 0.0) return k + 1.0;
          }
          return static_cast<double>(d.p.size());
        } else if constexpr (std::is_same_v<T, ContinuousUniform>) {
          return d.lo + (d.hi - d.lo) * rng.uniform();
        } else {
          const size_t i =
              std::min(d.samples.size() - 1,
                       static_cast<size_t>(rng.uniform() * d.samples.size()));
          return d.samples[i];
        }
      },
      dist);
}

}  // namespace lgm
