#pragma once

#include <variant>
#include <vector>

#include "lgm/linalg.hpp"
#include "lgm/rng.hpp"

namespace lgm {

// Probability model pi(x) for one covariate. Discrete supports are 1..K.
struct DiscreteUniform {
  int K;
};
struct CategoricalDist {
  Vector p;
};
struct ContinuousUniform {
  double lo, hi;
};
struct EmpiricalDist {
  std::vector<double> samples;
};

using CovariateDist = std::variant<DiscreteUniform, CategoricalDist, ContinuousUniform, EmpiricalDist>;

void validate(const CovariateDist& dist);
/// Stricter check for distributions attached to effects: empirical supports
/// must contain at least two distinct values.
void validate_for_effect(const CovariateDist& dist);
bool is_discrete(const CovariateDist& dist);
double dist_mean(const CovariateDist& dist);
double dist_variance(const CovariateDist& dist);

struct WeightedPoint {
  double x;
  double w;
};

/// Deterministic expectation rule with total weight 1: exact finite sums for
/// discrete and empirical distributions; per-cell Gauss-Legendre between
/// breakpoints for continuous ones (exact to rounding for piecewise
/// polynomials of the degrees that arise here).
std::vector<WeightedPoint> expectation_rule(const CovariateDist& dist,
                                            const std::vector<double>& breakpoints = {},
                                            int nodes_per_cell = 256);

double sample_covariate(const CovariateDist& dist, Rng& rng);

}  // namespace lgm
