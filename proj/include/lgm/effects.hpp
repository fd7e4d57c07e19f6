#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "lgm/bspline.hpp"
#include "lgm/covariate.hpp"
#include "lgm/linalg.hpp"

namespace lgm {

enum class EffectKind { Fixed, Random };
enum class EffectFamily { Linear, Categorical, RW1, RW2, Icar, PSpline };

std::string to_string(EffectFamily f);
std::string to_string(EffectKind k);

/// One model effect f(X) = D(X)^T u with u | sigma2 ~ N(0, sigma2 Q^*): basis
/// descriptor, structure matrix, covariate distribution and fixed/random flag.
struct EffectSpec {
  EffectFamily family = EffectFamily::Linear;
  int K = 1;
  EffectKind kind = EffectKind::Random;
  CovariateDist dist = ContinuousUniform{0.0, 1.0};
  StructureMatrix structure;
  std::function<Vector(double)> basis;
  std::vector<double> breakpoints;  // quadrature cell edges for continuous bases

  // Construction payloads kept for serialization and the Q modification.
  std::optional<Matrix> adjacency;
  int penalty_order = 0;                        // P-splines
  std::optional<BSplineBasis> bspline;          // P-splines

  Vector eval_basis(double x) const { return basis(x); }
  bool indicator_basis() const;
  int order() const { return structure.rank_deficiency; }
};

EffectSpec make_linear(const CovariateDist& dist, EffectKind kind = EffectKind::Fixed);
EffectSpec make_categorical(const Vector& p, EffectKind kind = EffectKind::Random);
EffectSpec make_rw(int K, int order, EffectKind kind = EffectKind::Random);
EffectSpec make_rw(int K, int order, EffectKind kind, const CovariateDist& dist);
EffectSpec make_icar(const Matrix& adjacency, EffectKind kind = EffectKind::Random);
EffectSpec make_pspline(int K, int penalty_order, double lo = 0.0, double hi = 1.0,
                        EffectKind kind = EffectKind::Random);

/// Banded random-walk penalty of the given order (1 or 2) on K regular
/// locations; integer-exact entries.
Matrix rw_structure(int K, int order);

}  // namespace lgm
