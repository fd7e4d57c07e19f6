#include "lgm/effects.hpp"

#include <cmath>
#include <queue>

#include "lgm/error.hpp"

namespace lgm {

std::string to_string(EffectFamily f) {
  switch (f) {
    case EffectFamily::Linear: return "linear";
    case EffectFamily::Categorical: return "categorical";
    case EffectFamily::RW1: return "rw1";
    case EffectFamily::RW2: return "rw2";
    case EffectFamily::Icar: return "icar";
    case EffectFamily::PSpline: return "pspline";
  }
  return "?";
}

std::string to_string(EffectKind k) { return k == EffectKind::Fixed ? "fixed" : "random"; }

bool EffectSpec::indicator_basis() const {
  return family == EffectFamily::Categorical || family == EffectFamily::RW1 ||
         family == EffectFamily::RW2 || family == EffectFamily::Icar;
}

namespace {

std::function<Vector(double)> indicator_basis_fn(int K) {
  return [K](double x) {
    Vector d = Vector::Zero(K);
    const int k = static_cast<int>(std::lround(x));
    require(k >= 1 && k <= K, Errc::InvalidArgument, "indicator basis: level out of range");
    d[k - 1] = 1.0;
    return d;
  };
}

}  // namespace

Matrix rw_structure(int K, int order) {
  require(order == 1 || order == 2, Errc::UnsupportedOrder, "rw_structure: order must be 1 or 2");
  require(K >= order + 2, Errc::TooFewLevels, "rw_structure: K must be >= order + 2");
  // Q = D^T D with D the order-th difference matrix; entries are integer-exact.
  Matrix diff = Matrix::Zero(K - order, K);
  for (int i = 0; i < K - order; ++i) {
    if (order == 1) {
      diff(i, i) = -1.0;
      diff(i, i + 1) = 1.0;
    } else {
      diff(i, i) = 1.0;
      diff(i, i + 1) = -2.0;
      diff(i, i + 2) = 1.0;
    }
  }
  return diff.transpose() * diff;
}

EffectSpec make_linear(const CovariateDist& dist, EffectKind kind) {
  validate_for_effect(dist);
  require(dist_variance(dist) > 0.0, Errc::ZeroVarianceCovariate,
          "make_linear: covariate has zero variance");
  EffectSpec e;
  e.family = EffectFamily::Linear;
  e.K = 1;
  e.kind = kind;
  e.dist = dist;
  e.structure = StructureMatrix(Matrix::Identity(1, 1), 0, Matrix(1, 0));
  e.basis = [](double x) {
    Vector d(1);
    d[0] = x;
    return d;
  };
  return e;
}

EffectSpec make_categorical(const Vector& p, EffectKind kind) {
  CovariateDist dist = CategoricalDist{p};
  validate(dist);
  const int K = static_cast<int>(p.size());
  EffectSpec e;
  e.family = EffectFamily::Categorical;
  e.K = K;
  e.kind = kind;
  e.dist = dist;
  e.structure = StructureMatrix(Matrix::Identity(K, K), 0, Matrix(K, 0));
  e.basis = indicator_basis_fn(K);
  return e;
}

EffectSpec make_rw(int K, int order, EffectKind kind) {
  return make_rw(K, order, kind, DiscreteUniform{K});
}

EffectSpec make_rw(int K, int order, EffectKind kind, const CovariateDist& dist) {
  validate_for_effect(dist);
  EffectSpec e;
  e.family = order == 1 ? EffectFamily::RW1 : EffectFamily::RW2;
  e.K = K;
  e.kind = kind;
  e.dist = dist;
  e.structure = StructureMatrix(rw_structure(K, order), order, polynomial_null_space(K, order));
  e.basis = indicator_basis_fn(K);
  return e;
}

EffectSpec make_icar(const Matrix& adjacency, EffectKind kind) {
  const int K = static_cast<int>(adjacency.rows());
  require(adjacency.cols() == K && K >= 2, Errc::InvalidArgument,
          "make_icar: adjacency must be square, K >= 2");
  require((adjacency - adjacency.transpose()).cwiseAbs().maxCoeff() <= 1e-12,
          Errc::InvalidArgument, "make_icar: adjacency must be symmetric");
  require(adjacency.minCoeff() >= 0.0, Errc::InvalidArgument,
          "make_icar: adjacency must be nonnegative");
  require(adjacency.diagonal().cwiseAbs().maxCoeff() == 0.0, Errc::InvalidArgument,
          "make_icar: adjacency diagonal must be zero");
  // Connectivity by breadth-first search; a disconnected lattice would push the
  // rank deficiency above 1.
  std::vector<bool> seen(K, false);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = true;
  int reached = 1;
  while (!frontier.empty()) {
    const int i = frontier.front();
    frontier.pop();
    for (int j = 0; j < K; ++j)
      if (!seen[j] && adjacency(i, j) > 0.0) {
        seen[j] = true;
        ++reached;
        frontier.push(j);
      }
  }
  require(reached == K, Errc::DisconnectedGraph, "make_icar: adjacency graph is disconnected");

  Matrix q = Matrix(adjacency.rowwise().sum().asDiagonal()) - adjacency;
  EffectSpec e;
  e.family = EffectFamily::Icar;
  e.K = K;
  e.kind = kind;
  e.dist = DiscreteUniform{K};
  e.structure = StructureMatrix(std::move(q), 1, Matrix::Ones(K, 1));
  e.basis = indicator_basis_fn(K);
  e.adjacency = adjacency;
  return e;
}

EffectSpec make_pspline(int K, int penalty_order, double lo, double hi, EffectKind kind) {
  BSplineBasis basis(K, lo, hi);
  EffectSpec e;
  e.family = EffectFamily::PSpline;
  e.K = K;
  e.kind = kind;
  e.dist = ContinuousUniform{lo, hi};
  e.structure =
      StructureMatrix(rw_structure(K, penalty_order), penalty_order,
                      polynomial_null_space(K, penalty_order));
  e.bspline = basis;
  e.basis = [basis](double x) { return basis.eval(x); };
  e.breakpoints = basis.knots();
  e.penalty_order = penalty_order;
  return e;
}

}  // namespace lgm
