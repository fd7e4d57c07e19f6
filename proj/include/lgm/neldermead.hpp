#pragma once

#include <functional>

#include "lgm/linalg.hpp"

namespace lgm {

struct NelderMeadOptions {
  int max_iterations = 5000;
  double tolerance = 1e-10;   // relative spread of simplex values
  double initial_step = 0.2;
  int restarts = 2;           // re-seed the simplex at the incumbent within the budget
};

struct NelderMeadResult {
  Vector x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Derivative-free simplex minimization with dimension-adaptive expansion,
/// contraction and shrink coefficients (Gao & Han 2012).
NelderMeadResult nelder_mead(const std::function<double(const Vector&)>& f, const Vector& x0,
                             const NelderMeadOptions& opts = {});

}  // namespace lgm
