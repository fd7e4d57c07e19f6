#pragma once

#include <iosfwd>
#include <vector>

namespace lgm {

/// Scaling constants of the standardized residual effect for the four
/// intrinsic families, over the usual range of K. The random-walk columns are
/// exact finite computations; the spline columns depend on the fitted penalty
/// modification.
struct ScalingTableRow {
  int K = 0;
  double rw1 = 0.0;
  double rw2 = 0.0;
  double pspline_rw1 = 0.0;
  double pspline_rw2 = 0.0;
};

std::vector<int> scaling_table_levels();  // {5, 6, ..., 100}

std::vector<ScalingTableRow> compute_scaling_table(int jobs = 0);

void write_scaling_table_csv(const std::vector<ScalingTableRow>& rows, std::ostream& os);

}  // namespace lgm
