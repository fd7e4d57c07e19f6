#include "lgm/rng.hpp"

#include "lgm/numeric.hpp"

namespace lgm {

double Rng::normal() { return normal_quantile(uniform()); }

}  // namespace lgm
