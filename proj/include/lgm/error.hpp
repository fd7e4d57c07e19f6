#pragma once

#include <stdexcept>
#include <string>

namespace lgm {

enum class Errc {
  NonSymmetric,
  NegativeEigenvalue,
  SingularConstraintGram,
  OrderTooLarge,
  ZeroVarianceCovariate,
  InvalidProbabilityVector,
  TooFewLevels,
  DisconnectedGraph,
  UnsupportedFamily,
  OutOfInterval,
  KTooSmall,
  DegenerateConstant,
  ZeroConditionalVariance,
  UnsupportedOrder,
  DegenerateMomentPair,
  ProjectionRankMismatch,
  AllZeroVariances,
  UnsupportedPrior,
  NonPDCovariance,
  GridMassEscape,
  InvalidArgument,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, Errc code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace lgm
