#include "lgm/qmod.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "lgm/effects.hpp"
#include "lgm/error.hpp"

namespace lgm {

Matrix target_null_space(const BSplineBasis& b, const CovariateDist& dist, int order) {
  require(order == 1 || order == 2, Errc::UnsupportedOrder,
          "target_null_space: only orders 1 and 2 are supported");
  const int k = b.size();
  Matrix s(k, order);
  if (const auto* cu = std::get_if<ContinuousUniform>(&dist);
      cu && cu->lo == b.lo() && cu->hi == b.hi()) {
    auto [s0, s1] = exact_moments(b);
    s.col(0) = s0;
    if (order == 2) s.col(1) = s1;
    return s;
  }
  validate(dist);
  Vector m0 = Vector::Zero(k), m1 = Vector::Zero(k);
  for (const auto& pt : expectation_rule(dist, b.knots())) {
    const Vector bx = b.eval(pt.x);
    m0 += pt.w * bx;
    m1 += pt.w * pt.x * bx;
  }
  s.col(0) = m0;
  if (order == 2) s.col(1) = m1;
  return s;
}

Matrix build_r_tilde(const Matrix& q, const Matrix& s_tilde, const Vector& lambda, int order) {
  const int k = static_cast<int>(q.rows());
  require(order == 1 || order == 2, Errc::UnsupportedOrder, "build_r_tilde: order must be 1 or 2");
  require(s_tilde.rows() == k && s_tilde.cols() == order, Errc::InvalidArgument,
          "build_r_tilde: S_tilde shape mismatch");
  require(lambda.size() == k && lambda.minCoeff() > 0.0, Errc::InvalidArgument,
          "build_r_tilde: lambda must be positive");

  const Matrix w = Matrix(q.diagonal().asDiagonal()) - q;  // nonnegative off-diagonal weights
  Matrix w_t = Matrix::Zero(k, k);
  Matrix r = Matrix::Zero(k, k);

  if (order == 1) {
    const Vector s = s_tilde.col(0);
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b)
        if (a != b && w(a, b) != 0.0)
          w_t(a, b) = w(a, b) / (lambda[a] * s[a] * lambda[b] * s[b]);
    for (int a = 0; a < k; ++a) r(a, a) = q(a, a) / (lambda[a] * lambda[a] * s[a] * s[a]);
    r -= w_t;
    return r;
  }

  const Vector s0 = s_tilde.col(0), s1 = s_tilde.col(1);
  const double det_scale = (s0.cwiseAbs().maxCoeff()) * (s1.cwiseAbs().maxCoeff());
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b)
      if (a != b && w(a, b) != 0.0) {
        const double det = s0[a] * s1[b] - s1[a] * s0[b];
        require(std::abs(det) > 1e-14 * std::max(det_scale, 1e-300), Errc::DegenerateMomentPair,
                "build_r_tilde: vanishing moment-pair determinant");
        w_t(a, b) = (b - a) * w(a, b) / (lambda[a] * lambda[b] * det);
      }
  for (int a = 0; a < k; ++a) {
    double acc = 0.0;
    for (int b = 0; b < k; ++b) acc += w_t(a, b) * lambda[b] * s0[b];
    r(a, a) = acc / (lambda[a] * s0[a]);
  }
  r -= w_t;
  return r;
}

namespace {

// Per-(Q, S_tilde) state reused across KL evaluations. The divergence is the
// standard zero-mean Gaussian formula with generalized inverses and
// pseudo-determinants in place of inverses and determinants:
//   KL = 1/2 [ tr(Q Qt*) - (K - d) - logpdet(Qt*) - logpdet(Q) ],
// which reduces to the ordinary KL when the two kernels coincide.
struct KlWorkspace {
  Matrix q, s_tilde;
  int order = 0;
  int k = 0;
  int band = 0;              // bandwidth of Q, for the trace term
  Matrix ns;                 // orthonormal basis of span(S_tilde)
  double logpdet_q = 0.0;
};

KlWorkspace make_workspace(const Matrix& q, const Matrix& s_tilde, int order) {
  KlWorkspace ws;
  ws.q = q;
  ws.s_tilde = s_tilde;
  ws.order = order;
  ws.k = static_cast<int>(q.rows());
  for (int i = 0; i < ws.k; ++i)
    for (int j = 0; j < ws.k; ++j)
      if (q(i, j) != 0.0) ws.band = std::max(ws.band, std::abs(i - j));
  Eigen::HouseholderQR<Matrix> qr(s_tilde);
  ws.ns = qr.householderQ() * Matrix::Identity(ws.k, order);
  ws.logpdet_q = pseudo_log_det_sym(q);
  return ws;
}

constexpr double kInfeasiblePenalty = 1e100;

double kl_eval(const KlWorkspace& ws, const Vector& lambda) {
  const int k = ws.k, d = ws.order;
  Matrix r_t = build_r_tilde(ws.q, ws.s_tilde, lambda, d);

  // R_tilde^* through the known kernel: with N an orthonormal basis of
  // span(Lambda S_tilde), R^* = (R + N N^T)^{-1} - N N^T.
  Matrix ker = lambda.asDiagonal() * ws.s_tilde;
  Eigen::HouseholderQR<Matrix> qr(ker);
  Matrix n = qr.householderQ() * Matrix::Identity(k, d);
  Matrix m = r_t + n * n.transpose();
  Eigen::LDLT<Matrix> ldlt(m);
  if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 0.0)
    return kInfeasiblePenalty;  // lambda made R_tilde indefinite

  Matrix r_star = ldlt.solve(Matrix::Identity(k, k));
  r_star -= n * n.transpose();
  Matrix qt_star = lambda.asDiagonal() * r_star * lambda.asDiagonal();

  double trace = 0.0;
  for (int i = 0; i < k; ++i)
    for (int j = std::max(0, i - ws.band); j <= std::min(k - 1, i + ws.band); ++j)
      trace += ws.q(i, j) * qt_star(j, i);

  // logpdet through kernel completion: the kernel of Qt* is span(S_tilde).
  Matrix completed = qt_star + ws.ns * ws.ns.transpose();
  Eigen::LLT<Matrix> llt(completed);
  if (llt.info() != Eigen::Success) return kInfeasiblePenalty;
  const double logpdet_qt_star =
      2.0 * Matrix(llt.matrixL()).diagonal().array().log().sum();

  return 0.5 * (trace - (k - d) - logpdet_qt_star - ws.logpdet_q);
}

}  // namespace

double kl_objective(const Vector& lambda, const Matrix& q, const Matrix& s_tilde, int order) {
  require(lambda.minCoeff() > 0.0, Errc::InvalidArgument, "kl_objective: lambda must be positive");
  const double value = kl_eval(make_workspace(q, s_tilde, order), lambda);
  if (value >= kInfeasiblePenalty) {
    // The proposal left the PSD cone; report a rank diagnosis rather than the
    // sentinel used inside the optimizer loop.
    const Matrix r_t = build_r_tilde(q, s_tilde, lambda, order);
    const Matrix qt_star =
        lambda.asDiagonal() * pseudo_inverse_sym(r_t) * lambda.asDiagonal();
    const EigenSym es = sym_eigen(qt_star);
    const double tol = rank_tolerance(es.values);
    int rank = 0;
    for (int i = 0; i < es.values.size(); ++i)
      if (es.values[i] > tol) ++rank;
    require(rank == static_cast<int>(q.rows()) - order, Errc::ProjectionRankMismatch,
            "kl_objective: covariances have different ranks on the common support");
  }
  return value;
}

QModResult fit_lambda(const Matrix& q, const Matrix& s_tilde, int order, const QModOptions& opts) {
  const int k = static_cast<int>(q.rows());
  KlWorkspace ws = make_workspace(q, s_tilde, order);

  const int half = (k + 1) / 2;
  auto expand = [&](const Vector& x) {
    if (!opts.symmetric) return x;
    Vector full(k);
    for (int i = 0; i < k; ++i) full[i] = x[std::min(i, k - 1 - i)];
    return full;
  };
  auto objective = [&](const Vector& x) {
    return kl_eval(ws, expand(x).array().exp().matrix());
  };
  // A common multiplier on lambda is the stiffest direction of the objective
  // and the slowest one for a simplex to crawl along, so interleave simplex
  // stages with a golden-section polish of the overall scale.
  auto scale_polish = [&](Vector& x, double& value) {
    const Vector base = x;
    auto at = [&](double s) { return objective(base.array() + s); };
    double a = -0.25, b = 0.25;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = at(x1), f2 = at(x2);
    for (int it = 0; it < 60; ++it) {
      if (f1 < f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - gr * (b - a);
        f1 = at(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + gr * (b - a);
        f2 = at(x2);
      }
    }
    const double s = 0.5 * (a + b), fs = at(s);
    if (fs < value) {
      x = base.array() + s;
      value = fs;
    }
  };

  Vector start = Vector::Zero(opts.symmetric ? half : k);
  if (opts.initial_log_lambda) {
    require(opts.initial_log_lambda->size() == k, Errc::InvalidArgument,
            "fit_lambda: warm start dimension mismatch");
    start = opts.symmetric ? opts.initial_log_lambda->head(half).eval()
                           : *opts.initial_log_lambda;
  }

  const int stages = std::max(1, opts.restarts + 1);
  NelderMeadOptions nm;
  nm.max_iterations = std::max(1, opts.max_iterations / stages);
  nm.tolerance = opts.tolerance;
  nm.restarts = 0;
  nm.initial_step = opts.initial_step;
  NelderMeadResult fit;
  fit.x = start;
  fit.value = objective(start);
  int total_iterations = 0;
  for (int stage = 0; stage < stages; ++stage) {
    NelderMeadResult next = nelder_mead(objective, fit.x, nm);
    total_iterations += next.iterations;
    if (next.value <= fit.value) fit = next;
    scale_polish(fit.x, fit.value);
    nm.initial_step = std::max(0.02, 0.5 * nm.initial_step);
  }
  fit.iterations = total_iterations;

  QModResult out;
  out.lambda_hat = expand(fit.x).array().exp().matrix();
  out.S_tilde = s_tilde;
  out.R_tilde = build_r_tilde(q, s_tilde, out.lambda_hat, order);
  const Matrix r_star = pseudo_inverse_sym(out.R_tilde);
  const Matrix q_tilde_star =
      out.lambda_hat.asDiagonal() * r_star * out.lambda_hat.asDiagonal();
  // Scrub the kernel directions out of the inverted matrix; the pseudo-inverse
  // round trip otherwise leaves O(eps * cond) residue on S_tilde.
  const Matrix proj = Matrix::Identity(k, k) - ws.ns * ws.ns.transpose();
  Matrix q_tilde = proj * pseudo_inverse_sym(q_tilde_star) * proj;
  q_tilde = 0.5 * (q_tilde + q_tilde.transpose());
  out.Q_tilde = StructureMatrix(std::move(q_tilde), order, s_tilde);
  out.kl_value = fit.value;
  out.iterations = fit.iterations;
  out.converged = fit.converged;
  return out;
}


namespace {

Vector offset_mapped_start(const Vector& prev_log, int K, double level_shift) {
  const int kp = static_cast<int>(prev_log.size());
  Vector out(K);
  for (int i = 0; i < K; ++i) {
    const int offset = std::min(i, K - 1 - i);
    out[i] = prev_log[std::min(offset, (kp - 1) / 2)] + level_shift;
  }
  return out;
}

}  // namespace

QModResult fit_modification_chained(int K, int order, double lo, double hi) {
  auto fit_at = [&](int k, const QModOptions& opts) {
    const BSplineBasis basis(k, lo, hi);
    const Matrix s_tilde = target_null_space(basis, ContinuousUniform{lo, hi}, order);
    return fit_lambda(rw_structure(k, order), s_tilde, order, opts);
  };
  if (K <= 12) return fit_at(K, {});

  std::vector<int> ladder{8, 12};
  while (ladder.back() < K) ladder.push_back(std::min(K, (ladder.back() * 7) / 5));
  std::optional<Vector> warm;
  double prev_level = 0.0, prev_prev_level = 0.0;
  int prev_k = 0, prev_prev_k = 0;
  QModResult fit;
  for (int k : ladder) {
    QModOptions opts;
    opts.symmetric = true;
    opts.max_iterations = std::max(5000, 300 * k);
    if (warm) {
      double shift = 0.0;
      if (prev_prev_k > 0)
        shift = (prev_level - prev_prev_level) *
                (std::log(static_cast<double>(k)) - std::log(static_cast<double>(prev_k))) /
                (std::log(static_cast<double>(prev_k)) -
                 std::log(static_cast<double>(prev_prev_k)));
      opts.initial_log_lambda = offset_mapped_start(*warm, k, shift);
      opts.initial_step = 0.05;
    }
    fit = fit_at(k, opts);
    warm = fit.lambda_hat.array().log().matrix();
    prev_prev_level = prev_level;
    prev_prev_k = prev_k;
    prev_level = (*warm)[(k - 1) / 2];
    prev_k = k;
  }
  return fit;
}

}  // namespace lgm
