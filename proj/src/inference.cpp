#include "lgm/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lgm/error.hpp"
#include "lgm/numeric.hpp"
#include "lgm/qmod.hpp"

namespace lgm {

std::string to_string(PriorChoice p) {
  switch (p) {
    case PriorChoice::IG: return "ig";
    case PriorChoice::PC: return "pc";
    case PriorChoice::VP: return "vp";
  }
  return "?";
}

std::string to_string(Scaling s) {
  switch (s) {
    case Scaling::Expectation: return "expectation";
    case Scaling::GeometricMean: return "geometric_mean";
    case Scaling::None: return "none";
  }
  return "?";
}

double gaussian_log_marginal(const Vector& y, const std::vector<Matrix>& designs,
                             const std::vector<Matrix>& effect_covs, double sigma2_eps,
                             double tau2_mu) {
  require(designs.size() == effect_covs.size(), Errc::InvalidArgument,
          "gaussian_log_marginal: one covariance per design block");
  const int n = static_cast<int>(y.size());
  Matrix v = sigma2_eps * Matrix::Identity(n, n) + tau2_mu * Matrix::Ones(n, n);
  for (size_t j = 0; j < designs.size(); ++j) {
    require(designs[j].rows() == n, Errc::InvalidArgument,
            "gaussian_log_marginal: design row mismatch");
    v += designs[j] * effect_covs[j] * designs[j].transpose();
  }
  Eigen::LLT<Matrix> llt(v);
  require(llt.info() == Eigen::Success, Errc::NonPDCovariance,
          "gaussian_log_marginal: covariance not positive definite");
  const double logdet = 2.0 * Matrix(llt.matrixL()).diagonal().array().log().sum();
  const double quad = y.dot(llt.solve(y));
  return -0.5 * (n * std::log(2.0 * M_PI) + logdet + quad);
}

std::size_t GridPosterior::size() const {
  std::size_t n = 1;
  for (const auto& a : axes) n *= a.values.size();
  return n;
}

std::vector<double> GridPosterior::weights() const {
  std::vector<double> w(log_joint.size());
  for (size_t i = 0; i < w.size(); ++i) w[i] = std::exp(log_joint[i] - normalization);
  return w;
}

namespace {

std::vector<double> log_axis(double center, double decades, int points) {
  std::vector<double> v(points);
  const double lo = std::log10(center) - 0.5 * decades;
  const double step = decades / (points - 1.0);
  for (int i = 0; i < points; ++i) v[i] = std::pow(10.0, lo + i * step);
  return v;
}

std::vector<double> unit_axis(int points) {
  std::vector<double> v(points);
  for (int i = 0; i < points; ++i) v[i] = (i + 0.5) / points;
  return v;
}

struct WeightedSample {
  std::vector<double> value;
  std::vector<double> weight;  // normalized

  double mean() const {
    double acc = 0.0;
    for (size_t i = 0; i < value.size(); ++i) acc += value[i] * weight[i];
    return acc;
  }
  /// Equal-tailed interval from the weighted step CDF.
  std::pair<double, double> interval(double mass = 0.9) const {
    std::vector<int> idx(value.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return value[a] < value[b]; });
    const double lo_q = 0.5 * (1.0 - mass), hi_q = 1.0 - lo_q;
    double cum = 0.0, lo = value[idx.front()], hi = value[idx.back()];
    bool lo_set = false;
    for (int i : idx) {
      cum += weight[i];
      if (!lo_set && cum >= lo_q) {
        lo = value[i];
        lo_set = true;
      }
      if (cum >= hi_q) {
        hi = value[i];
        break;
      }
    }
    return {lo, hi};
  }
};

double prior_axis_center(PriorChoice prior, double data_scale) {
  switch (prior) {
    case PriorChoice::IG:
      return 5e-5 / std::log(2.0);  // median of the shape-1 inverse gamma
    case PriorChoice::PC: {
      const double delta = pc0_rate(3.0, 0.05);
      const double med_sd = std::log(2.0) / delta;
      return med_sd * med_sd;
    }
    case PriorChoice::VP:
      return std::max(data_scale, 1e-8);  // Jeffreys has no median; use the data scale
  }
  return 1.0;
}

constexpr double kBoundaryMassLimit = 0.01;
constexpr double kSideTrigger = 1e-3;
constexpr double kExpandDecades = 1.5;
constexpr int kMaxExpansions = 3;

}  // namespace

LocalLevelContext LocalLevelContext::make(int K) {
  LocalLevelContext ctx;
  ctx.K = K;
  const EffectSpec e = make_rw(K, 1, EffectKind::Random);
  const StandardizedEffect se = standardize(e);
  ctx.C = se.C;
  ctx.sigma2_ref = geometric_mean_constant(e, se.constraints);
  ctx.cov = se.sigma_c;
  ctx.sqrt_f = sqrt_factor_sym(ctx.cov);
  const EigenSym es = sym_eigen(ctx.cov);
  ctx.eig_values = es.values;
  ctx.eig_vectors = es.vectors;
  // The kernel of the constrained covariance is the constant vector, so the
  // intercept block is diagonal in this eigenbasis.
  const Vector m = es.vectors.transpose() * Vector::Ones(K);
  int kmax = 0;
  m.cwiseAbs().maxCoeff(&kmax);
  ctx.kernel_index = kmax;
  double off = 0.0;
  for (int i = 0; i < K; ++i)
    if (i != kmax) off += std::abs(m[i]);
  require(off <= 1e-8 * std::sqrt(static_cast<double>(K)), Errc::InvalidArgument,
          "LocalLevelContext: intercept not aligned with the covariance kernel");
  return ctx;
}

FitSummary fit_local_level(const Vector& y, PriorChoice prior, Scaling scaling,
                           const LocalLevelContext& ctx, int points_per_axis,
                           GridPosterior* grid_out) {
  const int K = ctx.K;
  require(static_cast<int>(y.size()) == K, Errc::InvalidArgument,
          "fit_local_level: y length must match the number of locations");
  const Vector yt = ctx.eig_vectors.transpose() * y;
  const double data_var = (y.array() - y.mean()).square().sum() / y.size();

  double den = 1.0;
  if (scaling == Scaling::Expectation) den = ctx.C;
  if (scaling == Scaling::GeometricMean) den = ctx.sigma2_ref;
  const double c_eff = ctx.C / den;

  double v_center = 2.0 * prior_axis_center(prior, data_var);
  if (prior == PriorChoice::VP) v_center = std::max(data_var, 1e-8);

  double v_lo_dec = std::log10(v_center) - 3.0, v_hi_dec = std::log10(v_center) + 3.0;
  const std::vector<double> omegas = unit_axis(points_per_axis);

  GridPosterior grid;
  FitSummary out;
  for (int expansion = 0;; ++expansion) {
    std::vector<double> vs(points_per_axis);
    for (int i = 0; i < points_per_axis; ++i)
      vs[i] = std::pow(10.0, v_lo_dec + (v_hi_dec - v_lo_dec) * i / (points_per_axis - 1.0));

    const size_t n_nodes = vs.size() * omegas.size();
    grid.log_joint.assign(n_nodes, 0.0);
    WeightedSample phi_s, t_s;
    phi_s.value.resize(n_nodes);
    t_s.value.resize(n_nodes);

    for (size_t iv = 0; iv < vs.size(); ++iv) {
      const double v = vs[iv];
      for (size_t iw = 0; iw < omegas.size(); ++iw) {
        const double w = omegas[iw];
        const double s2 = v * w, s2e = v * (1.0 - w);
        const double s_fit = s2 / den;
        double loglik = -0.5 * K * std::log(2.0 * M_PI);
        for (int i = 0; i < K; ++i) {
          double d = s2e + s_fit * std::max(ctx.eig_values[i], 0.0);
          if (i == ctx.kernel_index) d += ctx.tau2_mu * K;
          loglik += -0.5 * (std::log(d) + yt[i] * yt[i] / d);
        }
        double logprior = 0.0;  // VP: flat in (log V, omega) after the Jacobian
        if (prior == PriorChoice::IG)
          logprior = ig_log_density(s2, 1.0, 5e-5) + ig_log_density(s2e, 1.0, 5e-5) +
                     2.0 * std::log(v);
        if (prior == PriorChoice::PC)
          logprior = pc0_log_density(s2, 3.0, 0.05) + pc0_log_density(s2e, 3.0, 0.05) +
                     2.0 * std::log(v);
        const size_t node = iv * omegas.size() + iw;
        grid.log_joint[node] = loglik + logprior;
        phi_s.value[node] = w * c_eff / (w * c_eff + 1.0 - w);
        t_s.value[node] = v * (w * c_eff + 1.0 - w);
      }
    }
    grid.normalization = log_sum_exp(grid.log_joint);
    std::vector<double> weights(n_nodes);
    for (size_t i = 0; i < n_nodes; ++i)
      weights[i] = std::exp(grid.log_joint[i] - grid.normalization);

    double lo_mass = 0.0, hi_mass = 0.0;
    for (size_t iw = 0; iw < omegas.size(); ++iw) {
      lo_mass += weights[iw];
      hi_mass += weights[(vs.size() - 1) * omegas.size() + iw];
    }
    if (lo_mass + hi_mass < kBoundaryMassLimit || expansion >= kMaxExpansions) {
      require(lo_mass + hi_mass < kBoundaryMassLimit, Errc::GridMassEscape,
              "fit_local_level: posterior mass stuck at the grid boundary");
      grid.axes = {GridAxis{"V", vs, true, true}, GridAxis{"omega", omegas, false, false}};
      grid.expansions = expansion;
      phi_s.weight = weights;
      t_s.weight = std::move(weights);
      out.phi_mean = phi_s.mean();
      std::tie(out.phi_low, out.phi_high) = phi_s.interval();
      out.T_mean = t_s.mean();
      std::tie(out.T_low, out.T_high) = t_s.interval();
      out.expansions = expansion;
      break;
    }
    if (lo_mass >= kSideTrigger) v_lo_dec -= kExpandDecades;
    if (hi_mass >= kSideTrigger) v_hi_dec += kExpandDecades;
  }
  if (grid_out) *grid_out = std::move(grid);
  return out;
}

SplineContext SplineContext::make(int K, bool modified) {
  SplineContext ctx;
  ctx.K = K;
  ctx.modified = modified;
  EffectSpec spline = make_pspline(K, 2, 0.0, 1.0, EffectKind::Random);
  if (modified) spline = apply_qmod(spline, fit_modification_chained(K, 2));
  const StandardizedEffect se = standardize(spline);
  ctx.C = se.C;
  ctx.basis = *spline.bspline;
  ctx.cov = se.sigma_c;
  ctx.sqrt_f = sqrt_factor_sym(ctx.cov);
  ctx.linear = standardize(make_linear(ContinuousUniform{0.0, 1.0}, EffectKind::Fixed));
  return ctx;
}

FitSummary fit_linear_spline(const Dataset& data, PriorChoice prior, const SplineContext& ctx,
                             int points_per_axis, GridPosterior* grid_out) {
  const int n = static_cast<int>(data.y.size());
  require(data.x.size() == data.y.size() && n >= 3, Errc::InvalidArgument,
          "fit_linear_spline: x and y must have equal length >= 3");
  const int r = static_cast<int>(ctx.sqrt_f.cols());
  const int m = 2 + r;

  // y = W xi + eps with xi ~ N(0, diag(tau2_mu, sigma2_t, (sigma2_r / C) I_r)).
  Matrix w_mat(n, m);
  for (int i = 0; i < n; ++i) {
    w_mat(i, 0) = 1.0;
    w_mat(i, 1) = ctx.linear.eval_basis(data.x[i])[0];
    w_mat.row(i).tail(r) = (ctx.basis->eval(data.x[i]).transpose() * ctx.sqrt_f);
  }
  const Matrix gram = w_mat.transpose() * w_mat;
  const Vector wy = w_mat.transpose() * data.y;
  const double yy = data.y.dot(data.y);
  const double data_var = (data.y.array() - data.y.mean()).square().sum() / n;

  const double c_t = prior_axis_center(prior, 0.5 * data_var);
  const double c_r = c_t;
  const double c_e = prior == PriorChoice::VP ? prior_axis_center(PriorChoice::IG, 0.0)
                                              : prior_axis_center(prior, 0.5 * data_var);
  double t_lo = std::log10(c_t) - 3.0, t_hi = std::log10(c_t) + 3.0;
  double r_lo = std::log10(c_r) - 3.0, r_hi = std::log10(c_r) + 3.0;
  double e_lo = std::log10(c_e) - 3.0, e_hi = std::log10(c_e) + 3.0;

  GridPosterior grid;
  FitSummary out;
  Matrix mwork(m, m);
  Eigen::LLT<Matrix> llt;
  Vector shalf(m), v(m), sol(m);

  for (int expansion = 0;; ++expansion) {
    auto axis = [&](double lo, double hi) {
      std::vector<double> vals(points_per_axis);
      for (int i = 0; i < points_per_axis; ++i)
        vals[i] = std::pow(10.0, lo + (hi - lo) * i / (points_per_axis - 1.0));
      return vals;
    };
    const std::vector<double> s_t = axis(t_lo, t_hi), s_r = axis(r_lo, r_hi),
                              s_e = axis(e_lo, e_hi);
    const size_t n_nodes =
        static_cast<size_t>(points_per_axis) * points_per_axis * points_per_axis;
    grid.log_joint.assign(n_nodes, 0.0);
    std::vector<double> beta_node(n_nodes), t_node(n_nodes);

    std::vector<double> log_st(points_per_axis), log_sr(points_per_axis),
        log_se(points_per_axis);
    for (int i = 0; i < points_per_axis; ++i) {
      log_st[i] = std::log(s_t[i]);
      log_sr[i] = std::log(s_r[i]);
      log_se[i] = std::log(s_e[i]);
    }

    size_t node = 0;
    for (int it = 0; it < points_per_axis; ++it) {
      for (int ir = 0; ir < points_per_axis; ++ir) {
        shalf[0] = std::sqrt(ctx.tau2_mu);
        shalf[1] = std::sqrt(s_t[it]);
        const double sr_eff = s_r[ir] / ctx.C;
        for (int j = 0; j < r; ++j) shalf[2 + j] = std::sqrt(sr_eff);
        for (int ie = 0; ie < points_per_axis; ++ie, ++node) {
          const double s2e = s_e[ie];
          const double inv_e = 1.0 / s2e;
          for (int a = 0; a < m; ++a)
            for (int b = 0; b <= a; ++b)
              mwork(a, b) = (a == b ? 1.0 : 0.0) + shalf[a] * shalf[b] * gram(a, b) * inv_e;
          llt.compute(mwork);
          double loglik;
          if (llt.info() != Eigen::Success) {
            loglik = -1e100;
            beta_node[node] = 0.0;
          } else {
            const double logdet_m =
                2.0 * Matrix(llt.matrixL()).diagonal().array().log().sum();
            v = shalf.cwiseProduct(wy);
            sol = llt.solve(v);
            const double quad = std::max(0.0, (yy - v.dot(sol) * inv_e) * inv_e);
            loglik = -0.5 * (n * std::log(2.0 * M_PI) + n * log_se[ie] + logdet_m + quad);
            beta_node[node] = shalf[1] * sol[1] * inv_e;
          }
          double logprior = log_st[it] + log_sr[ir] + log_se[ie];  // log-axis Jacobian
          switch (prior) {
            case PriorChoice::IG:
              logprior += ig_log_density(s_t[it], 1.0, 5e-5) +
                          ig_log_density(s_r[ir], 1.0, 5e-5) +
                          ig_log_density(s2e, 1.0, 5e-5);
              break;
            case PriorChoice::PC:
              logprior += pc0_log_density(s_t[it], 3.0, 0.05) +
                          pc0_log_density(s_r[ir], 3.0, 0.05) +
                          pc0_log_density(s2e, 3.0, 0.05);
              break;
            case PriorChoice::VP:
              logprior += -2.0 * std::log(s_t[it] + s_r[ir]) + ig_log_density(s2e, 1.0, 5e-5);
              break;
          }
          grid.log_joint[node] = loglik + logprior;
          t_node[node] = s_t[it] + s_r[ir] + s2e;
        }
      }
    }
    grid.normalization = log_sum_exp(grid.log_joint);
    std::vector<double> weights(n_nodes);
    for (size_t i = 0; i < n_nodes; ++i)
      weights[i] = std::exp(grid.log_joint[i] - grid.normalization);

    // Boundary slabs per axis.
    const int p = points_per_axis;
    double mass_t[2] = {0, 0}, mass_r[2] = {0, 0}, mass_e[2] = {0, 0};
    node = 0;
    for (int it = 0; it < p; ++it)
      for (int ir = 0; ir < p; ++ir)
        for (int ie = 0; ie < p; ++ie, ++node) {
          const double wgt = weights[node];
          if (it == 0) mass_t[0] += wgt;
          if (it == p - 1) mass_t[1] += wgt;
          if (ir == 0) mass_r[0] += wgt;
          if (ir == p - 1) mass_r[1] += wgt;
          if (ie == 0) mass_e[0] += wgt;
          if (ie == p - 1) mass_e[1] += wgt;
        }
    const double shell =
        mass_t[0] + mass_t[1] + mass_r[0] + mass_r[1] + mass_e[0] + mass_e[1];
    if (shell < kBoundaryMassLimit || expansion >= kMaxExpansions) {
      require(shell < kBoundaryMassLimit, Errc::GridMassEscape,
              "fit_linear_spline: posterior mass stuck at the grid boundary");
      grid.axes = {GridAxis{"sigma2_t", s_t, true, true}, GridAxis{"sigma2_r", s_r, true, true},
                   GridAxis{"sigma2_eps", s_e, true, true}};
      grid.expansions = expansion;

      // phi depends only on (sigma2_t, sigma2_r): aggregate that marginal.
      WeightedSample phi_s;
      phi_s.value.resize(static_cast<size_t>(p) * p);
      phi_s.weight.assign(static_cast<size_t>(p) * p, 0.0);
      node = 0;
      double beta_mean = 0.0;
      for (int it = 0; it < p; ++it)
        for (int ir = 0; ir < p; ++ir) {
          const size_t cell = static_cast<size_t>(it) * p + ir;
          phi_s.value[cell] = s_r[ir] / (s_t[it] + s_r[ir]);
          for (int ie = 0; ie < p; ++ie, ++node) {
            phi_s.weight[cell] += weights[node];
            beta_mean += beta_node[node] * weights[node];
          }
        }
      WeightedSample t_s;
      t_s.value = std::move(t_node);
      t_s.weight = std::move(weights);
      out.phi_mean = phi_s.mean();
      std::tie(out.phi_low, out.phi_high) = phi_s.interval();
      out.T_mean = t_s.mean();
      std::tie(out.T_low, out.T_high) = t_s.interval();
      out.beta_mean = beta_mean;
      out.expansions = expansion;
      break;
    }
    if (mass_t[0] >= kSideTrigger) t_lo -= kExpandDecades;
    if (mass_t[1] >= kSideTrigger) t_hi += kExpandDecades;
    if (mass_r[0] >= kSideTrigger) r_lo -= kExpandDecades;
    if (mass_r[1] >= kSideTrigger) r_hi += kExpandDecades;
    if (mass_e[0] >= kSideTrigger) e_lo -= kExpandDecades;
    if (mass_e[1] >= kSideTrigger) e_hi += kExpandDecades;
  }
  if (grid_out) *grid_out = std::move(grid);
  return out;
}

}  // namespace lgm
