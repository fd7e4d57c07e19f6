#include "lgm/study.hpp"

#include <atomic>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>

#include "lgm/error.hpp"
#include "lgm/numeric.hpp"

namespace lgm {

std::string to_string(StudyKind s) {
  return s == StudyKind::LocalLevel ? "local-level" : "spline";
}

std::string arm_label(const StudyConfig& cfg, const ReplicateRow& row) {
  if (cfg.study == StudyKind::LocalLevel)
    return to_string(row.prior) + "_" + to_string(row.scaling);
  return to_string(row.prior) + (row.modified ? "_modified" : "_unmodified");
}

Vector generate_local_level_data(const LocalLevelContext& ctx, double phi, Rng& rng) {
  const int K = ctx.K;
  const int r = static_cast<int>(ctx.sqrt_f.cols());
  Vector z(r);
  for (int j = 0; j < r; ++j) z[j] = rng.normal();
  Vector u = std::sqrt(phi / ctx.C) * (ctx.sqrt_f * z);
  Vector y(K);
  const double noise_sd = std::sqrt(1.0 - phi);
  for (int i = 0; i < K; ++i) y[i] = u[i] + noise_sd * rng.normal();
  return y;
}

Dataset generate_spline_data(int n, Rng& rng) {
  Dataset d;
  d.x.resize(n);
  d.y.resize(n);
  for (int i = 0; i < n; ++i) d.x[i] = rng.uniform();
  const double beta = std::sqrt(0.5);
  for (int i = 0; i < n; ++i)
    d.y[i] = (d.x[i] - 0.5) * std::sqrt(12.0) * beta + std::cos(2.0 * M_PI * d.x[i]) +
             rng.normal();
  return d;
}

namespace {

void run_parallel(int n_tasks, int jobs, const std::function<void(int)>& task) {
  if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
  jobs = std::max(1, std::min(jobs, n_tasks));
  if (jobs == 1) {
    for (int i = 0; i < n_tasks; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  for (int w = 0; w < jobs; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n_tasks) return;
        try {
          task(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::vector<StudySummaryRow> summarize(const StudyConfig& cfg,
                                       const std::vector<ReplicateRow>& rows) {
  std::map<std::pair<std::string, double>, std::vector<const ReplicateRow*>> groups;
  for (const auto& row : rows)
    groups[{arm_label(cfg, row), row.phi_true}].push_back(&row);
  std::vector<StudySummaryRow> out;
  for (const auto& [key, members] : groups) {
    StudySummaryRow s;
    s.arm = key.first;
    s.phi_true = key.second;
    s.n = static_cast<int>(members.size());
    std::vector<double> phi_bias, beta_bias, beta_abs;
    double cov_phi = 0.0, cov_t = 0.0;
    for (const auto* row : members) {
      phi_bias.push_back(row->phi_hat - row->phi_true);
      cov_phi += row->covered_phi;
      cov_t += row->covered_T;
      if (std::isfinite(row->beta_hat)) {
        beta_bias.push_back(row->beta_hat - std::sqrt(0.5));
        beta_abs.push_back(std::abs(row->beta_hat - std::sqrt(0.5)));
      }
    }
    s.phi_bias_median = median(phi_bias);
    s.phi_coverage = cov_phi / s.n;
    s.T_coverage = cov_t / s.n;
    if (!beta_bias.empty()) {
      s.beta_bias_median = median(beta_bias);
      s.beta_abs_bias_median = median(beta_abs);
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

StudyResult run_study(const StudyConfig& cfg) {
  require(cfg.replicates >= 1, Errc::InvalidArgument, "run_study: replicates must be >= 1");
  StudyResult result;
  result.config = cfg;

  if (cfg.study == StudyKind::LocalLevel) {
    const int K = cfg.K > 0 ? cfg.K : 25;
    const int n_obs = cfg.n_obs > 0 ? cfg.n_obs : K;
    require(n_obs == K, Errc::InvalidArgument,
            "run_study: the local-level design has one observation per location");
    const LocalLevelContext ctx = LocalLevelContext::make(K);
    const int arms = static_cast<int>(cfg.priors.size() * cfg.scalings.size());
    const int n_tasks = cfg.replicates * static_cast<int>(cfg.phis.size());
    result.rows.resize(static_cast<size_t>(n_tasks) * arms);

    const int n_phis = static_cast<int>(cfg.phis.size());
    run_parallel(n_tasks, cfg.jobs, [&](int t) {
      const int rep = t / n_phis;
      const int phi_idx = t % n_phis;
      const double phi = cfg.phis[phi_idx];
      Rng rng = Rng(cfg.seed + static_cast<std::uint64_t>(rep)).fork(phi_idx);
      const Vector y = generate_local_level_data(ctx, phi, rng);
      size_t slot = static_cast<size_t>(t) * arms;
      for (PriorChoice prior : cfg.priors)
        for (Scaling scaling : cfg.scalings) {
          const FitSummary fit = fit_local_level(y, prior, scaling, ctx, cfg.grid_points);
          ReplicateRow row;
          row.replicate = rep;
          row.phi_true = phi;
          row.prior = prior;
          row.scaling = scaling;
          row.phi_hat = fit.phi_mean;
          row.T_hat = fit.T_mean;
          row.covered_phi = fit.phi_low <= phi && phi <= fit.phi_high;
          row.covered_T = fit.T_low <= 1.0 && 1.0 <= fit.T_high;
          result.rows[slot++] = row;
        }
    });
  } else {
    const int K = cfg.K > 0 ? cfg.K : 10;
    const int n_obs = cfg.n_obs > 0 ? cfg.n_obs : 300;
    std::vector<SplineContext> contexts;
    if (cfg.run_modified) contexts.push_back(SplineContext::make(K, true));
    if (cfg.run_unmodified) contexts.push_back(SplineContext::make(K, false));
    require(!contexts.empty(), Errc::InvalidArgument, "run_study: no spline arm selected");
    const int arms = static_cast<int>(cfg.priors.size() * contexts.size());
    result.rows.resize(static_cast<size_t>(cfg.replicates) * arms);
    const double phi_true = 0.5;

    run_parallel(cfg.replicates, cfg.jobs, [&](int rep) {
      Rng rng(cfg.seed + static_cast<std::uint64_t>(rep));
      const Dataset data = generate_spline_data(n_obs, rng);
      size_t slot = static_cast<size_t>(rep) * arms;
      for (PriorChoice prior : cfg.priors)
        for (const SplineContext& ctx : contexts) {
          const FitSummary fit = fit_linear_spline(data, prior, ctx, cfg.grid_points);
          ReplicateRow row;
          row.replicate = rep;
          row.phi_true = phi_true;
          row.prior = prior;
          row.modified = ctx.modified;
          row.phi_hat = fit.phi_mean;
          row.T_hat = fit.T_mean;
          row.beta_hat = fit.beta_mean;
          row.covered_phi = fit.phi_low <= phi_true && phi_true <= fit.phi_high;
          row.covered_T = fit.T_low <= 2.0 && 2.0 <= fit.T_high;
          result.rows[slot++] = row;
        }
    });
  }
  result.summary = summarize(cfg, result.rows);
  return result;
}

namespace {

void write_number(std::ostream& os, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  os << buf;
}

}  // namespace

void write_results_csv(const StudyResult& result, std::ostream& os) {
  os << "replicate,arm,phi_true,phi_hat,T_hat,beta_hat,covered_phi,covered_T\n";
  for (const auto& row : result.rows) {
    os << row.replicate << ',' << arm_label(result.config, row) << ',';
    write_number(os, row.phi_true);
    os << ',';
    write_number(os, row.phi_hat);
    os << ',';
    write_number(os, row.T_hat);
    os << ',';
    if (std::isfinite(row.beta_hat)) write_number(os, row.beta_hat);
    os << ',' << row.covered_phi << ',' << row.covered_T << '\n';
  }
}

void write_summary_csv(const StudyResult& result, std::ostream& os) {
  os << "arm,phi_true,n,phi_bias_median,phi_coverage,T_coverage,beta_bias_median,"
        "beta_abs_bias_median\n";
  for (const auto& s : result.summary) {
    os << s.arm << ',';
    write_number(os, s.phi_true);
    os << ',' << s.n << ',';
    write_number(os, s.phi_bias_median);
    os << ',';
    write_number(os, s.phi_coverage);
    os << ',';
    write_number(os, s.T_coverage);
    os << ',';
    if (std::isfinite(s.beta_bias_median)) write_number(os, s.beta_bias_median);
    os << ',';
    if (std::isfinite(s.beta_abs_bias_median)) write_number(os, s.beta_abs_bias_median);
    os << '\n';
  }
}

}  // namespace lgm
