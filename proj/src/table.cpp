#include "lgm/table.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <ostream>
#include <thread>

#include "lgm/qmod.hpp"
#include "lgm/standardize.hpp"

namespace lgm {

std::vector<int> scaling_table_levels() {
  return {5, 6, 7, 8, 9, 10, 12, 15, 20, 25, 30, 40, 50, 100};
}

namespace {

double rw_constant(int K, int order) {
  const EffectSpec e = make_rw(K, order, EffectKind::Random);
  return standardize(e).C;
}

// The fitted log-weights consist of boundary values at fixed offsets and a
// flat interior level that grows slowly with K, so a new start is built by
// copying the previous optimum by offset from each edge and shifting
// everything by the extrapolated change of the interior level.
Vector offset_warm_start(const Vector& prev, int K, double level_shift) {
  const int kp = static_cast<int>(prev.size());
  Vector out(K);
  for (int i = 0; i < K; ++i) {
    const int offset = std::min(i, K - 1 - i);
    const int src = std::min(offset, (kp - 1) / 2);
    out[i] = prev[src] + level_shift;
  }
  return out;
}

// One spline column, chaining each fit from the previous K's optimum.
void fill_spline_column(const std::vector<int>& levels, int order,
                        std::vector<ScalingTableRow>& rows) {
  // Augment the chain with intermediate sizes so no warm-start jump is large.
  std::vector<int> chain = levels;
  for (int extra : {60, 75})
    if (std::find(chain.begin(), chain.end(), extra) == chain.end()) chain.push_back(extra);
  std::sort(chain.begin(), chain.end());
  std::optional<Vector> warm;
  double prev_level = 0.0, prev_prev_level = 0.0;
  int prev_k = 0, prev_prev_k = 0;
  for (size_t i = 0; i < chain.size(); ++i) {
    const int K = chain[i];
    EffectSpec e = make_pspline(K, order, 0.0, 1.0, EffectKind::Random);
    const Matrix s_tilde = target_null_space(*e.bspline, e.dist, order);
    QModOptions opts;
    opts.symmetric = true;
    opts.max_iterations = std::max(5000, 300 * K);
    if (warm) {
      double shift = 0.0;
      if (prev_prev_k > 0)
        shift = (prev_level - prev_prev_level) *
                (std::log(static_cast<double>(K)) - std::log(static_cast<double>(prev_k))) /
                (std::log(static_cast<double>(prev_k)) -
                 std::log(static_cast<double>(prev_prev_k)));
      opts.initial_log_lambda = offset_warm_start(*warm, K, shift);
      opts.initial_step = 0.05;
    }
    const QModResult fit = fit_lambda(e.structure.entries, s_tilde, order, opts);
    warm = fit.lambda_hat.array().log().matrix();
    prev_prev_level = prev_level;
    prev_prev_k = prev_k;
    prev_level = (*warm)[(K - 1) / 2];
    prev_k = K;
    const auto slot = std::find(levels.begin(), levels.end(), K);
    if (slot == levels.end()) continue;  // chain-only size
    const double c = standardize(apply_qmod(e, fit)).C;
    const size_t out_idx = slot - levels.begin();
    if (order == 1)
      rows[out_idx].pspline_rw1 = c;
    else
      rows[out_idx].pspline_rw2 = c;
  }
}

}  // namespace

std::vector<ScalingTableRow> compute_scaling_table(int jobs) {
  const std::vector<int> levels = scaling_table_levels();
  std::vector<ScalingTableRow> rows(levels.size());
  for (size_t i = 0; i < levels.size(); ++i) rows[i].K = levels[i];
  if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
  auto rw_cols = [&] {
    for (size_t i = 0; i < levels.size(); ++i) {
      rows[i].rw1 = rw_constant(levels[i], 1);
      rows[i].rw2 = rw_constant(levels[i], 2);
    }
  };
  auto spline1 = [&] { fill_spline_column(levels, 1, rows); };
  auto spline2 = [&] { fill_spline_column(levels, 2, rows); };
  if (jobs <= 1) {
    rw_cols();
    spline1();
    spline2();
  } else {
    std::thread t1(spline1), t2(spline2);
    rw_cols();
    t1.join();
    t2.join();
  }
  return rows;
}

void write_scaling_table_csv(const std::vector<ScalingTableRow>& rows, std::ostream& os) {
  os << "K,rw1,rw2,pspline_rw1,pspline_rw2\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%.6g,%.6g,%.6g,%.6g\n", r.K, r.rw1, r.rw2, r.pspline_rw1,
                  r.pspline_rw2);
    os << buf;
  }
}

}  // namespace lgm
