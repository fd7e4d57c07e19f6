#include "lgm/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "lgm/error.hpp"
#include "lgm/serialize.hpp"
#include "lgm/table.hpp"

namespace lgm {

namespace {

struct OutputTarget {
  std::ofstream file;
  std::ostream* stream = nullptr;

  std::ostream& open(const std::string& path, std::ostream& fallback) {
    if (path.empty()) {
      stream = &fallback;
    } else {
      file.open(path);
      require(file.good(), Errc::InvalidArgument, "cannot open output file '" + path + "'");
      stream = &file;
    }
    return *stream;
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), Errc::InvalidArgument, "cannot read file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Flags shared by the commands that construct a single effect.
struct EffectFlags {
  std::string spec_path;
  std::string family;
  int K = 0;
  int order = 2;
  std::string kind;
  std::vector<double> p;
  std::vector<double> interval{0.0, 1.0};
  std::string adjacency_path;
  bool unmodified = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--spec", spec_path, "JSON effect description (overrides other flags)");
    cmd->add_option("--family", family,
                    "effect family: linear|categorical|rw1|rw2|icar|pspline");
    cmd->add_option("--K", K, "number of basis functions / levels");
    cmd->add_option("--order", order, "penalty order for pspline (1 or 2)");
    cmd->add_option("--kind", kind, "fixed|random (default: fixed for linear, else random)");
    cmd->add_option("--p", p, "categorical probabilities");
    cmd->add_option("--interval", interval, "covariate interval for pspline")->expected(2);
    cmd->add_option("--adjacency", adjacency_path,
                    "icar adjacency: JSON matrix file or CSV edge list (1-based 'i,j[,w]')");
    cmd->add_flag("--unmodified", unmodified,
                  "pspline: keep the original penalty instead of the fitted modification");
  }

  EffectSpec build() const {
    if (!spec_path.empty()) return effect_from_json(Json::parse(read_file(spec_path)));
    require(!family.empty(), Errc::InvalidArgument, "--family (or --spec) is required");
    EffectKind k = family == "linear" ? EffectKind::Fixed : EffectKind::Random;
    if (!kind.empty()) {
      require(kind == "fixed" || kind == "random", Errc::InvalidArgument,
              "--kind must be 'fixed' or 'random'");
      k = kind == "fixed" ? EffectKind::Fixed : EffectKind::Random;
    }
    if (family == "linear") return make_linear(ContinuousUniform{0.0, 1.0}, k);
    if (family == "categorical") {
      if (!p.empty()) return make_categorical(Eigen::Map<const Vector>(p.data(), p.size()), k);
      require(K >= 1, Errc::InvalidArgument, "categorical: need --K or --p");
      return make_categorical(Vector::Constant(K, 1.0 / K), k);
    }
    if (family == "rw1" || family == "rw2") {
      require(K >= 1, Errc::InvalidArgument, "rw: --K is required");
      return make_rw(K, family == "rw1" ? 1 : 2, k);
    }
    if (family == "icar") {
      require(!adjacency_path.empty(), Errc::InvalidArgument, "icar: --adjacency is required");
      const std::string text = read_file(adjacency_path);
      Matrix w;
      if (text.find('[') != std::string::npos) {
        const Json j = Json::parse(text);
        const Json& mat = j.is_object() ? j.at("adjacency") : j;
        w = Matrix::Zero(mat.size(), mat.size());
        for (size_t i = 0; i < mat.size(); ++i)
          for (size_t c = 0; c < mat[i].size(); ++c) w(i, c) = mat[i][c].get<double>();
      } else {
        require(K >= 2, Errc::InvalidArgument, "icar edge list: --K gives the node count");
        w = adjacency_from_edge_csv(text, K);
      }
      return make_icar(w, k);
    }
    if (family == "pspline") {
      require(K >= 4, Errc::InvalidArgument, "pspline: --K >= 4 is required");
      return make_pspline(K, order, interval[0], interval[1], k);
    }
    fail(Errc::InvalidArgument, "unknown family '" + family + "'");
  }

  /// P-spline effects get the fitted penalty modification unless --unmodified.
  EffectSpec build_resolved() const {
    EffectSpec e = build();
    if (e.family == EffectFamily::PSpline && !unmodified) {
      const Matrix s_tilde = target_null_space(*e.bspline, e.dist, e.penalty_order);
      e = apply_qmod(e, fit_lambda(e.structure.entries, s_tilde, e.penalty_order));
    }
    return e;
  }

  Json config_json() const {
    Json j;
    if (!spec_path.empty()) j["spec"] = spec_path;
    if (!family.empty()) j["family"] = family;
    if (K > 0) j["K"] = K;
    j["order"] = order;
    if (!kind.empty()) j["kind"] = kind;
    if (!p.empty()) j["p"] = p;
    j["interval"] = interval;
    if (!adjacency_path.empty()) j["adjacency"] = adjacency_path;
    j["unmodified"] = unmodified;
    return j;
  }
};

int cmd_scale_constant(const EffectFlags& flags, bool geometric_mean, int mc_n,
                       std::uint64_t seed, bool as_json, const std::string& out_path,
                       std::ostream& out, std::ostream& err) {
  Json config = flags.config_json();
  config["command"] = "scale-constant";
  config["geometric_mean"] = geometric_mean;
  if (mc_n > 0) config["mc"] = mc_n;
  err << "# config: " << config.dump() << "\n";

  const EffectSpec e = flags.build_resolved();
  const StandardizedEffect se = standardize(e);
  OutputTarget target;
  std::ostream& os = target.open(out_path, out);
  if (as_json) {
    Json j = to_json(se);
    if (geometric_mean) j["sigma2_ref"] = geometric_mean_constant(e, se.constraints);
    if (mc_n > 0) j["C_mc"] = mc_scaling_constant(e, se.constraints, mc_n, seed);
    j["config"] = config;
    os << j.dump(2) << "\n";
    return 0;
  }
  os << fmt(se.C) << "\n";
  if (geometric_mean) os << "sigma2_ref " << fmt(geometric_mean_constant(e, se.constraints)) << "\n";
  if (mc_n > 0)
    os << "C_mc " << fmt(mc_scaling_constant(e, se.constraints, mc_n, seed)) << "\n";
  return 0;
}

int cmd_table(int jobs, const std::string& out_path, std::ostream& out, std::ostream& err) {
  Json config{{"command", "table"}, {"jobs", jobs}};
  err << "# config: " << config.dump() << "\n";
  const auto rows = compute_scaling_table(jobs);
  OutputTarget target;
  std::ostream& os = target.open(out_path, out);
  os << "# config: " << config.dump() << "\n";
  write_scaling_table_csv(rows, os);
  return 0;
}

int cmd_qmod(int K, int order, std::vector<double> interval, int max_iter, double tol,
             int restarts, bool cold, const std::string& out_path, std::ostream& out,
             std::ostream& err) {
  Json config{{"command", "qmod"},   {"K", K},     {"order", order},
              {"interval", interval}, {"max_iter", max_iter}, {"tol", tol},
              {"restarts", restarts}, {"cold", cold}};
  err << "# config: " << config.dump() << "\n";
  QModResult fit;
  if (cold) {
    const BSplineBasis basis(K, interval[0], interval[1]);
    const Matrix s_tilde =
        target_null_space(basis, ContinuousUniform{interval[0], interval[1]}, order);
    QModOptions opts;
    opts.max_iterations = max_iter;
    opts.tolerance = tol;
    opts.restarts = restarts;
    fit = fit_lambda(rw_structure(K, order), s_tilde, order, opts);
  } else {
    fit = fit_modification_chained(K, order, interval[0], interval[1]);
  }
  Json j = to_json(fit);
  j["config"] = config;
  OutputTarget target;
  target.open(out_path, out) << j.dump(2) << "\n";
  return 0;
}

int cmd_implied_prior(const std::string& prior, double c, double sigma2_ref, int grid,
                      double shape, double rate, double u, double alpha, double beta_a,
                      double beta_b, const std::string& out_path, std::ostream& out,
                      std::ostream& err) {
  PhiPrior spec;
  if (prior == "ig") {
    spec.kind = PhiPriorKind::IGPair;
    spec.shape = shape;
    spec.rate = rate;
  } else if (prior == "pc") {
    spec.kind = PhiPriorKind::PCPair;
    spec.U = u;
    spec.alpha = alpha;
  } else if (prior == "vp") {
    spec.kind = PhiPriorKind::BetaOmega;
    spec.beta_a = beta_a;
    spec.beta_b = beta_b;
  } else {
    fail(Errc::InvalidArgument, "--prior must be ig, pc or vp");
  }
  require(grid >= 1, Errc::InvalidArgument, "--grid must be >= 1");
  const double c_eff = sigma2_ref > 0.0 ? c / sigma2_ref : c;
  Json config{{"command", "implied-prior"}, {"prior", prior}, {"C", c},
              {"sigma2_ref", sigma2_ref},   {"C_eff", c_eff}, {"grid", grid}};
  err << "# config: " << config.dump() << "\n";
  OutputTarget target;
  std::ostream& os = target.open(out_path, out);
  os << "# config: " << config.dump() << "\n";
  os << "phi,density\n";
  for (int i = 0; i < grid; ++i) {
    const double phi = (i + 0.5) / grid;
    os << fmt(phi) << ',' << fmt(implied_phi_density(spec, c_eff, phi)) << "\n";
  }
  return 0;
}

int cmd_sample_effect(const EffectFlags& flags, int n, double sigma2, int eval_grid,
                      std::uint64_t seed, const std::string& out_path, std::ostream& out,
                      std::ostream& err) {
  require(n >= 1, Errc::InvalidArgument, "--n must be >= 1");
  Json config = flags.config_json();
  config["command"] = "sample-effect";
  config["n"] = n;
  config["sigma2"] = sigma2;
  config["seed"] = seed;
  config["eval_grid"] = eval_grid;
  err << "# config: " << config.dump() << "\n";

  const EffectSpec e = flags.build_resolved();
  const StandardizedEffect se = standardize(e);
  const ConstrainedGaussian g(se.base.structure, sigma2, se.constraints);
  const Matrix draws = sample_constrained(g, n, seed);
  OutputTarget target;
  std::ostream& os = target.open(out_path, out);
  os << "# config: " << config.dump() << "\n";
  if (eval_grid > 0) {
    // Rows are realizations of the standardized effect on an equispaced grid.
    std::vector<double> xs(eval_grid);
    const auto [lo, hi] = [&]() -> std::pair<double, double> {
      if (const auto* cu = std::get_if<ContinuousUniform>(&e.dist)) return {cu->lo, cu->hi};
      return {1.0, static_cast<double>(e.K)};
    }();
    for (int i = 0; i < eval_grid; ++i)
      xs[i] = e.indicator_basis()
                  ? std::round(lo + (hi - lo) * i / std::max(1, eval_grid - 1))
                  : lo + (hi - lo) * i / std::max(1, eval_grid - 1);
    for (int i = 0; i < eval_grid; ++i) os << (i ? "," : "") << "x" << fmt(xs[i]);
    os << "\n";
    for (int i = 0; i < n; ++i) {
      for (int jdx = 0; jdx < eval_grid; ++jdx)
        os << (jdx ? "," : "") << fmt(se.eval_basis(xs[jdx]).dot(draws.row(i)));
      os << "\n";
    }
  } else {
    for (int k = 0; k < e.K; ++k) os << (k ? "," : "") << "u" << (k + 1);
    os << "\n";
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < e.K; ++k) os << (k ? "," : "") << fmt(draws(i, k));
      os << "\n";
    }
  }
  return 0;
}

Dataset read_xy_csv(const std::string& path) {
  std::istringstream is(read_file(path));
  std::string line;
  std::vector<double> xs, ys;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (first && line.find("x") != std::string::npos && line.find("y") != std::string::npos) {
      first = false;
      continue;  // header
    }
    first = false;
    std::istringstream ls(line);
    std::string a, b;
    require(static_cast<bool>(std::getline(ls, a, ',')) &&
                static_cast<bool>(std::getline(ls, b, ',')),
            Errc::InvalidArgument, "data file rows must be 'x,y'");
    xs.push_back(std::stod(a));
    ys.push_back(std::stod(b));
  }
  Dataset d;
  d.x = Eigen::Map<const Vector>(xs.data(), xs.size());
  d.y = Eigen::Map<const Vector>(ys.data(), ys.size());
  return d;
}

int cmd_fit(const std::string& data_path, const std::string& model, const std::string& prior_s,
            const std::string& scaling_s, bool unmodified, int K, int grid_points,
            const std::string& out_path, std::ostream& out, std::ostream& err) {
  Json config{{"command", "fit"},     {"data", data_path},       {"model", model},
              {"prior", prior_s},     {"scaling", scaling_s},    {"unmodified", unmodified},
              {"K", K},               {"grid_points", grid_points}};
  err << "# config: " << config.dump() << "\n";

  PriorChoice prior;
  if (prior_s == "ig")
    prior = PriorChoice::IG;
  else if (prior_s == "pc")
    prior = PriorChoice::PC;
  else if (prior_s == "vp")
    prior = PriorChoice::VP;
  else
    fail(Errc::InvalidArgument, "--prior must be ig, pc or vp");

  const Dataset data = read_xy_csv(data_path);
  FitSummary summary;
  if (model == "local-level") {
    Scaling scaling = Scaling::Expectation;
    if (scaling_s == "gm" || scaling_s == "geometric_mean")
      scaling = Scaling::GeometricMean;
    else if (scaling_s == "none")
      scaling = Scaling::None;
    else
      require(scaling_s.empty() || scaling_s == "expectation", Errc::InvalidArgument,
              "--scaling must be expectation, gm or none");
    const LocalLevelContext ctx = LocalLevelContext::make(K > 0 ? K : 25);
    summary = fit_local_level(data.y, prior, scaling, ctx, grid_points);
  } else if (model == "linear-spline") {
    const SplineContext ctx = SplineContext::make(K > 0 ? K : 10, !unmodified);
    summary = fit_linear_spline(data, prior, ctx, grid_points);
  } else {
    fail(Errc::InvalidArgument, "--model must be local-level or linear-spline");
  }
  Json j = to_json(summary);
  j["config"] = config;
  OutputTarget target;
  target.open(out_path, out) << j.dump(2) << "\n";
  return 0;
}

int cmd_simulate(StudyConfig cfg, const std::string& out_prefix, std::ostream& out,
                 std::ostream& err) {
  const Json config = to_json(cfg);
  err << "# config: " << config.dump() << "\n";
  const StudyResult result = run_study(cfg);
  if (out_prefix.empty()) {
    out << "# config: " << config.dump() << "\n";
    write_results_csv(result, out);
    out << "\n";
    out << "# config: " << config.dump() << "\n";
    write_summary_csv(result, out);
    return 0;
  }
  {
    std::ofstream os(out_prefix + "_results.csv");
    require(os.good(), Errc::InvalidArgument, "cannot write results CSV");
    os << "# config: " << config.dump() << "\n";
    write_results_csv(result, os);
  }
  {
    std::ofstream os(out_prefix + "_summary.csv");
    require(os.good(), Errc::InvalidArgument, "cannot write summary CSV");
    os << "# config: " << config.dump() << "\n";
    write_summary_csv(result, os);
  }
  err << "wrote " << out_prefix << "_results.csv and " << out_prefix << "_summary.csv\n";
  return 0;
}

}  // namespace

int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Standardized latent Gaussian model effects: scaling constants, penalty "
               "modification, implied priors and grid-posterior simulation studies"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  std::string out_path, format = "csv";
  app.add_option("--seed", seed, "stream seed for anything random")->capture_default_str();
  app.add_option("--out", out_path, "write the primary output to this file (simulate: prefix)");
  app.add_option("--format", format, "csv|json where a command supports both")
      ->check(CLI::IsMember({"csv", "json"}));

  // scale-constant
  auto* sc = app.add_subcommand("scale-constant", "scaling constant of a standardized effect");
  EffectFlags sc_flags;
  sc_flags.attach(sc);
  bool sc_gm = false;
  int sc_mc = 0;
  sc->add_flag("--geometric-mean", sc_gm, "also print the geometric-mean reference variance");
  sc->add_option("--mc", sc_mc, "also print a Monte-Carlo estimate with this many draws");

  // table
  auto* tb = app.add_subcommand("table-h", "scaling constants over K for all four families");
  int tb_jobs = 0;
  tb->add_option("--jobs", tb_jobs, "worker threads (0 = hardware)");

  // qmod
  auto* qm = app.add_subcommand("qmod", "fit the sparsity-preserving penalty modification");
  int qm_k = 10, qm_order = 2, qm_iter = 5000, qm_restarts = 2;
  double qm_tol = 1e-10;
  bool qm_cold = false;
  std::vector<double> qm_interval{0.0, 1.0};
  qm->add_option("--K", qm_k, "number of basis functions")->required();
  qm->add_option("--order", qm_order, "penalty order (1 or 2)");
  qm->add_option("--interval", qm_interval, "covariate interval")->expected(2);
  qm->add_option("--max-iter", qm_iter, "simplex iteration budget (with --cold)");
  qm->add_option("--tol", qm_tol, "relative objective tolerance (with --cold)");
  qm->add_option("--restarts", qm_restarts, "simplex restarts within the budget (with --cold)");
  qm->add_flag("--cold", qm_cold, "single fit from lambda = 1 instead of the warm-start ladder");

  // implied-prior
  auto* ip = app.add_subcommand("implied-prior",
                                "density of the variance proportion implied by a prior pair");
  std::string ip_prior;
  double ip_c = 1.0, ip_ref = 0.0, ip_shape = 1.0, ip_rate = 5e-5, ip_u = 3.0, ip_alpha = 0.05,
         ip_ba = 1.0, ip_bb = 1.0;
  int ip_grid = 200;
  ip->add_option("--prior", ip_prior, "ig|pc|vp")->required();
  ip->add_option("--C", ip_c, "scaling constant in force")->required();
  ip->add_option("--sigma2-ref", ip_ref, "divide C by this reference variance");
  ip->add_option("--grid", ip_grid, "number of density evaluations");
  ip->add_option("--shape", ip_shape, "inverse-gamma shape");
  ip->add_option("--rate", ip_rate, "inverse-gamma rate");
  ip->add_option("--U", ip_u, "PC tail threshold");
  ip->add_option("--alpha", ip_alpha, "PC tail probability");
  ip->add_option("--beta-a", ip_ba, "Beta weight a");
  ip->add_option("--beta-b", ip_bb, "Beta weight b");

  // sample-effect
  auto* se = app.add_subcommand("sample-effect", "draws from a standardized effect");
  EffectFlags se_flags;
  se_flags.attach(se);
  int se_n = 10, se_grid = 0;
  double se_sigma2 = 1.0;
  se->add_option("--n", se_n, "number of draws");
  se->add_option("--sigma2", se_sigma2, "variance parameter");
  se->add_option("--eval-grid", se_grid, "emit effect values on this many grid points");

  // fit
  auto* ft = app.add_subcommand("fit", "grid posterior for one dataset");
  std::string ft_data, ft_model = "local-level", ft_prior = "vp", ft_scaling = "expectation";
  bool ft_unmodified = false;
  int ft_k = 0, ft_grid = 80;
  ft->add_option("--data", ft_data, "CSV file with x,y columns")->required();
  ft->add_option("--model", ft_model, "local-level|linear-spline");
  ft->add_option("--prior", ft_prior, "ig|pc|vp");
  ft->add_option("--scaling", ft_scaling, "expectation|gm|none (local-level)");
  ft->add_flag("--unmodified", ft_unmodified, "linear-spline: original penalty arm");
  ft->add_option("--K", ft_k, "levels / basis size");
  ft->add_option("--grid-points", ft_grid, "grid points per axis");

  // simulate
  auto* sim = app.add_subcommand("simulate", "replicated simulation study");
  std::string sim_study = "local-level", sim_config_path;
  sim->add_option("--config", sim_config_path, "JSON study configuration (overrides flags)");
  int sim_reps = 200, sim_jobs = 0, sim_k = 0, sim_n = 0, sim_grid = 80;
  std::vector<double> sim_phis;
  std::vector<std::string> sim_priors, sim_scalings, sim_arms;
  sim->add_option("--study", sim_study, "local-level (alias s51) | spline (alias s52)");
  sim->add_option("--reps", sim_reps, "replicates");
  sim->add_option("--jobs", sim_jobs, "worker threads (0 = hardware)");
  sim->add_option("--phis", sim_phis, "true variance proportions (local-level)");
  sim->add_option("--priors", sim_priors, "subset of ig,pc,vp");
  sim->add_option("--scalings", sim_scalings, "subset of expectation,gm,none");
  sim->add_option("--arms", sim_arms, "subset of modified,unmodified (spline)");
  sim->add_option("--K", sim_k, "levels / basis size");
  sim->add_option("--n-obs", sim_n, "observations per dataset");
  sim->add_option("--grid-points", sim_grid, "grid points per axis");

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
      if (sc->parsed())
      return cmd_scale_constant(sc_flags, sc_gm, sc_mc, seed, format == "json", out_path, out,
                                err);
    if (tb->parsed()) return cmd_table(tb_jobs, out_path, out, err);
    if (qm->parsed())
      return cmd_qmod(qm_k, qm_order, qm_interval, qm_iter, qm_tol, qm_restarts, qm_cold,
                      out_path, out, err);
    if (ip->parsed())
      return cmd_implied_prior(ip_prior, ip_c, ip_ref, ip_grid, ip_shape, ip_rate, ip_u,
                               ip_alpha, ip_ba, ip_bb, out_path, out, err);
    if (se->parsed())
      return cmd_sample_effect(se_flags, se_n, se_sigma2, se_grid, seed, out_path, out, err);
    if (ft->parsed())
      return cmd_fit(ft_data, ft_model, ft_prior, ft_scaling, ft_unmodified, ft_k, ft_grid,
                     out_path, out, err);
    if (sim->parsed()) {
      if (!sim_config_path.empty()) {
        StudyConfig cfg = study_config_from_json(Json::parse(read_file(sim_config_path)));
        return cmd_simulate(cfg, out_path, out, err);
      }
      Json j;
      j["study"] = sim_study;
      j["replicates"] = sim_reps;
      j["seed"] = seed;
      j["jobs"] = sim_jobs;
      j["grid_points"] = sim_grid;
      if (sim_k > 0) j["K"] = sim_k;
      if (sim_n > 0) j["n_obs"] = sim_n;
      if (!sim_phis.empty()) j["phis"] = sim_phis;
      if (!sim_priors.empty()) j["priors"] = sim_priors;
      if (!sim_scalings.empty()) {
        for (auto& s : sim_scalings)
          if (s == "gm") s = "geometric_mean";
        j["scalings"] = sim_scalings;
      }
      if (!sim_arms.empty()) j["arms"] = sim_arms;
      return cmd_simulate(study_config_from_json(j), out_path, out, err);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    // invalid specifications exit 2, numerical failures exit 3
    switch (e.code()) {
      case Errc::InvalidArgument:
      case Errc::TooFewLevels:
      case Errc::KTooSmall:
      case Errc::OrderTooLarge:
      case Errc::UnsupportedOrder:
      case Errc::UnsupportedFamily:
      case Errc::UnsupportedPrior:
      case Errc::InvalidProbabilityVector:
      case Errc::DisconnectedGraph:
      case Errc::ZeroVarianceCovariate:
      case Errc::OutOfInterval:
        return 2;
      default:
        return 3;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
  err << "error: no subcommand\n";
  return 2;
}

}  // namespace lgm
