#include "lgm/serialize.hpp"

#include <sstream>

#include "lgm/error.hpp"

namespace lgm {

namespace {

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Vector vector_from_json(const Json& j) {
  Vector v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v[static_cast<int>(i)] = j[i].get<double>();
  return v;
}

}  // namespace

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (int i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

Matrix matrix_from_json(const Json& j) {
  const int rows = static_cast<int>(j.size());
  require(rows > 0, Errc::InvalidArgument, "matrix_from_json: empty matrix");
  const int cols = static_cast<int>(j[0].size());
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    require(static_cast<int>(j[i].size()) == cols, Errc::InvalidArgument,
            "matrix_from_json: ragged rows");
    for (int c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  }
  return m;
}

}  // namespace

Json to_json(const CovariateDist& dist) {
  Json j;
  if (const auto* du = std::get_if<DiscreteUniform>(&dist)) {
    j["type"] = "discrete_uniform";
    j["params"] = {{"K", du->K}};
  } else if (const auto* cat = std::get_if<CategoricalDist>(&dist)) {
    j["type"] = "categorical";
    j["params"] = {{"p", vector_to_json(cat->p)}};
  } else if (const auto* cu = std::get_if<ContinuousUniform>(&dist)) {
    j["type"] = "continuous_uniform";
    j["params"] = {{"min", cu->lo}, {"max", cu->hi}};
  } else {
    const auto& emp = std::get<EmpiricalDist>(dist);
    j["type"] = "empirical";
    j["params"] = {{"samples", emp.samples}};
  }
  return j;
}

CovariateDist covariate_from_json(const Json& j) {
  const std::string type = j.at("type").get<std::string>();
  const Json& p = j.at("params");
  if (type == "discrete_uniform") return DiscreteUniform{p.at("K").get<int>()};
  if (type == "categorical") return CategoricalDist{vector_from_json(p.at("p"))};
  if (type == "continuous_uniform")
    return ContinuousUniform{p.at("min").get<double>(), p.at("max").get<double>()};
  if (type == "empirical") return EmpiricalDist{p.at("samples").get<std::vector<double>>()};
  fail(Errc::InvalidArgument, "covariate_from_json: unknown type '" + type + "'");
}

Json to_json(const EffectSpec& e) {
  Json j;
  j["family"] = to_string(e.family);
  j["K"] = e.K;
  j["kind"] = to_string(e.kind);
  j["dist"] = to_json(e.dist);
  if (e.adjacency) j["adjacency"] = matrix_to_json(*e.adjacency);
  if (e.family == EffectFamily::PSpline) {
    j["interval"] = {e.bspline->lo(), e.bspline->hi()};
    j["order"] = e.penalty_order;
  }
  return j;
}

EffectSpec effect_from_json(const Json& j) {
  const std::string family = j.at("family").get<std::string>();
  const std::string kind_s = j.value("kind", std::string("random"));
  require(kind_s == "fixed" || kind_s == "random", Errc::InvalidArgument,
          "effect_from_json: kind must be 'fixed' or 'random'");
  const EffectKind kind = kind_s == "fixed" ? EffectKind::Fixed : EffectKind::Random;

  if (family == "linear") {
    require(j.contains("dist"), Errc::InvalidArgument, "effect_from_json: linear needs a dist");
    return make_linear(covariate_from_json(j.at("dist")), kind);
  }
  if (family == "categorical") {
    if (j.contains("dist")) {
      const CovariateDist dist = covariate_from_json(j.at("dist"));
      const auto* cat = std::get_if<CategoricalDist>(&dist);
      require(cat != nullptr, Errc::InvalidArgument,
              "effect_from_json: categorical effect needs a categorical dist");
      return make_categorical(cat->p, kind);
    }
    const int k = j.at("K").get<int>();
    return make_categorical(Vector::Constant(k, 1.0 / k), kind);
  }
  if (family == "rw1" || family == "rw2") {
    const int k = j.at("K").get<int>();
    const int order = family == "rw1" ? 1 : 2;
    if (j.contains("dist")) return make_rw(k, order, kind, covariate_from_json(j.at("dist")));
    return make_rw(k, order, kind);
  }
  if (family == "icar") {
    require(j.contains("adjacency"), Errc::InvalidArgument,
            "effect_from_json: icar needs an adjacency matrix");
    return make_icar(matrix_from_json(j.at("adjacency")), kind);
  }
  if (family == "pspline") {
    const int k = j.at("K").get<int>();
    const int order = j.value("order", 2);
    double lo = 0.0, hi = 1.0;
    if (j.contains("interval")) {
      lo = j.at("interval")[0].get<double>();
      hi = j.at("interval")[1].get<double>();
    }
    return make_pspline(k, order, lo, hi, kind);
  }
  fail(Errc::InvalidArgument, "effect_from_json: unknown family '" + family + "'");
}

Json to_json(const StandardizedEffect& se) {
  Json j;
  j["effect"] = to_json(se.base);
  j["C"] = se.C;
  j["method"] = to_string(se.method);
  j["constraints"] = matrix_to_json(se.constraints);
  j["center"] = vector_to_json(se.basis_center);
  return j;
}

Json to_json(const QModResult& r) {
  Json j;
  j["K"] = r.Q_tilde.size();
  j["order"] = r.Q_tilde.rank_deficiency;
  j["lambda_hat"] = vector_to_json(r.lambda_hat);
  j["kl_value"] = r.kl_value;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["Q_tilde"] = matrix_to_json(r.Q_tilde.entries);
  j["S_tilde"] = matrix_to_json(r.S_tilde);
  return j;
}

namespace {

PriorChoice prior_from_string(const std::string& s) {
  if (s == "ig") return PriorChoice::IG;
  if (s == "pc") return PriorChoice::PC;
  if (s == "vp") return PriorChoice::VP;
  fail(Errc::InvalidArgument, "unknown prior '" + s + "'");
}

Scaling scaling_from_string(const std::string& s) {
  if (s == "expectation") return Scaling::Expectation;
  if (s == "geometric_mean" || s == "gm") return Scaling::GeometricMean;
  if (s == "none") return Scaling::None;
  fail(Errc::InvalidArgument, "unknown scaling '" + s + "'");
}

}  // namespace

Json to_json(const StudyConfig& cfg) {
  Json j;
  j["study"] = to_string(cfg.study);
  j["replicates"] = cfg.replicates;
  j["seed"] = cfg.seed;
  j["grid_points"] = cfg.grid_points;
  j["jobs"] = cfg.jobs;
  Json priors = Json::array();
  for (auto p : cfg.priors) priors.push_back(to_string(p));
  j["priors"] = priors;
  if (cfg.study == StudyKind::LocalLevel) {
    j["phis"] = cfg.phis;
    Json scalings = Json::array();
    for (auto s : cfg.scalings) scalings.push_back(to_string(s));
    j["scalings"] = scalings;
    j["K"] = cfg.K > 0 ? cfg.K : 25;
    j["n_obs"] = cfg.n_obs > 0 ? cfg.n_obs : (cfg.K > 0 ? cfg.K : 25);
  } else {
    Json arms = Json::array();
    if (cfg.run_modified) arms.push_back("modified");
    if (cfg.run_unmodified) arms.push_back("unmodified");
    j["arms"] = arms;
    j["K"] = cfg.K > 0 ? cfg.K : 10;
    j["n_obs"] = cfg.n_obs > 0 ? cfg.n_obs : 300;
  }
  return j;
}

StudyConfig study_config_from_json(const Json& j) {
  StudyConfig cfg;
  const std::string study = j.at("study").get<std::string>();
  if (study == "local-level" || study == "s51")
    cfg.study = StudyKind::LocalLevel;
  else if (study == "spline" || study == "s52")
    cfg.study = StudyKind::Spline;
  else
    fail(Errc::InvalidArgument, "study_config_from_json: unknown study '" + study + "'");
  cfg.replicates = j.value("replicates", 200);
  cfg.seed = j.value("seed", static_cast<std::uint64_t>(1));
  cfg.grid_points = j.value("grid_points", 80);
  cfg.jobs = j.value("jobs", 0);
  cfg.K = j.value("K", 0);
  cfg.n_obs = j.value("n_obs", 0);
  if (j.contains("phis")) cfg.phis = j.at("phis").get<std::vector<double>>();
  if (j.contains("priors")) {
    cfg.priors.clear();
    for (const auto& p : j.at("priors")) cfg.priors.push_back(prior_from_string(p));
  }
  if (j.contains("scalings")) {
    cfg.scalings.clear();
    for (const auto& s : j.at("scalings"))
      cfg.scalings.push_back(scaling_from_string(s));
  }
  if (j.contains("arms")) {
    cfg.run_modified = false;
    cfg.run_unmodified = false;
    for (const auto& a : j.at("arms")) {
      const std::string arm = a.get<std::string>();
      if (arm == "modified")
        cfg.run_modified = true;
      else if (arm == "unmodified")
        cfg.run_unmodified = true;
      else
        fail(Errc::InvalidArgument, "study_config_from_json: unknown arm '" + arm + "'");
    }
  }
  return cfg;
}

Json to_json(const FitSummary& s) {
  Json j;
  j["phi_mean"] = s.phi_mean;
  j["phi_low"] = s.phi_low;
  j["phi_high"] = s.phi_high;
  j["T_mean"] = s.T_mean;
  j["T_low"] = s.T_low;
  j["T_high"] = s.T_high;
  if (std::isfinite(s.beta_mean)) j["beta_mean"] = s.beta_mean;
  j["expansions"] = s.expansions;
  return j;
}

Matrix adjacency_from_edge_csv(const std::string& text, int n_nodes) {
  require(n_nodes >= 2, Errc::InvalidArgument, "adjacency_from_edge_csv: need >= 2 nodes");
  Matrix w = Matrix::Zero(n_nodes, n_nodes);
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tok;
    std::vector<double> fields;
    while (std::getline(ls, tok, ',')) fields.push_back(std::stod(tok));
    require(fields.size() == 2 || fields.size() == 3, Errc::InvalidArgument,
            "adjacency_from_edge_csv: rows must be 'i,j' or 'i,j,weight'");
    const int i = static_cast<int>(fields[0]) - 1;
    const int jdx = static_cast<int>(fields[1]) - 1;
    require(i >= 0 && i < n_nodes && jdx >= 0 && jdx < n_nodes && i != jdx,
            Errc::InvalidArgument, "adjacency_from_edge_csv: edge endpoints out of range");
    const double weight = fields.size() == 3 ? fields[2] : 1.0;
    w(i, jdx) = weight;
    w(jdx, i) = weight;
  }
  return w;
}

}  // namespace lgm
