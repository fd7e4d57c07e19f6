#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "lgm/cli.hpp"
#include "lgm/serialize.hpp"
#include "lgm/table.hpp"

using namespace lgm;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

double first_number(const std::string& text) {
  std::istringstream is(text);
  double v;
  is >> v;
  return v;
}

}  // namespace

TEST_CASE("scale-constant reproduces the reference values") {
  const CliRun r25 = run({"scale-constant", "--family", "rw1", "--K", "25"});
  CHECK(r25.code == 0);
  CHECK(std::abs(first_number(r25.out) - 4.160) < 5e-4);
  CHECK(r25.err.find("# config:") != std::string::npos);

  const CliRun r100 = run({"scale-constant", "--family", "rw2", "--K", "100"});
  CHECK(r100.code == 0);
  CHECK(std::abs(first_number(r100.out) - 2381.19) < 0.005);

  const CliRun gm = run({"scale-constant", "--family", "rw1", "--K", "25", "--geometric-mean"});
  CHECK(gm.code == 0);
  CHECK(gm.out.find("sigma2_ref") != std::string::npos);
  std::istringstream is(gm.out);
  std::string line;
  std::getline(is, line);
  std::getline(is, line);
  CHECK(std::abs(std::stod(line.substr(line.find(' '))) - 3.77) < 5e-3);
}

TEST_CASE("invalid effect specs exit with the usage code") {
  const CliRun too_few = run({"scale-constant", "--family", "rw2", "--K", "3"});
  CHECK(too_few.code == 2);
  CHECK(!too_few.err.empty());
  const CliRun no_sub = run({});
  CHECK(no_sub.code == 2);
  const CliRun bad_flag = run({"scale-constant", "--no-such-flag"});
  CHECK(bad_flag.code == 2);
  const CliRun bad_family = run({"scale-constant", "--family", "spline9", "--K", "5"});
  CHECK(bad_family.code == 2);
}

TEST_CASE("help exits cleanly") {
  const CliRun help = run({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("scale-constant") != std::string::npos);
}

TEST_CASE("qmod emits the fitted modification as json") {
  const CliRun r = run({"qmod", "--K", "10", "--order", "2"});
  REQUIRE(r.code == 0);
  const Json j = Json::parse(r.out);
  CHECK(j.at("K") == 10);
  CHECK(j.at("order") == 2);
  CHECK(j.at("lambda_hat").size() == 10);
  CHECK(j.at("kl_value").is_number());
  CHECK(j.at("iterations").get<int>() > 0);
  // Q_tilde annihilates S_tilde
  Matrix qt(10, 10), st(10, 2);
  for (int i = 0; i < 10; ++i)
    for (int c = 0; c < 10; ++c) qt(i, c) = j.at("Q_tilde")[i][c].get<double>();
  for (int i = 0; i < 10; ++i)
    for (int c = 0; c < 2; ++c) st(i, c) = j.at("S_tilde")[i][c].get<double>();
  CHECK((qt * st).cwiseAbs().maxCoeff() < 1e-8 * qt.cwiseAbs().maxCoeff());
}

TEST_CASE("implied-prior table integrates to one") {
  const CliRun r = run({"implied-prior", "--prior", "ig", "--C", "4.16", "--grid", "500"});
  REQUIRE(r.code == 0);
  std::istringstream is(r.out);
  std::string line;
  int rows = 0;
  double mass = 0.0;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("phi,", 0) == 0) continue;
    const auto comma = line.find(',');
    mass += std::stod(line.substr(comma + 1)) / 500.0;
    ++rows;
  }
  CHECK(rows == 500);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("sample-effect is deterministic given the seed") {
  const std::vector<std::string> args{"--seed", "9",       "sample-effect", "--family",
                                      "rw1",    "--K",     "8",             "--n",
                                      "5",      "--eval-grid", "8"};
  const CliRun a = run(args);
  const CliRun b = run(args);
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  const CliRun c = run({"--seed", "10", "sample-effect", "--family", "rw1", "--K", "8", "--n",
                        "5", "--eval-grid", "8"});
  CHECK(c.out != a.out);
}

TEST_CASE("simulate writes identical csvs for identical flags") {
  const std::vector<std::string> args{
      "--seed", "7",  "simulate",      "--study", "s51",     "--reps",  "2",
      "--phis", "0.5", "--priors",     "vp",      "--scalings", "expectation",
      "--grid-points", "24"};
  const CliRun a = run(args);
  const CliRun b = run(args);
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.find("replicate,arm,") != std::string::npos);
  CHECK(a.out.find("vp_expectation") != std::string::npos);
}

TEST_CASE("fit reads a csv dataset and reports a posterior summary") {
  const std::string path = "/tmp/lgm_test_fit_data.csv";
  {
    std::ofstream os(path);
    os << "x,y\n";
    Rng rng(13);
    const LocalLevelContext ctx = LocalLevelContext::make(25);
    const Vector y = generate_local_level_data(ctx, 0.5, rng);
    for (int i = 0; i < 25; ++i) os << (i + 1) << "," << y[i] << "\n";
  }
  const CliRun r = run({"fit", "--data", path, "--model", "local-level", "--prior", "vp",
                        "--scaling", "expectation", "--grid-points", "40"});
  REQUIRE(r.code == 0);
  const Json j = Json::parse(r.out);
  CHECK(j.at("phi_mean").get<double>() > 0.0);
  CHECK(j.at("phi_mean").get<double>() < 1.0);
  CHECK(j.at("T_low").get<double>() < j.at("T_high").get<double>());
}

TEST_CASE("effect specs round-trip through json") {
  const EffectSpec rw = make_rw(12, 2, EffectKind::Random);
  const EffectSpec rw_back = effect_from_json(to_json(rw));
  CHECK(rw_back.K == 12);
  CHECK(rw_back.family == EffectFamily::RW2);
  CHECK((rw_back.structure.entries - rw.structure.entries).cwiseAbs().maxCoeff() == 0.0);

  Vector p(3);
  p << 0.2, 0.5, 0.3;
  const EffectSpec cat = make_categorical(p, EffectKind::Fixed);
  const EffectSpec cat_back = effect_from_json(to_json(cat));
  CHECK(cat_back.kind == EffectKind::Fixed);
  CHECK((std::get<CategoricalDist>(cat_back.dist).p - p).cwiseAbs().maxCoeff() == 0.0);

  const EffectSpec ps = make_pspline(9, 1, -1.0, 2.0);
  const EffectSpec ps_back = effect_from_json(to_json(ps));
  CHECK(ps_back.penalty_order == 1);
  CHECK(ps_back.bspline->lo() == -1.0);
  CHECK(ps_back.bspline->hi() == 2.0);

  Matrix w = Matrix::Zero(3, 3);
  w(0, 1) = w(1, 0) = 1.0;
  w(1, 2) = w(2, 1) = 1.0;
  const EffectSpec icar_back = effect_from_json(to_json(make_icar(w)));
  CHECK((*icar_back.adjacency - w).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("study configs round-trip through json") {
  StudyConfig cfg;
  cfg.study = StudyKind::Spline;
  cfg.replicates = 17;
  cfg.seed = 99;
  cfg.run_unmodified = false;
  const StudyConfig back = study_config_from_json(to_json(cfg));
  CHECK(back.study == StudyKind::Spline);
  CHECK(back.replicates == 17);
  CHECK(back.seed == 99);
  CHECK(back.run_modified);
  CHECK(!back.run_unmodified);
}

TEST_CASE("adjacency edge lists parse into symmetric matrices") {
  const Matrix w = adjacency_from_edge_csv("1,2\n2,3\n3,4\n", 4);
  CHECK(w(0, 1) == 1.0);
  CHECK(w(1, 0) == 1.0);
  CHECK(w(2, 3) == 1.0);
  CHECK(w.diagonal().cwiseAbs().maxCoeff() == 0.0);
  // weighted edges
  const Matrix wq = adjacency_from_edge_csv("1,2,0.5\n", 2);
  CHECK(wq(0, 1) == 0.5);
}

TEST_CASE("scaling table csv formatting") {
  std::vector<ScalingTableRow> rows{{5, 0.8, 0.3, 0.152, 0.012}};
  std::ostringstream os;
  write_scaling_table_csv(rows, os);
  CHECK(os.str() == "K,rw1,rw2,pspline_rw1,pspline_rw2\n5,0.8,0.3,0.152,0.012\n");
}
