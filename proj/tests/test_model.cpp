#include "ddbh/model.hpp"

#include <doctest.h>

#include <fstream>
#include <random>

using namespace ddbh;

TEST_CASE("build_params applies the detuning schedule") {
  std::map<std::string, std::string> cfg{
      {"n_sites", "30"}, {"j", "1.6"},    {"u", "-1"},
      {"a", "2"},        {"gamma", "2"},  {"detuning_schedule", "on"}};
  ModelParams p = build_params(cfg);
  CHECK(p.n_sites == 30);
  CHECK(p.detuning == doctest::Approx(6.2).epsilon(1e-15));
  CHECK(p.boundary == Boundary::periodic);
}

TEST_CASE("build_params accepts the all-zero model") {
  std::map<std::string, std::string> cfg{{"n_sites", "1"}, {"j", "0"},
                                         {"u", "0"},       {"a", "0"},
                                         {"gamma", "0"},   {"delta_omega", "0"}};
  ModelParams p = build_params(cfg);
  CHECK(p.n_sites == 1);
  CHECK(p.hopping == 0.0);
}

TEST_CASE("build_params rejects bad input") {
  std::map<std::string, std::string> cfg{{"n_sites", "30"}, {"j", "-1"},
                                         {"u", "-1"},       {"a", "2"},
                                         {"gamma", "2"},    {"delta_omega", "3"}};
  CHECK_THROWS_AS(build_params(cfg), ConfigError);  // negative hopping

  cfg["j"] = "abc";
  CHECK_THROWS_AS(build_params(cfg), ConfigError);  // non-numeric

  cfg["j"] = "1";
  cfg.erase("gamma");
  CHECK_THROWS_AS(build_params(cfg), ConfigError);  // missing key

  cfg["gamma"] = "2";
  cfg["n_sites"] = "0";
  CHECK_THROWS_AS(build_params(cfg), ConfigError);  // n_sites < 1
}

TEST_CASE("config file parsing") {
  const char* path = "test_config.tmp";
  {
    std::ofstream out(path);
    out << "# comment line\n"
        << "n_sites = 4\n"
        << "j = 0.5   # inline comment\n"
        << "u = -1\n"
        << "a = 2\n"
        << "gamma = 2\n"
        << "detuning_schedule = on\n"
        << "boundary = open\n";
  }
  auto cfg = read_config_file(path);
  ModelParams p = build_params(cfg);
  CHECK(p.n_sites == 4);
  CHECK(p.hopping == 0.5);
  CHECK(p.boundary == Boundary::open);
  std::remove(path);
}

TEST_CASE("neighbors wrap and clip") {
  ModelParams p = star_params(30, 1.0);
  auto nb = neighbors(0, p);
  CHECK(*nb.left == 29);
  CHECK(*nb.right == 1);
  nb = neighbors(15, p);
  CHECK(*nb.left == 14);
  CHECK(*nb.right == 16);

  p.boundary = Boundary::open;
  nb = neighbors(0, p);
  CHECK(!nb.left.has_value());
  CHECK(*nb.right == 1);
  nb = neighbors(29, p);
  CHECK(*nb.left == 28);
  CHECK(!nb.right.has_value());

  CHECK_THROWS_AS(neighbors(30, p), std::out_of_range);
}

TEST_CASE("neighbors is a bijection on interior sites") {
  ModelParams p = star_params(12, 0.3);
  for (int site = 0; site < p.n_sites; ++site) {
    auto nb = neighbors(site, p);
    CHECK(*neighbors(*nb.left, p).right == site);
    CHECK(*neighbors(*nb.right, p).left == site);
  }
}

TEST_CASE("correlation state pack/unpack round trip") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  const int n = 6;
  CorrelationState s = CorrelationState::zero(n);
  for (int i = 0; i < n; ++i) s.first(i) = cplx(nd(rng), nd(rng));
  MatrixXcd b(n, n), d(n, n);
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < n; ++r) {
      b(r, c) = cplx(nd(rng), nd(rng));
      d(r, c) = cplx(nd(rng), nd(rng));
    }
  s.normal = b * b.adjoint();
  s.anomalous = 0.5 * (d + d.transpose());

  CorrelationState back = CorrelationState::unpack(s.pack(), n);
  CHECK((back.first - s.first).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.normal - s.normal).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.anomalous - s.anomalous).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.hermiticity_defect() == 0.0);
  CHECK(back.symmetry_defect() == 0.0);
}

TEST_CASE("factorized state carries coherent moments") {
  VectorXcd phi(3);
  phi << cplx(1, 2), cplx(-0.5, 0.25), cplx(0, -1);
  CorrelationState s = CorrelationState::factorized(phi);
  CHECK(s.normal(1, 2) == std::conj(phi(1)) * phi(2));
  CHECK(s.anomalous(0, 2) == phi(0) * phi(2));
  CHECK(s.hermiticity_defect() < 1e-15);
  CHECK(s.symmetry_defect() == 0.0);
  CHECK(s.min_occupation() >= 0.0);
}

TEST_CASE("gutzwiller state pack/unpack and diagnostics") {
  const int n_max = 3, d = n_max + 1;
  MatrixXcd rho = MatrixXcd::Zero(d, d);
  rho(0, 0) = 0.5;
  rho(1, 1) = 0.5;
  rho(0, 1) = cplx(0.1, 0.2);
  rho(1, 0) = std::conj(rho(0, 1));
  GutzwillerState s = GutzwillerState::uniform(rho, 4, n_max);
  GutzwillerState back = GutzwillerState::unpack(s.pack(), 4, n_max);
  for (int i = 0; i < 4; ++i)
    CHECK((back.rhos[i] - rho).cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.max_trace_defect() < 1e-15);
  CHECK(s.max_hermiticity_defect() < 1e-15);
  CHECK(s.top_level_population() == 0.0);
}
