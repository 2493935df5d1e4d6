#include "ddbh/io.hpp"
#include <fstream>

#include <doctest.h>

#include <cstdio>
#include <random>

using namespace ddbh;

TEST_CASE("correlation state JSON round trip") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  const int n = 5;
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

  auto j = io::correlation_state_to_json(s);
  CorrelationState back = io::correlation_state_from_json(j);
  CHECK((back.first - s.first).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.normal - s.normal).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.anomalous - s.anomalous).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gutzwiller state JSON round trip") {
  const int n_max = 4, d = n_max + 1;
  MatrixXcd rho = MatrixXcd::Zero(d, d);
  rho(0, 0) = 0.25;
  rho(2, 2) = 0.75;
  rho(0, 2) = cplx(0.1, -0.3);
  rho(2, 0) = std::conj(rho(0, 2));
  GutzwillerState s = GutzwillerState::uniform(rho, 3, n_max);
  GutzwillerState back =
      io::gutzwiller_state_from_json(io::gutzwiller_state_to_json(s));
  REQUIRE(back.n_sites() == 3);
  CHECK(back.n_max == n_max);
  for (int i = 0; i < 3; ++i)
    CHECK((back.rhos[i] - rho).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("format_double round-trips values exactly") {
  for (double v : {0.1, -3.0, 1e-17, 2.0 + std::sqrt(2.0), 5.38}) {
    CHECK(std::stod(io::format_double(v)) == v);
  }
}

TEST_CASE("trajectory CSV writers produce one row per site and sample") {
  Trajectory traj;
  traj.center = 0;
  for (int k = 0; k < 3; ++k) {
    traj.times.push_back(0.5 * k);
    traj.profiles.push_back(VectorXcd::Constant(2, cplx(1, -1)));
    traj.occupations.push_back(VectorXd::Constant(2, 2.0));
  }
  const char* path = "io_test.tmp.csv";
  io::write_moment_trajectory_csv(path, traj);
  std::ifstream in(path);
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 1 + 3 * 2);
  std::remove(path);
}
