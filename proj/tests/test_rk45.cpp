#include "ddbh/rk45.hpp"

#include <doctest.h>

#include <cmath>

using namespace ddbh;

TEST_CASE("exponential decay matches the closed form") {
  Dopri5 rk([](double, const VectorXcd& y, VectorXcd& dy) { dy = -0.7 * y; },
            RkControl{});
  VectorXcd y0(1);
  y0(0) = cplx(2.0, -1.0);
  rk.reset(0.0, y0);
  REQUIRE(rk.advance_to(3.0));
  cplx expect = y0(0) * std::exp(-0.7 * 3.0);
  CHECK(std::abs(rk.state()(0) - expect) < 1e-9);
  CHECK(rk.t() == 3.0);
}

TEST_CASE("rotating phase stays on the unit circle") {
  const double w = 5.0;
  Dopri5 rk(
      [w](double, const VectorXcd& y, VectorXcd& dy) { dy = cplx(0, -w) * y; },
      RkControl{});
  VectorXcd y0(1);
  y0(0) = 1.0;
  rk.reset(0.0, y0);
  REQUIRE(rk.advance_to(20.0));
  cplx expect = std::exp(cplx(0, -w * 20.0));
  CHECK(std::abs(rk.state()(0) - expect) < 1e-7);
  CHECK(std::abs(std::abs(rk.state()(0)) - 1.0) < 1e-7);
}

TEST_CASE("derivative is fresh after a step (FSAL)") {
  Dopri5 rk([](double, const VectorXcd& y, VectorXcd& dy) { dy = -y; },
            RkControl{});
  VectorXcd y0(2);
  y0 << 1.0, cplx(0, 1);
  rk.reset(0.0, y0);
  REQUIRE(rk.advance_to(0.5));
  CHECK((rk.derivative() + rk.state()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("finite-time blow-up reports step underflow") {
  // dy/dt = y^2 from y(0) = 1 blows up at t = 1
  Dopri5 rk(
      [](double, const VectorXcd& y, VectorXcd& dy) {
        dy = y.array().square();
      },
      RkControl{});
  VectorXcd y0(1);
  y0(0) = 1.0;
  rk.reset(0.0, y0);
  CHECK(!rk.advance_to(2.0));
  CHECK(rk.t() > 0.9);
  CHECK(rk.t() < 1.1);
}

TEST_CASE("exact landing on requested times") {
  Dopri5 rk([](double, const VectorXcd& y, VectorXcd& dy) { dy = -y; },
            RkControl{});
  VectorXcd y0(1);
  y0(0) = 1.0;
  rk.reset(0.0, y0);
  for (int k = 1; k <= 10; ++k) {
    REQUIRE(rk.advance_to(0.3 * k));
    CHECK(rk.t() == 0.3 * k);
  }
}
