#include "ddbh/soe.hpp"

#include "ddbh/dnls.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace ddbh;

namespace {

// ---- independent test oracles --------------------------------------------

struct OracleOp {
  bool create = false;
  int site = 0;
};

cplx oracle_avg(const OracleOp& o, const CorrelationState& s) {
  return o.create ? std::conj(s.first(o.site)) : s.first(o.site);
}

// written from the operator algebra, not from the production lookup:
// <a_i^dag a_j^dag> = conj(<a_j a_i>), <a_i a_j^dag> = <a_j^dag a_i> + delta
cplx oracle_pair(const OracleOp& x, const OracleOp& y,
                 const CorrelationState& s) {
  if (!x.create && !y.create) return s.anomalous(x.site, y.site);
  if (x.create && y.create) return std::conj(s.anomalous(y.site, x.site));
  if (x.create && !y.create) return s.normal(x.site, y.site);
  return s.normal(y.site, x.site) + (x.site == y.site ? 1.0 : 0.0);
}

cplx closure_oracle(const std::array<OracleOp, 4>& ops,
                    const CorrelationState& s) {
  cplx total(0, 0);
  for (int j = 0; j < 4; ++j)
    for (int k = j + 1; k < 4; ++k) {
      int rest[2], m = 0;
      for (int i = 0; i < 4; ++i)
        if (i != j && i != k) rest[m++] = i;
      total += oracle_pair(ops[j], ops[k], s) * oracle_avg(ops[rest[0]], s) *
               oracle_avg(ops[rest[1]], s);
    }
  cplx prod(1, 0);
  for (const auto& o : ops) prod *= oracle_avg(o, s);
  return total - 5.0 * prod;
}

CorrelationState random_state(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  auto rc = [&] { return cplx(nd(rng), nd(rng)); };
  CorrelationState s = CorrelationState::zero(n);
  for (int i = 0; i < n; ++i) s.first(i) = rc();
  MatrixXcd b(n, n), d(n, n);
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < n; ++r) {
      b(r, c) = rc();
      d(r, c) = rc();
    }
  s.normal = (b * b.adjoint()) / double(n);
  s.anomalous = 0.5 * (d + d.transpose());
  return s;
}

soe::OpLabel to_label(const OracleOp& o) {
  return o.create ? soe::cre(o.site) : soe::ann(o.site);
}

// the moment equations transcribed one-for-one, all fourth moments through
// the public closure; an independent route to the production right-hand side
CorrelationState reference_rhs(const CorrelationState& s,
                               const ModelParams& p) {
  const int N = p.n_sites;
  const double J = p.hopping, U = p.interaction, A = p.drive,
               dw = p.detuning, g = p.loss;
  const cplx mi(0, -1);
  using soe::ann;
  using soe::closure_fourth;
  using soe::cre;

  auto phi = [&](int n) { return s.first(n); };
  auto M = [&](int l, int n) { return s.normal(l, n); };
  auto S = [&](int l, int n) { return s.anomalous(l, n); };
  auto nb = [&](int n) { return neighbors(n, p); };

  CorrelationState d = CorrelationState::zero(N);
  for (int n = 0; n < N; ++n) {
    cplx hop(0, 0);
    if (nb(n).left) hop += phi(*nb(n).left);
    if (nb(n).right) hop += phi(*nb(n).right);
    cplx third = 2.0 * M(n, n) * phi(n) + S(n, n) * std::conj(phi(n)) -
                 2.0 * phi(n) * phi(n) * std::conj(phi(n));
    d.first(n) =
        mi * (cplx(dw, -0.5 * g) * phi(n) + A - J * hop + U * third);
  }
  for (int l = 0; l < N; ++l)
    for (int n = 0; n < N; ++n) {
      cplx hop(0, 0);
      if (nb(l).left) hop += M(*nb(l).left, n);
      if (nb(l).right) hop += M(*nb(l).right, n);
      if (nb(n).left) hop -= M(l, *nb(n).left);
      if (nb(n).right) hop -= M(l, *nb(n).right);
      cplx f1 = closure_fourth({cre(l), cre(n), ann(n), ann(n)}, s);
      cplx f2 = closure_fourth({cre(l), cre(l), ann(l), ann(n)}, s);
      d.normal(l, n) = mi * (cplx(0, -g) * M(l, n) +
                             A * (std::conj(phi(l)) - phi(n)) + J * hop +
                             U * (f1 - f2));
    }
  for (int l = 0; l < N; ++l)
    for (int n = 0; n < N; ++n) {
      cplx hop(0, 0);
      if (nb(l).left) hop += S(*nb(l).left, n);
      if (nb(l).right) hop += S(*nb(l).right, n);
      if (nb(n).left) hop += S(l, *nb(n).left);
      if (nb(n).right) hop += S(l, *nb(n).right);
      cplx g1 = closure_fourth({cre(l), ann(l), ann(l), ann(n)}, s);
      cplx g2 = closure_fourth({cre(n), ann(n), ann(n), ann(l)}, s);
      cplx u_term = g1 + g2 + (l == n ? S(n, n) : cplx(0, 0));
      d.anomalous(l, n) =
          mi * (cplx(2 * dw, -g) * S(l, n) + A * (phi(l) + phi(n)) -
                J * hop + U * u_term);
    }
  return d;
}

}  // namespace

TEST_CASE("closure on a factorized state with unit means gives 6 - 5 = 1") {
  VectorXcd phi = VectorXcd::Constant(3, cplx(1, 0));
  CorrelationState s = CorrelationState::factorized(phi);
  cplx v = soe::closure_fourth(
      {soe::cre(0), soe::cre(1), soe::ann(1), soe::ann(1)}, s);
  CHECK(std::abs(v - cplx(1, 0)) < 1e-14);
}

TEST_CASE("closure vanishes when all means vanish") {
  CorrelationState s = CorrelationState::zero(3);
  s.anomalous(1, 2) = s.anomalous(2, 1) = cplx(0.7, -0.3);
  s.normal(1, 1) = 0.4;
  cplx v = soe::closure_fourth(
      {soe::cre(1), soe::cre(2), soe::ann(2), soe::ann(2)}, s);
  CHECK(std::abs(v) == 0.0);
}

TEST_CASE("closure matches the brute-force pairing oracle on random states") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> site(0, 3), kind(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    CorrelationState s = random_state(4, rng);
    std::array<OracleOp, 4> ops;
    for (auto& o : ops) o = {kind(rng) == 1, site(rng)};
    cplx got = soe::closure_fourth(
        {to_label(ops[0]), to_label(ops[1]), to_label(ops[2]),
         to_label(ops[3])},
        s);
    cplx want = closure_oracle(ops, s);
    CHECK(std::abs(got - want) <= 1e-13 * std::max(1.0, std::abs(want)));
  }
}

TEST_CASE("closure rejects out-of-range sites") {
  CorrelationState s = CorrelationState::zero(2);
  CHECK_THROWS_AS(soe::closure_fourth(
                      {soe::cre(0), soe::cre(2), soe::ann(0), soe::ann(0)}, s),
                  std::invalid_argument);
}

TEST_CASE("rhs agrees with the transcribed moment equations") {
  std::mt19937_64 rng(23);
  for (Boundary bc : {Boundary::periodic, Boundary::open}) {
    ModelParams p = star_params(5, 0.8);
    p.boundary = bc;
    for (int trial = 0; trial < 10; ++trial) {
      CorrelationState s = random_state(5, rng);
      CorrelationState got = soe::rhs(s, p);
      CorrelationState want = reference_rhs(s, p);
      CHECK((got.first - want.first).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((got.normal - want.normal).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((got.anomalous - want.anomalous).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("rhs preserves the storage symmetries exactly") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    CorrelationState s = random_state(6, rng);
    CorrelationState d = soe::rhs(s, star_params(6, 1.3));
    CHECK(d.symmetry_defect() == 0.0);
    // diagonal carries only rounding-level imaginary junk
    CHECK(d.hermiticity_defect() < 1e-13);
    for (int l = 0; l < 6; ++l)
      for (int n = l + 1; n < 6; ++n)
        CHECK(d.normal(n, l) == std::conj(d.normal(l, n)));
  }
}

TEST_CASE("first-moment rhs on factorized states reduces to the DNLS") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> nd;
  ModelParams p = star_params(7, 1.1);
  for (int trial = 0; trial < 100; ++trial) {
    VectorXcd phi(7);
    for (int n = 0; n < 7; ++n) phi(n) = cplx(nd(rng), nd(rng));
    CorrelationState s = CorrelationState::factorized(phi);
    VectorXcd got = soe::rhs(s, p).first;
    VectorXcd want = dnls::rhs(phi, p);
    CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("vacuum is a fixed point without drive") {
  ModelParams p = star_params(4, 0.9);
  p.drive = 0.0;
  CorrelationState d = soe::rhs(CorrelationState::zero(4), p);
  CHECK(d.first.cwiseAbs().maxCoeff() == 0.0);
  CHECK(d.normal.cwiseAbs().maxCoeff() == 0.0);
  CHECK(d.anomalous.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("translation equivariance under periodic boundary conditions") {
  std::mt19937_64 rng(37);
  ModelParams p = star_params(6, 0.7);
  CorrelationState s = random_state(6, rng);

  auto shift_state = [](const CorrelationState& in) {
    const int n = in.n_sites();
    CorrelationState out = CorrelationState::zero(n);
    for (int i = 0; i < n; ++i) out.first((i + 1) % n) = in.first(i);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) {
        out.normal((r + 1) % n, (c + 1) % n) = in.normal(r, c);
        out.anomalous((r + 1) % n, (c + 1) % n) = in.anomalous(r, c);
      }
    return out;
  };

  CorrelationState a = soe::rhs(shift_state(s), p);
  CorrelationState b = shift_state(soe::rhs(s, p));
  CHECK((a.first - b.first).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((a.normal - b.normal).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((a.anomalous - b.anomalous).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("homogeneous states keep a site-independent derivative") {
  ModelParams p = star_params(5, 1.6);
  VectorXcd phi = VectorXcd::Constant(5, cplx(0.4, -0.2));
  CorrelationState s = CorrelationState::factorized(phi);
  CorrelationState d = soe::rhs(s, p);
  for (int n = 1; n < 5; ++n) {
    CHECK(std::abs(d.first(n) - d.first(0)) < 1e-15);
    CHECK(std::abs(d.normal(n, n) - d.normal(0, 0)) < 1e-15);
    CHECK(std::abs(d.anomalous(n, n) - d.anomalous(0, 0)) < 1e-15);
  }
}

TEST_CASE("closed linear lattice conserves total occupation") {
  // gamma = A = U = 0: sum_n <a_n^dag a_n> is a constant of motion
  ModelParams p;
  p.n_sites = 5;
  p.hopping = 0.8;
  p.detuning = 2.0;
  std::mt19937_64 rng(41);
  CorrelationState s0 = random_state(5, rng);

  auto res = soe::integrate(s0, p, 10.0);
  REQUIRE(res.trajectory.status == RunStatus::ok);
  const double n0 = s0.normal.diagonal().real().sum();
  const double n1 = res.final_state.normal.diagonal().real().sum();
  CHECK(std::abs(n1 - n0) < 1e-7);
  CHECK(res.final_state.hermiticity_defect() < 1e-10);
  CHECK(res.final_state.symmetry_defect() < 1e-12);
}

TEST_CASE("J = 0 star point: a unique attractor for the single site") {
  ModelParams p = star_params(1, 0.0);
  std::mt19937_64 rng(43);
  std::normal_distribution<double> nd;

  soe::SettleOptions opt;
  opt.t_max = 200;
  std::vector<CorrelationState> finals;
  for (int run = 0; run < 3; ++run) {
    CorrelationState s0 = random_state(1, rng);
    auto res = soe::evolve_until_settled(s0, p, opt);
    REQUIRE(res.verdict.status == SteadyStatus::steady);
    finals.push_back(res.final_state);
  }
  for (size_t i = 1; i < finals.size(); ++i) {
    CHECK(std::abs(finals[i].first(0) - finals[0].first(0)) < 1e-6);
    CHECK(std::abs(finals[i].normal(0, 0) - finals[0].normal(0, 0)) < 1e-6);
    CHECK(std::abs(finals[i].anomalous(0, 0) - finals[0].anomalous(0, 0)) <
          1e-6);
  }
}

TEST_CASE("single-site counting: unique solution at the star point") {
  ModelParams p = star_params(1, 0.0);
  auto res = soe::single_site_count(p);
  CHECK(res.converged > 0);
  CHECK(res.solutions.size() == 1);
  // while the classical cubic is trivalued there
  CHECK(dnls::single_site_intensities(p).size() == 3);
}

TEST_CASE("single-site counting: undriven site has only the vacuum") {
  ModelParams p = star_params(1, 0.0);
  p.drive = 0.0;
  auto res = soe::single_site_count(p);
  CHECK(res.solutions.size() == 1);
  CHECK(std::abs(res.solutions[0].mean) < 1e-8);
  CHECK(std::abs(res.solutions[0].occupation) < 1e-8);
}

TEST_CASE("newton_steady is idempotent on a settled state") {
  ModelParams p = star_params(1, 0.0);
  soe::SettleOptions opt;
  opt.t_max = 200;
  auto settled =
      soe::evolve_until_settled(soe::cold_start_state(p, 0), p, opt);
  REQUIRE(settled.verdict.status == SteadyStatus::steady);

  auto polished = soe::newton_steady(settled.final_state, p);
  CHECK(polished.converged);
  CHECK(polished.residual < 1e-10);
  CHECK(std::abs(polished.state.first(0) - settled.final_state.first(0)) <
        1e-5);
}

TEST_CASE("newton_steady reports a diagnostic instead of hanging") {
  ModelParams p = star_params(3, 2.0);
  std::mt19937_64 rng(47);
  CorrelationState guess = random_state(3, rng);
  soe::NewtonSteadyOptions opt;
  opt.max_iter = 5;
  auto res = soe::newton_steady(guess, p, opt);
  CHECK(res.iterations <= 5);
  CHECK(std::isfinite(res.residual));
}

TEST_CASE("detect_steady: constant trajectory is steady with zero residual") {
  Trajectory traj;
  traj.center = 1;
  VectorXcd prof = VectorXcd::Constant(3, cplx(0.5, 0.5));
  for (int k = 0; k <= 30; ++k) {
    traj.times.push_back(0.1 * k);
    traj.profiles.push_back(prof);
  }
  auto v = soe::detect_steady(traj, 1.0, 1e-7);
  CHECK(v.status == SteadyStatus::steady);
  CHECK(v.residual == 0.0);
}

TEST_CASE("detect_steady: diverged trajectory reports diverged") {
  Trajectory traj;
  traj.status = RunStatus::diverged;
  traj.times = {0.0, 0.1};
  traj.profiles = {VectorXcd::Zero(2), VectorXcd::Zero(2)};
  CHECK(soe::detect_steady(traj).status == SteadyStatus::diverged);
}

TEST_CASE("detect_periodic: manufactured oscillation on the sample grid") {
  // period 2.0 is a multiple of the 0.1 sampling, so consecutive maxima
  // carry bit-identical profiles
  Trajectory traj;
  traj.center = 2;
  const int n = 5;
  const double period = 2.0;
  for (int k = 0; k <= 100; ++k) {
    const double t = 0.1 * k;
    VectorXcd prof(n);
    for (int i = 0; i < n; ++i) {
      const double env = std::exp(-0.5 * (i - 2) * (i - 2));
      prof(i) = env * (1.0 + 0.5 * std::cos(2 * M_PI * t / period));
    }
    traj.times.push_back(t);
    traj.profiles.push_back(prof);
  }
  auto v = soe::detect_periodic(traj, 1e-7);
  REQUIRE(v.status == SteadyStatus::periodic);
  CHECK(std::abs(*v.period - period) < 0.01 * period);
  REQUIRE(v.extremal_profiles.has_value());
  CHECK(v.extremal_profiles->second(2) > v.extremal_profiles->first(2));
}

TEST_CASE("detect_periodic: a steady trajectory makes no periodic claim") {
  Trajectory traj;
  traj.center = 0;
  for (int k = 0; k <= 50; ++k) {
    traj.times.push_back(0.1 * k);
    traj.profiles.push_back(VectorXcd::Constant(2, cplx(1, 0)));
  }
  CHECK(soe::detect_periodic(traj).status == SteadyStatus::transient);
}

TEST_CASE("classify_mode covers the label set") {
  SteadyVerdict steady;
  steady.status = SteadyStatus::steady;
  SteadyVerdict periodic;
  periodic.status = SteadyStatus::periodic;

  VectorXd flat = VectorXd::Constant(30, 0.7);
  CHECK(soe::classify_mode(steady, flat) == ModeLabel::homogeneous);

  VectorXd ripple(30);
  for (int i = 0; i < 30; ++i) ripple(i) = 0.5 + 0.2 * std::cos(2 * M_PI * i / 5.0);
  CHECK(soe::classify_mode(steady, ripple) == ModeLabel::ripple);

  VectorXd soliton = VectorXd::Constant(30, 0.1);
  soliton(15) = 0.7;
  soliton(14) = soliton(16) = 0.3;
  CHECK(soe::classify_mode(steady, soliton) == ModeLabel::stationary_soliton);
  CHECK(soe::classify_mode(periodic, soliton) ==
        ModeLabel::oscillating_soliton);

  SteadyVerdict transient;
  CHECK(soe::classify_mode(transient, soliton) == ModeLabel::unknown);
}

TEST_CASE("integrate rejects inconsistent states") {
  ModelParams p = star_params(3, 0.5);
  CorrelationState bad = CorrelationState::zero(3);
  bad.normal(0, 1) = cplx(1, 0);  // not Hermitian
  CHECK_THROWS_AS(soe::integrate(bad, p, 1.0), std::invalid_argument);
}

TEST_CASE("overflow guard reports divergence") {
  ModelParams p;
  p.n_sites = 2;
  p.drive = 5.0;
  p.loss = 0.01;
  soe::EvolveOptions opt;
  opt.overflow_guard = 10.0;
  auto res = soe::integrate(CorrelationState::zero(2), p, 500.0, opt);
  CHECK(res.trajectory.status == RunStatus::diverged);
  CHECK(res.verdict.status == SteadyStatus::diverged);
}
