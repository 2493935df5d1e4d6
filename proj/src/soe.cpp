#include "ddbh/soe.hpp"

#include "ddbh/dnls.hpp"

#include <algorithm>
#include <cmath>

namespace ddbh::soe {

cplx mean_moment(const OpLabel& a, const CorrelationState& s) {
  if (a.site < 0 || a.site >= s.n_sites())
    throw std::invalid_argument("operator site out of range");
  return a.kind == OpKind::annihilate ? s.first(a.site)
                                      : std::conj(s.first(a.site));
}

cplx pair_moment(const OpLabel& a, const OpLabel& b,
                 const CorrelationState& s) {
  if (a.site < 0 || a.site >= s.n_sites() || b.site < 0 ||
      b.site >= s.n_sites())
    throw std::invalid_argument("operator site out of range");
  const bool a_cre = a.kind == OpKind::create;
  const bool b_cre = b.kind == OpKind::create;
  if (!a_cre && !b_cre) return s.anomalous(a.site, b.site);
  if (a_cre && b_cre) return std::conj(s.anomalous(a.site, b.site));
  if (a_cre) return s.normal(a.site, b.site);
  // <a_i a_j^dag> = <a_j^dag a_i> + delta_ij
  return s.normal(b.site, a.site) + (a.site == b.site ? 1.0 : 0.0);
}

cplx closure_fourth(const std::array<OpLabel, 4>& ops,
                    const CorrelationState& s) {
  static constexpr int kPairs[6][4] = {
      // j, k, l, m with j < k and {l, m} the complement, l < m
      {0, 1, 2, 3}, {0, 2, 1, 3}, {0, 3, 1, 2},
      {1, 2, 0, 3}, {1, 3, 0, 2}, {2, 3, 0, 1},
  };
  cplx acc(0, 0);
  for (const auto& q : kPairs)
    acc += pair_moment(ops[q[0]], ops[q[1]], s) * mean_moment(ops[q[2]], s) *
           mean_moment(ops[q[3]], s);
  acc -= 5.0 * mean_moment(ops[0], s) * mean_moment(ops[1], s) *
         mean_moment(ops[2], s) * mean_moment(ops[3], s);
  return acc;
}

CorrelationState rhs(const CorrelationState& s, const ModelParams& p) {
  const int N = p.n_sites;
  if (s.n_sites() != N || s.normal.rows() != N || s.anomalous.rows() != N)
    throw std::invalid_argument("soe: state size does not match n_sites");

  const double J = p.hopping, U = p.interaction, A = p.drive,
               dw = p.detuning, g = p.loss;
  const cplx mi(0.0, -1.0);

  // neighbor index tables, -1 for a missing neighbor on open chains
  std::vector<int> left(N), right(N);
  for (int n = 0; n < N; ++n) {
    auto nb = neighbors(n, p);
    left[n] = nb.left ? *nb.left : -1;
    right[n] = nb.right ? *nb.right : -1;
  }

  const VectorXcd& phi = s.first;
  const MatrixXcd& M = s.normal;
  const MatrixXcd& S = s.anomalous;

  CorrelationState d = CorrelationState::zero(N);

  for (int n = 0; n < N; ++n) {
    cplx hop(0, 0);
    if (left[n] >= 0) hop += phi(left[n]);
    if (right[n] >= 0) hop += phi(right[n]);
    // the closure of <a^dag a a> folded into the first-moment equation
    cplx third = 2.0 * M(n, n) * phi(n) + S(n, n) * std::conj(phi(n)) -
                 2.0 * phi(n) * phi(n) * std::conj(phi(n));
    cplx val = cplx(dw, -0.5 * g) * phi(n) + A - J * hop + U * third;
    d.first(n) = mi * val;
  }

  // d<a_l^dag a_n>/dt for l <= n; the lower triangle is the mirror image
  for (int n = 0; n < N; ++n) {
    for (int l = 0; l <= n; ++l) {
      cplx hop(0, 0);
      if (left[l] >= 0) hop += M(left[l], n);
      if (right[l] >= 0) hop += M(right[l], n);
      if (left[n] >= 0) hop -= M(l, left[n]);
      if (right[n] >= 0) hop -= M(l, right[n]);

      // closure of <a_l^dag a_n^dag a_n a_n> and <a_l^dag a_l^dag a_l a_n>
      cplx f1 = std::conj(S(l, n)) * phi(n) * phi(n) +
                2.0 * M(l, n) * std::conj(phi(n)) * phi(n) +
                2.0 * M(n, n) * std::conj(phi(l)) * phi(n) +
                S(n, n) * std::conj(phi(l)) * std::conj(phi(n)) -
                5.0 * std::conj(phi(l)) * std::conj(phi(n)) * phi(n) * phi(n);
      cplx f2 = std::conj(S(l, l)) * phi(l) * phi(n) +
                2.0 * M(l, l) * std::conj(phi(l)) * phi(n) +
                2.0 * M(l, n) * std::conj(phi(l)) * phi(l) +
                S(l, n) * std::conj(phi(l)) * std::conj(phi(l)) -
                5.0 * std::conj(phi(l)) * std::conj(phi(l)) * phi(l) * phi(n);

      cplx val = cplx(0.0, -g) * M(l, n) +
                 A * (std::conj(phi(l)) - phi(n)) + J * hop + U * (f1 - f2);
      d.normal(l, n) = mi * val;
      if (l != n) d.normal(n, l) = std::conj(d.normal(l, n));
    }
  }

  // d<a_l a_n>/dt for l <= n; symmetric by construction
  for (int n = 0; n < N; ++n) {
    for (int l = 0; l <= n; ++l) {
      cplx hop(0, 0);
      if (left[l] >= 0) hop += S(left[l], n);
      if (right[l] >= 0) hop += S(right[l], n);
      if (left[n] >= 0) hop += S(l, left[n]);
      if (right[n] >= 0) hop += S(l, right[n]);

      // closure of <a_l^dag a_l a_l a_n> and <a_n^dag a_n a_n a_l>
      cplx g1 = 2.0 * M(l, l) * phi(l) * phi(n) + M(l, n) * phi(l) * phi(l) +
                S(l, l) * std::conj(phi(l)) * phi(n) +
                2.0 * S(l, n) * std::conj(phi(l)) * phi(l) -
                5.0 * std::conj(phi(l)) * phi(l) * phi(l) * phi(n);
      cplx g2 = 2.0 * M(n, n) * phi(n) * phi(l) + M(n, l) * phi(n) * phi(n) +
                S(n, n) * std::conj(phi(n)) * phi(l) +
                2.0 * S(n, l) * std::conj(phi(n)) * phi(n) -
                5.0 * std::conj(phi(n)) * phi(n) * phi(n) * phi(l);
      cplx u_term = g1 + g2;
      if (l == n) u_term += S(n, n);

      cplx val = cplx(2.0 * dw, -g) * S(l, n) + A * (phi(l) + phi(n)) -
                 J * hop + U * u_term;
      d.anomalous(l, n) = mi * val;
      d.anomalous(n, l) = d.anomalous(l, n);
    }
  }

  return d;
}

namespace {

void validate_state(const CorrelationState& s, const ModelParams& p) {
  if (s.n_sites() != p.n_sites)
    throw std::invalid_argument("state size does not match n_sites");
  if (!s.first.allFinite() || !s.normal.allFinite() ||
      !s.anomalous.allFinite())
    throw std::invalid_argument("state has non-finite entries");
  if (s.hermiticity_defect() > 1e-6)
    throw std::invalid_argument("normal matrix is not Hermitian to tolerance");
  if (s.symmetry_defect() > 1e-6)
    throw std::invalid_argument("anomalous matrix is not symmetric");
}

EvolveResult evolve_impl(const CorrelationState& s0, const ModelParams& p,
                         double horizon, const EvolveOptions& opt,
                         bool early_exit, double wall_cap_seconds) {
  validate_state(s0, p);
  const int N = p.n_sites;

  auto rhs_fn = [p](double, const VectorXcd& y, VectorXcd& dy) {
    dy = rhs(CorrelationState::unpack(y, p.n_sites), p).pack();
  };
  ProfileFn profile_of = [N](const VectorXcd& y) -> VectorXcd {
    return y.head(N);
  };
  OccupationFn occupations_of = [N](const VectorXcd& y) {
    VectorXd occ(N);
    for (int n = 0; n < N; ++n) occ(n) = y(N + n * (n + 1) / 2 + n).real();
    return occ;
  };

  EngineResult er = run_trajectory(rhs_fn, s0.pack(), N, profile_of,
                                   occupations_of, horizon, opt, early_exit,
                                   wall_cap_seconds);
  EvolveResult out;
  out.trajectory = std::move(er.trajectory);
  out.final_state = CorrelationState::unpack(er.final_y, N);
  out.representative = CorrelationState::unpack(er.representative_y, N);
  out.verdict = er.verdict;
  out.wall_seconds = er.wall_seconds;
  out.hit_wall_cap = er.hit_wall_cap;
  return out;
}

}  // namespace

EvolveResult integrate(const CorrelationState& s0, const ModelParams& p,
                       double t_end, const EvolveOptions& opt) {
  return evolve_impl(s0, p, t_end, opt, false, 0.0);
}

EvolveResult evolve_until_settled(const CorrelationState& s0,
                                  const ModelParams& p,
                                  const SettleOptions& opt) {
  EvolveOptions eo = opt.evolve;
  eo.track_events = true;  // the periodic exit needs refined extrema
  return evolve_impl(s0, p, opt.t_max, eo, true, opt.wall_cap_seconds);
}

SingleSiteCountResult single_site_count(const ModelParams& p,
                                        double newton_tol, double dedup_tol) {
  if (p.n_sites != 1 || p.hopping != 0)
    throw std::invalid_argument(
        "single_site_count requires n_sites = 1 and J = 0");

  using Vec5 = Eigen::Matrix<double, 5, 1>;
  using Mat5 = Eigen::Matrix<double, 5, 5>;

  auto residual = [&](const Vec5& x) -> Vec5 {
    CorrelationState s = CorrelationState::zero(1);
    s.first(0) = cplx(x(0), x(1));
    s.normal(0, 0) = x(2);
    s.anomalous(0, 0) = cplx(x(3), x(4));
    CorrelationState d = rhs(s, p);
    Vec5 f;
    f << d.first(0).real(), d.first(0).imag(), d.normal(0, 0).real(),
        d.anomalous(0, 0).real(), d.anomalous(0, 0).imag();
    return f;
  };

  auto newton = [&](Vec5 x, Vec5& out) -> bool {
    for (int it = 0; it < 80; ++it) {
      Vec5 f = residual(x);
      if (!f.allFinite()) return false;
      if (f.cwiseAbs().maxCoeff() < newton_tol) {
        out = x;
        return true;
      }
      Mat5 jac;
      for (int j = 0; j < 5; ++j) {
        const double h = 1e-7 * std::max(1.0, std::abs(x(j)));
        Vec5 xp = x, xm = x;
        xp(j) += h;
        xm(j) -= h;
        jac.col(j) = (residual(xp) - residual(xm)) / (2 * h);
      }
      Vec5 step = jac.partialPivLu().solve(-f);
      if (!step.allFinite()) return false;
      double base = f.norm(), scale = 1.0;
      Vec5 cand;
      for (int half = 0; half < 5; ++half) {
        cand = x + scale * step;
        if (residual(cand).norm() < 10.0 * base) break;
        scale *= 0.5;
      }
      x = cand;
      if (x.cwiseAbs().maxCoeff() > 1e8) return false;
    }
    return false;
  };

  // amplitude grid spans the classical root range, phases cover the circle
  double i_max = 1.0;
  for (const auto& r : dnls::single_site_intensities(p))
    i_max = std::max(i_max, r.intensity);
  const double r_hi = 2.0 * std::sqrt(i_max);

  SingleSiteCountResult result;
  std::vector<Vec5> found;
  for (int ir = 0; ir < 11; ++ir) {
    for (int ip = 0; ip < 11; ++ip) {
      const double r = r_hi * ir / 10.0;
      const double th = 2.0 * M_PI * ip / 11.0;
      const cplx a = r * std::exp(cplx(0, th));
      Vec5 x;
      x << a.real(), a.imag(), std::norm(a), (a * a).real(), (a * a).imag();
      ++result.starts;
      Vec5 sol;
      if (!newton(x, sol)) continue;
      ++result.converged;
      bool dup = false;
      for (const auto& f : found)
        if ((f - sol).norm() < dedup_tol) dup = true;
      if (!dup) {
        found.push_back(sol);
        result.solutions.push_back(
            {cplx(sol(0), sol(1)), sol(2), cplx(sol(3), sol(4))});
      }
    }
  }
  return result;
}

NewtonSteadyResult newton_steady(const CorrelationState& guess,
                                 const ModelParams& p,
                                 const NewtonSteadyOptions& opt) {
  validate_state(guess, p);
  const int N = p.n_sites;
  const long mc = CorrelationState::packed_size(N);
  const long mr = 2 * mc;

  auto to_real = [&](const VectorXcd& v) {
    Eigen::VectorXd x(mr);
    x.head(mc) = v.real();
    x.tail(mc) = v.imag();
    return x;
  };
  auto to_cplx = [&](const Eigen::VectorXd& x) {
    VectorXcd v(mc);
    v.real() = x.head(mc);
    v.imag() = x.tail(mc);
    return v;
  };
  auto residual = [&](const Eigen::VectorXd& x) {
    CorrelationState s = CorrelationState::unpack(to_cplx(x), N);
    return to_real(rhs(s, p).pack());
  };

  NewtonSteadyResult res;
  Eigen::VectorXd x = to_real(guess.pack());

  for (int it = 0; it <= opt.max_iter; ++it) {
    Eigen::VectorXd f = residual(x);
    res.residual = f.cwiseAbs().maxCoeff();
    res.iterations = it;
    if (!std::isfinite(res.residual)) break;
    if (res.residual < opt.tol) {
      res.converged = true;
      break;
    }
    if (it == opt.max_iter) break;

    Eigen::MatrixXd jac(mr, mr);
    for (long j = 0; j < mr; ++j) {
      const double h = 1e-7 * std::max(1e-2, std::abs(x(j)));
      Eigen::VectorXd xp = x;
      xp(j) += h;
      jac.col(j) = (residual(xp) - f) / h;
    }
    Eigen::VectorXd step = jac.partialPivLu().solve(-f);
    if (!step.allFinite()) break;
    double base = f.norm(), scale = 1.0;
    Eigen::VectorXd cand;
    for (int half = 0; half < 5; ++half) {
      cand = x + scale * step;
      if (residual(cand).norm() < 10.0 * base) break;
      scale *= 0.5;
    }
    x = cand;
  }
  res.state = CorrelationState::unpack(to_cplx(x), N);
  return res;
}

namespace {

int circular_distance(int a, int b, int n) {
  int d = std::abs(a - b);
  return std::min(d, n - d);
}

}  // namespace

VectorXcd localized_perturbation(int n_sites, int center, double magnitude,
                                 std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  VectorXcd out(n_sites);
  const double sigma = 3.0;
  for (int n = 0; n < n_sites; ++n) {
    const int d = circular_distance(n, center, n_sites);
    const double env = std::exp(-0.5 * d * d / (sigma * sigma));
    out(n) = magnitude * env * cplx(nd(rng), nd(rng)) * M_SQRT1_2;
  }
  return out;
}

CorrelationState cold_start_state(const ModelParams& p, int center,
                                  double kick) {
  auto roots = dnls::single_site_intensities(p.single_site());
  cplx background(0, 0);
  for (const auto& r : roots) {
    ClassicalField one(1);
    one(0) = r.amplitude;
    if (dnls::is_stable(dnls::linear_stability(one, p.single_site()))) {
      background = r.amplitude;
      break;  // roots sorted by intensity: lowest stable wins
    }
  }
  VectorXcd phi = VectorXcd::Constant(p.n_sites, background);
  // kick along the background phase, strong enough to reach a localized
  // attractor's basin where one exists
  phi(center) += std::abs(background) > 0
                     ? kick * background / std::abs(background)
                     : cplx(kick, 0);
  return CorrelationState::factorized(phi);
}

}  // namespace ddbh::soe
