#include "ddbh/gutzwiller.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ddbh::gutzwiller {

FockOperators FockOperators::build(int n_max) {
  if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
  const int d = n_max + 1;
  FockOperators ops;
  ops.a = MatrixXcd::Zero(d, d);
  for (int m = 1; m <= n_max; ++m) ops.a(m - 1, m) = std::sqrt(double(m));
  ops.a_dag = ops.a.adjoint();
  ops.n = ops.a_dag * ops.a;
  ops.interaction = ops.a_dag * ops.a_dag * ops.a * ops.a;
  return ops;
}

MatrixXcd coherent_state_rho(cplx alpha, int n_max) {
  const double mean_n = std::norm(alpha);
  if (mean_n >= n_max)
    throw std::invalid_argument("coherent amplitude exceeds the truncation");
  const int d = n_max + 1;
  VectorXcd ket(d);
  // amplitudes alpha^m / sqrt(m!) built recursively; overall exp(-|a|^2/2)
  // cancels in the final renormalization
  ket(0) = 1.0;
  for (int m = 1; m <= n_max; ++m)
    ket(m) = ket(m - 1) * alpha / std::sqrt(double(m));
  ket /= ket.norm();
  return ket * ket.adjoint();
}

cplx site_mean(const MatrixXcd& rho, const FockOperators& ops) {
  // tr(rho a) = sum_m sqrt(m) rho(m, m-1)
  cplx acc(0, 0);
  const int d = static_cast<int>(rho.rows());
  for (int m = 1; m < d; ++m) acc += ops.a(m - 1, m) * rho(m, m - 1);
  return acc;
}

double site_occupation(const MatrixXcd& rho, const FockOperators& ops) {
  return (rho * ops.n).trace().real();
}

GutzwillerState rhs(const GutzwillerState& s, const ModelParams& p) {
  if (s.n_sites() != p.n_sites)
    throw std::invalid_argument("state size does not match n_sites");
  const FockOperators ops = FockOperators::build(s.n_max);
  const cplx mi(0.0, -1.0);

  VectorXcd means(p.n_sites);
  for (int n = 0; n < p.n_sites; ++n) means(n) = site_mean(s.rhos[n], ops);

  const MatrixXcd h_local = p.detuning * ops.n +
                            p.drive * (ops.a_dag + ops.a) +
                            0.5 * p.interaction * ops.interaction;

  GutzwillerState d;
  d.n_max = s.n_max;
  d.rhos.resize(p.n_sites);
  for (int n = 0; n < p.n_sites; ++n) {
    cplx neighbor_mean(0, 0);
    auto nb = neighbors(n, p);
    if (nb.left) neighbor_mean += means(*nb.left);
    if (nb.right) neighbor_mean += means(*nb.right);

    MatrixXcd h = h_local - p.hopping * (std::conj(neighbor_mean) * ops.a +
                                         neighbor_mean * ops.a_dag);
    const MatrixXcd& rho = s.rhos[n];
    MatrixXcd out = mi * (h * rho - rho * h);
    if (p.loss != 0) {
      MatrixXcd n_rho = ops.n * rho;
      out += p.loss * (ops.a * rho * ops.a_dag -
                       0.5 * (n_rho + n_rho.adjoint()));
    }
    d.rhos[n] = std::move(out);
  }
  return d;
}

namespace {

void validate_state(const GutzwillerState& s, const ModelParams& p) {
  if (s.n_sites() != p.n_sites)
    throw std::invalid_argument("state size does not match n_sites");
  if (s.max_hermiticity_defect() > 1e-6)
    throw std::invalid_argument("density matrices not Hermitian to tolerance");
  if (s.max_trace_defect() > 1e-6)
    throw std::invalid_argument("density matrices not unit trace");
}

}  // namespace

Trajectory evolve(const GutzwillerState& s0, const ModelParams& p,
                  double t_end, const EvolveOptions& opt) {
  validate_state(s0, p);
  if (t_end <= 0) throw std::invalid_argument("t_end must be > 0");
  const int N = p.n_sites;
  const int n_max = s0.n_max;
  const FockOperators ops = FockOperators::build(n_max);

  auto rhs_fn = [&p, N, n_max](double, const VectorXcd& y, VectorXcd& dy) {
    dy = rhs(GutzwillerState::unpack(y, N, n_max), p).pack();
  };
  Dopri5 rk(rhs_fn, opt.rk);
  rk.reset(0.0, s0.pack());

  Trajectory traj;
  auto sample = [&](double t, const GutzwillerState& st) {
    traj.times.push_back(t);
    VectorXd occ(N);
    VectorXcd mean(N);
    double top = 0;
    for (int n = 0; n < N; ++n) {
      occ(n) = site_occupation(st.rhos[n], ops);
      mean(n) = site_mean(st.rhos[n], ops);
      top = std::max(top, st.rhos[n](n_max, n_max).real());
    }
    traj.occupations.push_back(occ);
    traj.means.push_back(mean);
    traj.top_populations.push_back(top);
    traj.max_top_population = std::max(traj.max_top_population, top);
  };
  sample(0.0, s0);

  double next_snapshot = opt.snapshot_dt > 0 ? opt.snapshot_dt : t_end;
  const long n_samples = std::lround(std::ceil(t_end / opt.sample_dt - 1e-12));
  for (long k = 1; k <= n_samples; ++k) {
    const double t_next = std::min(k * opt.sample_dt, t_end);
    if (!rk.advance_to(t_next)) {
      traj.status = RunStatus::step_underflow;
      traj.fail_time = rk.t();
      break;
    }
    GutzwillerState st = GutzwillerState::unpack(rk.state(), N, n_max);
    // drift suppression: symmetrize at output samples, then restart FSAL
    st.symmetrize();
    rk.reset(rk.t(), st.pack());
    sample(t_next, st);
    if (!std::isfinite(traj.occupations.back().sum())) {
      traj.status = RunStatus::diverged;
      traj.fail_time = t_next;
      break;
    }
    if (opt.snapshot_dt > 0 && t_next >= next_snapshot - 1e-9) {
      traj.snapshots.push_back(st);
      traj.snapshot_times.push_back(t_next);
      next_snapshot += opt.snapshot_dt;
    }
    if (k == n_samples && (traj.snapshot_times.empty() ||
                           traj.snapshot_times.back() < t_next)) {
      traj.snapshots.push_back(st);
      traj.snapshot_times.push_back(t_next);
    }
  }
  if (traj.snapshots.empty()) {
    traj.snapshots.push_back(GutzwillerState::unpack(rk.state(), N, n_max));
    traj.snapshot_times.push_back(rk.t());
  }
  traj.truncation_valid = traj.max_top_population < opt.truncation_threshold;
  return traj;
}

ContrastSeries localization_contrast(const Trajectory& traj, int center,
                                     int reference, double slope_threshold) {
  ContrastSeries out;
  const size_t m = traj.times.size();
  out.times = traj.times;
  out.contrast.resize(m);
  for (size_t i = 0; i < m; ++i)
    out.contrast[i] = traj.occupations[i](center) - traj.occupations[i](reference);
  if (m < 3) return out;

  // end of the fast initial drop: first time the contrast decay rate falls
  // below slope_threshold (skipping the very first samples)
  size_t i_plateau = m - 1;
  for (size_t i = 1; i + 1 < m; ++i) {
    if (traj.times[i] < 0.25) continue;
    const double slope = (out.contrast[i + 1] - out.contrast[i - 1]) /
                         (traj.times[i + 1] - traj.times[i - 1]);
    if (slope > -slope_threshold) {
      i_plateau = i;
      break;
    }
  }
  out.plateau_time = traj.times[i_plateau];
  out.plateau = out.contrast[i_plateau];
  out.plateau_center_occupation = traj.occupations[i_plateau](center);

  if (out.plateau <= 0) {
    out.half_life = out.first_crossing = out.plateau_time;
    return out;
  }

  out.first_crossing = traj.times.back();
  bool crossed = false;
  for (size_t i = i_plateau; i < m; ++i) {
    if (out.contrast[i] < 0.5 * out.plateau) {
      out.first_crossing = traj.times[i];
      crossed = true;
      break;
    }
  }

  // exponential fit of the decaying tail: the window ends where the contrast
  // sinks into the noise floor and starts at half of that time (or at the
  // plateau, whichever is later)
  size_t i_last = i_plateau;
  const double floor = std::max(1e-3 * out.plateau, 1e-9);
  for (size_t i = i_plateau; i < m; ++i)
    if (out.contrast[i] > floor) i_last = i;
  const double t_a = std::max(out.plateau_time, 0.5 * traj.times[i_last]);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  long n_fit = 0;
  for (size_t i = i_plateau; i <= i_last; ++i) {
    if (traj.times[i] < t_a || out.contrast[i] <= 0) continue;
    const double x = traj.times[i], y = std::log(out.contrast[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n_fit;
  }
  const double denom = n_fit * sxx - sx * sx;
  const double slope = denom > 0 ? (n_fit * sxy - sx * sy) / denom : 0.0;
  if (n_fit >= 8 && slope < 0) {
    out.tail_rate = -slope;
    out.half_life = out.plateau_time + std::numbers::ln2 / out.tail_rate;
  } else {
    // flat or growing tail: survival exceeds the trajectory
    out.half_life = traj.times.back();
    out.censored = !crossed;
  }
  return out;
}

MatrixXcd homogeneous_background(const ModelParams& p, int n_max, double t_max,
                                 double tol) {
  // single site driving itself through the mean-field term
  ModelParams self = p;
  self.n_sites = 1;
  self.boundary = Boundary::periodic;  // both neighbors wrap to the site

  const FockOperators ops = FockOperators::build(n_max);
  GutzwillerState st = GutzwillerState::uniform(
      coherent_state_rho(cplx(0, 0), n_max), 1, n_max);

  EvolveOptions opt;
  opt.sample_dt = 1.0;
  const double chunk = 25.0;
  for (double t = 0; t < t_max; t += chunk) {
    Trajectory traj = evolve(st, self, chunk, opt);
    if (traj.status != RunStatus::ok)
      throw std::runtime_error("homogeneous background evolution failed");
    st = traj.final_state();
    GutzwillerState d = rhs(st, self);
    double drift = 0;
    for (const auto& m : d.rhos) drift = std::max(drift, m.cwiseAbs().maxCoeff());
    if (drift < tol) {
      GutzwillerState clean = st;
      clean.symmetrize();
      return clean.rhos[0];
    }
  }
  throw std::runtime_error(
      "homogeneous background did not converge within t_max");
}

SettleResult evolve_until_settled(const GutzwillerState& s0,
                                  const ModelParams& p,
                                  const ddbh::DetectOptions& opt,
                                  double t_max, double wall_cap_seconds) {
  validate_state(s0, p);
  const int N = p.n_sites;
  const int n_max = s0.n_max;
  const int d = n_max + 1;
  const FockOperators ops = FockOperators::build(n_max);

  auto rhs_fn = [&p, N, n_max](double, const VectorXcd& y, VectorXcd& dy) {
    dy = rhs(GutzwillerState::unpack(y, N, n_max), p).pack();
  };
  ProfileFn profile_of = [N, d, ops](const VectorXcd& y) {
    VectorXcd out(N);
    for (int n = 0; n < N; ++n) {
      Eigen::Map<const MatrixXcd> rho(y.data() + static_cast<long>(n) * d * d,
                                      d, d);
      out(n) = site_mean(rho, ops);
    }
    return out;
  };
  OccupationFn occupations_of = [N, d, ops](const VectorXcd& y) {
    VectorXd out(N);
    for (int n = 0; n < N; ++n) {
      Eigen::Map<const MatrixXcd> rho(y.data() + static_cast<long>(n) * d * d,
                                      d, d);
      out(n) = site_occupation(rho, ops);
    }
    return out;
  };

  ddbh::DetectOptions eo = opt;
  eo.track_events = true;
  EngineResult er = run_trajectory(rhs_fn, s0.pack(), N, profile_of,
                                   occupations_of, t_max, eo, true,
                                   wall_cap_seconds);
  SettleResult out;
  out.trajectory = std::move(er.trajectory);
  out.final_state = GutzwillerState::unpack(er.final_y, N, n_max);
  out.representative = GutzwillerState::unpack(er.representative_y, N, n_max);
  out.verdict = er.verdict;
  out.wall_seconds = er.wall_seconds;
  out.hit_wall_cap = er.hit_wall_cap;
  return out;
}

GutzwillerState kick_protocol_initial(const ModelParams& p, int n_max,
                                      int center, double target_occupation) {
  MatrixXcd bg = homogeneous_background(p, n_max);
  GutzwillerState st = GutzwillerState::uniform(bg, p.n_sites, n_max);

  const FockOperators ops = FockOperators::build(n_max);
  cplx bg_mean = site_mean(bg, ops);
  double phase = (std::abs(bg_mean) > 0) ? std::arg(bg_mean) : 0.0;
  cplx alpha = std::sqrt(target_occupation) * std::exp(cplx(0, phase));
  st.rhos[center] = coherent_state_rho(alpha, n_max);
  return st;
}

}  // namespace ddbh::gutzwiller
