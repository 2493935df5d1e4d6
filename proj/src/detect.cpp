#include "ddbh/detect.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace ddbh {

const char* to_string(SteadyStatus s) {
  switch (s) {
    case SteadyStatus::steady: return "steady";
    case SteadyStatus::periodic: return "periodic";
    case SteadyStatus::transient: return "transient";
    default: return "diverged";
  }
}

const char* to_string(ModeLabel m) {
  switch (m) {
    case ModeLabel::homogeneous: return "homogeneous";
    case ModeLabel::ripple: return "ripple";
    case ModeLabel::stationary_soliton: return "stationary_soliton";
    case ModeLabel::oscillating_soliton: return "oscillating_soliton";
    default: return "unknown";
  }
}

ModeLabel mode_label_from_string(const std::string& s) {
  for (ModeLabel m : {ModeLabel::homogeneous, ModeLabel::ripple,
                      ModeLabel::stationary_soliton,
                      ModeLabel::oscillating_soliton, ModeLabel::unknown})
    if (s == to_string(m)) return m;
  throw std::invalid_argument("unknown mode label '" + s + "'");
}

EngineResult run_trajectory(const Dopri5::Rhs& rhs, const VectorXcd& y0,
                            int n_sites, const ProfileFn& profile_of,
                            const OccupationFn& occupations_of, double horizon,
                            const DetectOptions& opt, bool early_exit,
                            double wall_cap_seconds) {
  if (horizon <= 0) throw std::invalid_argument("t_end must be > 0");
  const int center = opt.center >= 0 ? opt.center : n_sites / 2;
  if (center < 0 || center >= n_sites)
    throw std::invalid_argument("center site out of range");

  const auto wall_start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         wall_start)
        .count();
  };

  Dopri5 rk(rhs, opt.rk);
  rk.reset(0.0, y0);

  EngineResult out;
  Trajectory& traj = out.trajectory;
  traj.center = center;

  auto push_sample = [&](double t, const VectorXcd& y) {
    traj.times.push_back(t);
    traj.profiles.push_back(profile_of(y));
    if (occupations_of) traj.occupations.push_back(occupations_of(y));
  };
  push_sample(0.0, rk.state());

  auto g_of = [&](const VectorXcd& y, const VectorXcd& dy) {
    // d|a_c|^2/dt; profile_of is linear, so it maps dy to the profile rate
    const cplx a = profile_of(y)(center);
    const cplx da = profile_of(dy)(center);
    return 2.0 * std::real(std::conj(a) * da);
  };

  // Locate the zero of d|a_c|^2/dt inside (t_a, t_b] by bisection with a
  // moving base point; positive_at_a is the derivative sign at t_a.
  auto refine_extremum = [&](double t_a, VectorXcd y_a, double t_b,
                             bool positive_at_a) {
    double lo = t_a, hi = t_b;
    VectorXcd y_lo = std::move(y_a);
    for (int it = 0; it < 60 && hi - lo > 1e-10; ++it) {
      double mid = 0.5 * (lo + hi);
      Dopri5 sub(rhs, opt.rk);
      sub.reset(lo, y_lo);
      if (!sub.advance_to(mid)) break;
      bool positive = g_of(sub.state(), sub.derivative()) > 0;
      if (positive == positive_at_a) {
        lo = mid;
        y_lo = sub.state();
      } else {
        hi = mid;
      }
    }
    return std::make_pair(lo, y_lo);
  };

  const long lag = std::lround(opt.steady_dt / opt.sample_dt);
  double g_prev = g_of(rk.state(), rk.derivative());
  double t_prev = 0.0;
  VectorXcd y_prev = rk.state();

  bool armed = false;
  double last_height = std::numeric_limits<double>::quiet_NaN();
  bool have_prev_max = false;
  double prev_max_t = 0;
  VectorXcd prev_max_profile;
  bool verdict_set = false;

  for (long k = 1;; ++k) {
    double t_next = k * opt.sample_dt;
    bool last_sample = false;
    if (t_next >= horizon - 1e-12) {
      t_next = horizon;
      last_sample = true;
    }
    if (!rk.advance_to(t_next)) {
      traj.status = RunStatus::step_underflow;
      traj.fail_time = rk.t();
      break;
    }
    const VectorXcd& y = rk.state();
    push_sample(t_next, y);

    if (!y.allFinite() ||
        traj.profiles.back().cwiseAbs().maxCoeff() > opt.overflow_guard) {
      traj.status = RunStatus::diverged;
      traj.fail_time = t_next;
      break;
    }

    if (early_exit && t_next >= opt.burn_in + opt.steady_dt &&
        static_cast<long>(traj.profiles.size()) > lag) {
      const VectorXcd& old =
          traj.profiles[traj.profiles.size() - 1 - static_cast<size_t>(lag)];
      double residual = (traj.profiles.back() - old).cwiseAbs().sum();
      if (residual <= opt.steady_tol) {
        out.verdict.status = SteadyStatus::steady;
        out.verdict.residual = residual;
        verdict_set = true;
        break;
      }
    }

    if (opt.track_events) {
      const double g_now = g_of(y, rk.derivative());
      if (t_next >= opt.burn_in && g_prev > 0 && g_now <= 0) {
        // |a_c| maximum inside (t_prev, t_next]
        const double h_prev =
            std::norm(traj.profiles[traj.profiles.size() - 2](center));
        const double tau = g_prev * (t_next - t_prev) / (g_prev - g_now);
        const double height = h_prev + 0.5 * g_prev * tau;
        if (!armed && std::isfinite(last_height) &&
            std::abs(height - last_height) <=
                opt.event_arm_tol * (1.0 + std::abs(height)))
          armed = true;
        last_height = height;

        if (armed) {
          auto [t_star, y_star] = refine_extremum(t_prev, y_prev, t_next, true);
          traj.events.push_back({t_star, true, profile_of(y_star)});
          if (have_prev_max) {
            double dist = (traj.events.back().profile - prev_max_profile)
                              .cwiseAbs()
                              .sum();
            if (early_exit && dist <= opt.steady_tol) {
              VectorXd max_prof = traj.events.back().profile.cwiseAbs();
              VectorXd min_prof = max_prof;
              for (auto it = traj.events.rbegin(); it != traj.events.rend();
                   ++it)
                if (!it->is_max && it->t > prev_max_t && it->t < t_star) {
                  min_prof = it->profile.cwiseAbs();
                  break;
                }
              if (max_prof(center) - min_prof(center) <
                  opt.periodic_amp_floor) {
                // a dying oscillation: the state is steady for all purposes
                out.verdict.status = SteadyStatus::steady;
                out.verdict.residual = dist;
              } else {
                out.verdict.status = SteadyStatus::periodic;
                out.verdict.residual = dist;
                out.verdict.period = t_star - prev_max_t;
                out.verdict.extremal_profiles = {min_prof, max_prof};
              }
              out.representative_y = y_star;
              verdict_set = true;
            }
          }
          have_prev_max = true;
          prev_max_t = t_star;
          prev_max_profile = traj.events.back().profile;
          if (verdict_set) break;
        }
      } else if (t_next >= opt.burn_in && armed && g_prev < 0 && g_now >= 0) {
        auto [t_star, y_star] = refine_extremum(t_prev, y_prev, t_next, false);
        traj.events.push_back({t_star, false, profile_of(y_star)});
      }
      g_prev = g_now;
    }

    t_prev = t_next;
    y_prev = y;

    if (last_sample) break;
    if (wall_cap_seconds > 0 && elapsed() > wall_cap_seconds) {
      out.hit_wall_cap = true;
      break;
    }
  }

  out.final_y = rk.state();
  if (out.representative_y.size() == 0) out.representative_y = out.final_y;

  if (!verdict_set) {
    if (traj.status != RunStatus::ok) {
      out.verdict.status = SteadyStatus::diverged;
    } else if (!early_exit &&
               traj.times.back() - traj.times.front() >= opt.steady_dt) {
      out.verdict = detect_steady(traj, opt.steady_dt, opt.steady_tol);
    } else {
      out.verdict.status = SteadyStatus::transient;
      if (static_cast<long>(traj.profiles.size()) > lag)
        out.verdict.residual =
            (traj.profiles.back() -
             traj.profiles[traj.profiles.size() - 1 - static_cast<size_t>(lag)])
                .cwiseAbs()
                .sum();
    }
  }
  out.wall_seconds = elapsed();
  return out;
}

SteadyVerdict detect_steady(const Trajectory& traj, double dt_window,
                            double tol) {
  SteadyVerdict v;
  if (traj.status != RunStatus::ok) {
    v.status = SteadyStatus::diverged;
    return v;
  }
  if (traj.times.size() < 2)
    throw std::invalid_argument("trajectory too short for the steady window");
  const double t_end = traj.times.back();
  long idx = -1;
  for (long i = static_cast<long>(traj.times.size()) - 1; i >= 0; --i)
    if (traj.times[i] <= t_end - dt_window + 1e-9) {
      idx = i;
      break;
    }
  if (idx < 0)
    throw std::invalid_argument("trajectory too short for the steady window");

  v.residual = (traj.profiles.back() - traj.profiles[idx]).cwiseAbs().sum();
  if (v.residual <= tol) {
    v.status = SteadyStatus::steady;
    return v;
  }
  return detect_periodic(traj, tol);
}

namespace {

// quadratic (3-point Lagrange) interpolation of the sampled profiles
VectorXcd interp_profile(const Trajectory& traj, size_t i, double t) {
  const double t0 = traj.times[i - 1], t1 = traj.times[i],
               t2 = traj.times[i + 1];
  const double l0 = (t - t1) * (t - t2) / ((t0 - t1) * (t0 - t2));
  const double l1 = (t - t0) * (t - t2) / ((t1 - t0) * (t1 - t2));
  const double l2 = (t - t0) * (t - t1) / ((t2 - t0) * (t2 - t1));
  return l0 * traj.profiles[i - 1] + l1 * traj.profiles[i] +
         l2 * traj.profiles[i + 1];
}

// parabola vertex through three samples of |a_c|
double grid_extremum_time(const Trajectory& traj, size_t i, int center) {
  const double v0 = std::abs(traj.profiles[i - 1](center));
  const double v1 = std::abs(traj.profiles[i](center));
  const double v2 = std::abs(traj.profiles[i + 1](center));
  const double denom = v0 - 2 * v1 + v2;
  const double dt = traj.times[i + 1] - traj.times[i];
  if (denom == 0) return traj.times[i];
  double shift = std::clamp(0.5 * (v0 - v2) / denom, -1.0, 1.0);
  return traj.times[i] + shift * dt;
}

}  // namespace

SteadyVerdict detect_periodic(const Trajectory& traj, double tol) {
  SteadyVerdict v;
  if (traj.status != RunStatus::ok) {
    v.status = SteadyStatus::diverged;
    return v;
  }

  constexpr double kAmpFloor = 1e-5;  // below this the cycle is a dead ringer
                                      // for a steady state

  std::vector<const ExtremumEvent*> maxima;
  for (const auto& e : traj.events)
    if (e.is_max) maxima.push_back(&e);
  if (maxima.size() >= 2) {
    const auto* m1 = maxima[maxima.size() - 2];
    const auto* m2 = maxima.back();
    v.residual = (m2->profile - m1->profile).cwiseAbs().sum();
    if (v.residual <= tol) {
      VectorXd max_prof = m2->profile.cwiseAbs();
      VectorXd min_prof = max_prof;
      for (auto it = traj.events.rbegin(); it != traj.events.rend(); ++it)
        if (!it->is_max && it->t > m1->t && it->t < m2->t) {
          min_prof = it->profile.cwiseAbs();
          break;
        }
      if (max_prof(traj.center) - min_prof(traj.center) < kAmpFloor) {
        v.status = SteadyStatus::steady;
        return v;
      }
      v.status = SteadyStatus::periodic;
      v.period = m2->t - m1->t;
      v.extremal_profiles = {min_prof, max_prof};
    }
    return v;
  }

  // grid fallback on |a_c(t)| samples
  const int c = traj.center;
  std::vector<size_t> max_idx, min_idx;
  for (size_t i = 1; i + 1 < traj.profiles.size(); ++i) {
    const double v0 = std::abs(traj.profiles[i - 1](c));
    const double v1 = std::abs(traj.profiles[i](c));
    const double v2 = std::abs(traj.profiles[i + 1](c));
    if (v1 > v0 && v1 > v2) max_idx.push_back(i);
    if (v1 < v0 && v1 < v2) min_idx.push_back(i);
  }
  if (max_idx.size() < 3) return v;  // too few extrema: stays transient

  const size_t i1 = max_idx[max_idx.size() - 2], i2 = max_idx.back();
  const double t1 = grid_extremum_time(traj, i1, c);
  const double t2 = grid_extremum_time(traj, i2, c);
  VectorXcd p1 = interp_profile(traj, i1, t1);
  VectorXcd p2 = interp_profile(traj, i2, t2);
  v.residual = (p2 - p1).cwiseAbs().sum();
  if (v.residual > tol) return v;

  VectorXd max_prof = p2.cwiseAbs();
  VectorXd min_prof = max_prof;
  for (auto it = min_idx.rbegin(); it != min_idx.rend(); ++it)
    if (*it > i1 && *it < i2) {
      double tm = grid_extremum_time(traj, *it, c);
      min_prof = interp_profile(traj, *it, tm).cwiseAbs();
      break;
    }
  if (max_prof(c) - min_prof(c) < kAmpFloor) {
    v.status = SteadyStatus::steady;
    return v;
  }
  v.status = SteadyStatus::periodic;
  v.period = t2 - t1;
  v.extremal_profiles = {min_prof, max_prof};
  return v;
}

VectorXd classification_profile(const SteadyVerdict& verdict,
                                const Trajectory& traj) {
  if (verdict.status == SteadyStatus::periodic && verdict.extremal_profiles)
    return 0.5 * (verdict.extremal_profiles->first +
                  verdict.extremal_profiles->second);
  if (traj.profiles.empty()) throw std::invalid_argument("empty trajectory");
  return traj.profiles.back().cwiseAbs();
}

namespace {

int circular_distance(int a, int b, int n) {
  int d = std::abs(a - b);
  return std::min(d, n - d);
}

}  // namespace

ModeLabel classify_mode(const SteadyVerdict& verdict, const VectorXd& profile) {
  if (verdict.status != SteadyStatus::steady &&
      verdict.status != SteadyStatus::periodic)
    return ModeLabel::unknown;
  const int n = static_cast<int>(profile.size());
  const double range = profile.maxCoeff() - profile.minCoeff();
  if (range < 1e-5) return ModeLabel::homogeneous;

  // peaks must clear half the profile range: a soliton background curving
  // gently around the ring is not a second maximum
  const double prominence = profile.minCoeff() + 0.5 * range;

  int n_peaks = 0;
  int peak_site = 0;
  for (int i = 0; i < n; ++i) {
    const double l = profile((i + n - 1) % n), r = profile((i + 1) % n);
    if (profile(i) > l && profile(i) > r && profile(i) > prominence) {
      ++n_peaks;
      if (profile(i) >= profile(peak_site)) peak_site = i;
    }
  }

  auto localized = [&] {
    // flat background far from the single peak
    double bg_lo = std::numeric_limits<double>::infinity(), bg_hi = 0;
    int n_bg = 0;
    for (int i = 0; i < n; ++i)
      if (circular_distance(i, peak_site, n) > n / 4) {
        bg_lo = std::min(bg_lo, profile(i));
        bg_hi = std::max(bg_hi, profile(i));
        ++n_bg;
      }
    return n_bg > 0 && (bg_hi - bg_lo) < 0.25 * range;
  };

  if (verdict.status == SteadyStatus::periodic)
    return (n_peaks == 1 && localized()) ? ModeLabel::oscillating_soliton
                                         : ModeLabel::unknown;
  if (n_peaks >= 2) return ModeLabel::ripple;
  if (n_peaks == 1 && localized()) return ModeLabel::stationary_soliton;
  return ModeLabel::unknown;
}

}  // namespace ddbh
