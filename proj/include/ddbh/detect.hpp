#pragma once

#include "ddbh/model.hpp"
#include "ddbh/rk45.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace ddbh {

struct ExtremumEvent {
  double t = 0;
  bool is_max = false;
  VectorXcd profile;  // site amplitudes <a_n> at the refined extremum
};

/// Sampled site-resolved trajectory shared by the approximation tiers.
/// profiles hold the complex per-site amplitudes (the classical field or the
/// first moments); occupations are filled where the tier provides them.
struct Trajectory {
  std::vector<double> times;
  std::vector<VectorXcd> profiles;
  std::vector<VectorXd> occupations;
  std::vector<ExtremumEvent> events;  // refined center-site |a_c| extrema
  int center = 0;
  RunStatus status = RunStatus::ok;
  double fail_time = 0;
};

enum class SteadyStatus { steady, periodic, transient, diverged };
const char* to_string(SteadyStatus s);

struct SteadyVerdict {
  SteadyStatus status = SteadyStatus::transient;
  double residual = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> period;
  /// |a_n| site profiles at (t_min, t_max) of the center-site oscillation.
  std::optional<std::pair<VectorXd, VectorXd>> extremal_profiles;
};

struct DetectOptions {
  RkControl rk{};
  double sample_dt = 0.1;
  double overflow_guard = 1e6;
  double steady_tol = 1e-7;
  double steady_dt = 1.0;  // window of the steady-state criterion
  double burn_in = 20.0;
  int center = -1;  // -1: n_sites / 2
  /// Refined extremum tracking; needed for the online periodic criterion and
  /// forced on by the settle drivers.
  bool track_events = false;
  /// Relative stability of consecutive |a_c| maxima heights that switches on
  /// the refined-extremum comparison.
  double event_arm_tol = 1e-4;
  /// A repeating cycle whose center-site amplitude contrast stays below this
  /// floor is a steady state reached through a dying oscillation, not a
  /// periodic mode.
  double periodic_amp_floor = 1e-5;
};

struct EngineResult {
  Trajectory trajectory;
  VectorXcd final_y;
  VectorXcd representative_y;  // at the last refined maximum when periodic
  SteadyVerdict verdict;
  double wall_seconds = 0;
  bool hit_wall_cap = false;
};

using ProfileFn = std::function<VectorXcd(const VectorXcd&)>;
using OccupationFn = std::function<VectorXd(const VectorXcd&)>;

/// Sampled integration with online steady/periodic detection. profile_of maps
/// the integrator state to the per-site amplitude vector and must be linear
/// (it is also applied to state derivatives); occupations_of may be null.
/// With early_exit the run stops as soon as a verdict fires, otherwise it
/// covers [0, horizon] and evaluates the verdict afterwards.
EngineResult run_trajectory(const Dopri5::Rhs& rhs, const VectorXcd& y0,
                            int n_sites, const ProfileFn& profile_of,
                            const OccupationFn& occupations_of, double horizon,
                            const DetectOptions& opt, bool early_exit,
                            double wall_cap_seconds);

/// Steady-state criterion sum_n |a_n(t) - a_n(t + dt)| <= tol on the trailing
/// window; falls through to detect_periodic when it does not hold.
SteadyVerdict detect_steady(const Trajectory& traj, double dt_window = 1.0,
                            double tol = 1e-7);

/// Periodic iff the complex site profiles at two consecutive center-site
/// maxima agree to tol. Refined events take precedence; otherwise grid
/// samples with quadratic refinement are used (needs >= 3 grid maxima).
SteadyVerdict detect_periodic(const Trajectory& traj, double tol = 1e-7);

enum class ModeLabel {
  homogeneous,
  ripple,
  stationary_soliton,
  oscillating_soliton,
  unknown
};
const char* to_string(ModeLabel m);
ModeLabel mode_label_from_string(const std::string& s);

ModeLabel classify_mode(const SteadyVerdict& verdict, const VectorXd& profile);

/// Site-amplitude profile fed to the classifier: |a_n| of the last sample for
/// steady runs, the average of the extremal profiles for periodic ones.
VectorXd classification_profile(const SteadyVerdict& verdict,
                                const Trajectory& traj);

}  // namespace ddbh
