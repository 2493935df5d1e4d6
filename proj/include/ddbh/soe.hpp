#pragma once

#include "ddbh/detect.hpp"
#include "ddbh/model.hpp"
#include "ddbh/rk45.hpp"

#include <array>
#include <random>
#include <vector>

namespace ddbh::soe {

using ddbh::classification_profile;
using ddbh::classify_mode;
using ddbh::detect_periodic;
using ddbh::detect_steady;
using ddbh::ModeLabel;
using ddbh::SteadyStatus;
using ddbh::SteadyVerdict;
using ddbh::Trajectory;

enum class OpKind { annihilate, create };

struct OpLabel {
  OpKind kind = OpKind::annihilate;
  int site = 0;
};

inline OpLabel ann(int site) { return {OpKind::annihilate, site}; }
inline OpLabel cre(int site) { return {OpKind::create, site}; }

/// <A> for a single operator label.
cplx mean_moment(const OpLabel& a, const CorrelationState& s);

/// <A B> with the written operator order. Anti-normal pairs <a a^dag> are
/// mapped to stored entries through [a_i, a_j^dag] = delta_ij.
cplx pair_moment(const OpLabel& a, const OpLabel& b, const CorrelationState& s);

/// Fourth-moment truncation: the sum over the six ordered pairs
/// <A_j A_k><A_l><A_m> minus 5 <A_1><A_2><A_3><A_4>, operator order preserved
/// inside each retained pair.
cplx closure_fourth(const std::array<OpLabel, 4>& ops,
                    const CorrelationState& s);

/// Closed equations of motion for the first and second moments; every fourth
/// moment is replaced by the closure. Hermitian/symmetric storage is
/// preserved exactly (lower triangles mirror the computed uppers).
CorrelationState rhs(const CorrelationState& s, const ModelParams& p);

using EvolveOptions = ddbh::DetectOptions;

struct EvolveResult {
  Trajectory trajectory;
  CorrelationState final_state;
  /// State at the last refined maximum for periodic runs, else final_state.
  CorrelationState representative;
  SteadyVerdict verdict;
  double wall_seconds = 0;
  bool hit_wall_cap = false;
};

/// Fixed-horizon integration; the verdict is evaluated on the finished
/// trajectory.
EvolveResult integrate(const CorrelationState& s0, const ModelParams& p,
                       double t_end, const EvolveOptions& opt = {});

struct SettleOptions {
  EvolveOptions evolve{};
  double t_max = 600;
  double wall_cap_seconds = 300;
};

/// Integrate until the steady or periodic criterion fires, or t_max / the
/// wall-clock cap is reached (verdict transient in that case).
EvolveResult evolve_until_settled(const CorrelationState& s0,
                                  const ModelParams& p,
                                  const SettleOptions& opt = {});

struct SingleSiteSolution {
  cplx mean;
  double occupation = 0;
  cplx anomalous;
};

struct SingleSiteCountResult {
  std::vector<SingleSiteSolution> solutions;
  int starts = 0;
  int converged = 0;
};

/// Multistart Newton on the 5-real-unknown stationarity system of the
/// decoupled site. Requires n_sites = 1 and J = 0. A result with
/// converged == 0 signals that no start converged.
SingleSiteCountResult single_site_count(const ModelParams& p,
                                        double newton_tol = 1e-11,
                                        double dedup_tol = 1e-6);

struct NewtonSteadyOptions {
  double tol = 1e-10;  // residual inf-norm on the packed derivative
  int max_iter = 40;
};

struct NewtonSteadyResult {
  CorrelationState state;
  bool converged = false;
  double residual = 0;
  int iterations = 0;
};

/// Newton-Raphson on d/dt = 0 over the packed real unknowns. May legitimately
/// fail to converge; the result always reports the last residual.
NewtonSteadyResult newton_steady(const CorrelationState& guess,
                                 const ModelParams& p,
                                 const NewtonSteadyOptions& opt = {});

/// Complex Gaussian noise with a site-local envelope around center.
VectorXcd localized_perturbation(int n_sites, int center, double magnitude,
                                 std::mt19937_64& rng);

/// Homogeneous background at the lowest stable classical root plus a center
/// kick, as a factorized moment state.
CorrelationState cold_start_state(const ModelParams& p, int center,
                                  double kick = 2.0);

}  // namespace ddbh::soe
