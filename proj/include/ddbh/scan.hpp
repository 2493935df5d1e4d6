#pragma once

#include "ddbh/detect.hpp"
#include "ddbh/model.hpp"
#include "ddbh/soe.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ddbh::scan {

struct PhaseRecord {
  double j = 0;
  Tier tier = Tier::soe;
  ModeLabel label = ModeLabel::unknown;
  SteadyStatus status = SteadyStatus::transient;
  double residual = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> period;
  double center_amp = 0;  // |a_c| of the classification profile
  double center_amp_max = 0, center_amp_min = 0;  // periodic branches
  VectorXd profile;  // classification profile (heatmap row)
  double elapsed_seconds = 0;
  bool timed_out = false;
};

struct Bifurcation {
  double j_lo = 0, j_hi = 0;
  double estimate = 0;  // midpoint of the refined interval
  ModeLabel from = ModeLabel::unknown, to = ModeLabel::unknown;
};

struct JScanOptions {
  uint64_t seed = 42;
  double perturbation = 1e-3;
  bool cold_start = false;  // fresh initial state at every point
  soe::SettleOptions settle{};
  int n_max = 15;                // gutzwiller tier: Fock truncation
  double kick_occupation = 8.8;  // gutzwiller tier: center kick
  bool refine_bifurcations = true;
  double bifurcation_dj = 0.01;
  std::string checkpoint_dir;  // empty: checkpointing off
  std::function<void(const PhaseRecord&)> on_point;
};

struct JScanResult {
  std::vector<PhaseRecord> records;
  std::vector<Bifurcation> bifurcations;
};

/// Phase scan over j_values. Adiabatic mode (default, j_values monotone in
/// either direction) seeds each point with the previous converged state plus
/// a localized random perturbation; it follows branches through their whole
/// stability window, including metastable ripple branches that coexist with
/// the soliton. Cold-start mode reruns the homogeneous-background + center
/// kick at every point and therefore maps out where localized attractors
/// exist. Label changes become bifurcation intervals, refined by bisection
/// to bifurcation_dj (cold mode bisects with cold midpoints, adiabatic mode
/// carries the predecessor-side state).
JScanResult scan_j(const ModelParams& tmpl, const std::vector<double>& j_values,
                   Tier tier, const JScanOptions& opt = {});

struct UaCell {
  double u = 0, a = 0;
  int dnls_count = 0;
  int soe_count = -1;  // -1: not computed for this tier
  bool resolved = true;
};

/// Single-site solution counts over a (U, A) grid at J = 0. The DNLS count is
/// always computed; the SOE multistart count is added unless tier == dnls.
std::vector<UaCell> scan_ua(const std::vector<double>& u_values,
                            const std::vector<double>& a_values, Tier tier,
                            const ModelParams& tmpl, int n_threads = 0);

std::string phase_records_csv(const std::vector<PhaseRecord>& records);
std::string heatmap_csv(const std::vector<PhaseRecord>& records);
std::string bifurcations_csv(const std::vector<Bifurcation>& bifurcations);
std::string ua_grid_csv(const std::vector<UaCell>& cells);

/// "lo:hi:step" or a comma-separated list.
std::vector<double> parse_range(const std::string& spec);

}  // namespace ddbh::scan
