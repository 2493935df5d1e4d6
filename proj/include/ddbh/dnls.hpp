#pragma once

#include "ddbh/detect.hpp"
#include "ddbh/model.hpp"
#include "ddbh/rk45.hpp"

#include <optional>
#include <vector>

namespace ddbh::dnls {

using ddbh::SteadyVerdict;
using ddbh::Trajectory;

/// d phi_n / dt = -i [dw phi_n + U |phi_n|^2 phi_n - J (phi_{n+1} + phi_{n-1})
///                    + A] - (gamma/2) phi_n
VectorXcd rhs(const ClassicalField& phi, const ModelParams& p);

using EvolveOptions = ddbh::DetectOptions;

/// Fixed-horizon integration; trajectory profiles are the field itself.
Trajectory integrate(const ClassicalField& phi0, const ModelParams& p,
                     double t_end, const EvolveOptions& opt = {});

struct SettleOptions {
  EvolveOptions evolve{};
  double t_max = 600;
  double wall_cap_seconds = 300;
};

struct SettleResult {
  Trajectory trajectory;
  ClassicalField final_field;
  ClassicalField representative;
  SteadyVerdict verdict;
  double wall_seconds = 0;
  bool hit_wall_cap = false;
};

SettleResult evolve_until_settled(const ClassicalField& phi0,
                                  const ModelParams& p,
                                  const SettleOptions& opt = {});

/// Sum |phi_n|^2 and the conservative-limit energy functional.
double total_norm(const ClassicalField& phi);
double energy(const ClassicalField& phi, const ModelParams& p);

struct SingleSiteRoot {
  double intensity = 0;  // I = |phi|^2
  cplx amplitude;        // phi = -A / (dw + U I - i gamma/2)
};

/// All real nonnegative roots of I [(dw + U I)^2 + gamma^2/4] = A^2 for the
/// decoupled site, sorted by intensity. Requires n_sites = 1 and J = 0.
std::vector<SingleSiteRoot> single_site_intensities(const ModelParams& p);

struct NewtonOptions {
  double tol = 1e-10;  // residual inf-norm
  int max_iter = 100;
};

struct NewtonResult {
  ClassicalField field;
  bool converged = false;
  double residual = 0;
  int iterations = 0;
};

NewtonResult newton_stationary(const ClassicalField& guess,
                               const ModelParams& p,
                               const NewtonOptions& opt = {});

double stationary_residual(const ClassicalField& phi, const ModelParams& p);

/// Real 2N x 2N linearization of the flow about phi, unknowns [Re phi; Im phi].
Eigen::MatrixXd real_jacobian(const ClassicalField& phi, const ModelParams& p);

/// Eigenvalues of the linearization about a stationary field.
VectorXcd linear_stability(const ClassicalField& stationary,
                           const ModelParams& p);

bool is_stable(const VectorXcd& spectrum, double margin = 0.0);

struct BranchPoint {
  double j = 0;
  ClassicalField field;
  bool stable = false;
  double residual = 0;
};

struct StationaryBranch {
  std::vector<BranchPoint> points;
  std::optional<double> failed_at;  // first J where Newton stopped converging
};

/// Continue a stationary solution along j_path, each point seeded by the
/// previous one; refines the branch end by bisection when Newton fails.
StationaryBranch continue_branch(const ClassicalField& seed,
                                 const ModelParams& p,
                                 const std::vector<double>& j_path,
                                 const NewtonOptions& opt = {});

/// J = 0 seed: every site at the lowest stable single-site root, the center
/// site at the highest stable root.
ClassicalField anti_continuous_soliton(const ModelParams& p, int center_site);

}  // namespace ddbh::dnls
