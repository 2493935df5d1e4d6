#pragma once

#include <Eigen/Dense>

#include <complex>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ddbh {

using cplx = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

enum class Boundary { periodic, open };
enum class Tier { dnls, soe, gutzwiller };

Boundary boundary_from_string(const std::string& s);
Tier tier_from_string(const std::string& s);
const char* to_string(Boundary b);
const char* to_string(Tier t);

/// Detuning applied when the default schedule is active.
inline double schedule_detuning(double hopping) { return 3.0 + 2.0 * hopping; }

/// Dimensionless constants of the driven-dissipative Bose-Hubbard chain.
/// All rates are in units of a reference frequency (hbar = 1).
struct ModelParams {
  int n_sites = 1;
  double hopping = 0.0;      // J >= 0
  double interaction = 0.0;  // U
  double drive = 0.0;        // A >= 0
  double detuning = 0.0;     // delta_omega
  double loss = 0.0;         // gamma >= 0
  bool detuning_schedule = false;  // delta_omega = 3 + 2 J
  Boundary boundary = Boundary::periodic;

  void validate() const;

  /// Copy with new hopping; reapplies the detuning schedule if active.
  ModelParams at_hopping(double j) const;

  /// Copy restricted to a single decoupled site (n_sites = 1, J = 0).
  ModelParams single_site() const;
};

/// Default working point: U = -1, A = 2, gamma = 2, scheduled detuning.
ModelParams star_params(int n_sites, double hopping);

struct SiteNeighbors {
  std::optional<int> left, right;
};

SiteNeighbors neighbors(int site, const ModelParams& p);

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Key/value config -> validated parameters. Model keys: n_sites, j, u, a,
/// gamma, delta_omega, detuning_schedule, boundary. Run-level keys (tier,
/// t_end, rel_tol, abs_tol, ...) may be present and are ignored here.
ModelParams build_params(const std::map<std::string, std::string>& config);

/// Flat "key = value" text, '#' starts a comment.
std::map<std::string, std::string> read_config_file(const std::string& path);

/// Classical field: one complex amplitude per site.
using ClassicalField = VectorXcd;

void check_field(const ClassicalField& field, const ModelParams& p);

/// First and second moments of the lattice state.
/// normal(l,n) = <a_l^dag a_n> (Hermitian), anomalous(l,n) = <a_l a_n>
/// (symmetric). The diagonal of normal may transiently lose positivity under
/// the second-order closure; that is diagnosed, not rejected.
struct CorrelationState {
  VectorXcd first;
  MatrixXcd normal;
  MatrixXcd anomalous;

  int n_sites() const { return static_cast<int>(first.size()); }

  static CorrelationState zero(int n);
  /// Moments of a product coherent state with amplitudes phi.
  static CorrelationState factorized(const VectorXcd& phi);

  /// Packed layout: first moments, then the upper triangles (l <= n) of the
  /// normal and anomalous matrices, column by column.
  static int packed_size(int n) { return n + n * (n + 1); }
  VectorXcd pack() const;
  static CorrelationState unpack(const VectorXcd& v, int n);

  double hermiticity_defect() const;  // max |normal(l,n) - conj(normal(n,l))|
  double symmetry_defect() const;     // max |anomalous(l,n) - anomalous(n,l)|
  double min_occupation() const;      // min over Re normal(n,n)
};

/// Product of per-site density matrices in a truncated Fock space.
struct GutzwillerState {
  std::vector<MatrixXcd> rhos;
  int n_max = 0;

  int n_sites() const { return static_cast<int>(rhos.size()); }
  int dim() const { return n_max + 1; }

  static GutzwillerState uniform(const MatrixXcd& rho, int n_sites, int n_max);

  VectorXcd pack() const;
  static GutzwillerState unpack(const VectorXcd& v, int n_sites, int n_max);

  double max_trace_defect() const;  // max_n |tr rho_n - 1|
  double max_hermiticity_defect() const;
  double top_level_population() const;  // max_n Re rho_n(n_max, n_max)
  void symmetrize();                    // rho <- (rho + rho^dag) / 2
};

}  // namespace ddbh
