#pragma once

#include "ddbh/model.hpp"

#include <vector>

namespace ddbh::measurement {

/// Momentum-space moments on the grid k_m = 2 pi m / N (units of 1/d),
/// obtained with the unitary transform a_k = N^{-1/2} sum_n e^{-i k n} a_n.
struct MomentumCorrelators {
  VectorXd k_grid;
  VectorXcd first_k;       // <a_k>
  MatrixXcd normal_k;      // <a_k^dag a_k'>
  MatrixXcd anomalous_k;   // <a_k a_k'>
};

/// Requires periodic boundary conditions.
MomentumCorrelators to_momentum(const CorrelationState& s,
                                const ModelParams& p);
CorrelationState from_momentum(const MomentumCorrelators& m);

/// f(a_k, a_k'^dag) = <a_k a_k'^dag> - <a_k><a_k'^dag>, rows indexed by k and
/// columns by k'. The anti-normal pair is read from the stored normal matrix;
/// with include_commutator_offset the delta_kk' from [a, a^dag] = 1 is kept,
/// otherwise the matrix is exactly zero on factorized states.
MatrixXcd connected_correlator(const CorrelationState& s,
                               bool include_commutator_offset = false);

struct LineConstants {
  double coupling = 1.0;  // Gamma
  double velocity = 1.0;  // v
  double spacing = 1.0;   // d
};

/// Vacuum-input output-field correlator <r_out^{+k dag}(t1) r_out^{+k'}(t2)>
/// = (1/d^2) (Gamma v / (N sqrt(k k'))) e^{i v (k t1 - k' t2)/d} <a_k^dag a_k'>.
/// Right-movers only: k, k' > 0.
cplx output_field_correlator(cplx normal_k_entry, double k, double k_prime,
                             double t1, double t2, int n_sites,
                             const LineConstants& c = {});

struct RectangleRow {
  double omega = 0;
  cplx exact;          // sum_n e^{-i (omega/v - k/d) x_n}
  double rectangle = 0;
};

/// Lattice sum against its rectangle approximation (height N, half-width
/// pi/N around omega/v = k/d).
std::vector<RectangleRow> rectangle_sum_check(int n_sites, double k,
                                              const std::vector<double>& omega_grid,
                                              double v = 1.0, double d = 1.0);

/// sin(y pi / N) / (y pi / N): the factor controlling the rectangle
/// approximation's accuracy.
double sinc_factor(double y, int n_sites);

}  // namespace ddbh::measurement
