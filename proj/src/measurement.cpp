#include "ddbh/measurement.hpp"

#include <cmath>

namespace ddbh::measurement {

namespace {

// F(m, n) = e^{-i 2 pi m n / N} / sqrt(N)
MatrixXcd dft_matrix(int n) {
  MatrixXcd f(n, n);
  const double w = 2.0 * M_PI / n;
  const double scale = 1.0 / std::sqrt(double(n));
  for (int m = 0; m < n; ++m)
    for (int j = 0; j < n; ++j)
      f(m, j) = scale * std::exp(cplx(0, -w * m * j));
  return f;
}

}  // namespace

MomentumCorrelators to_momentum(const CorrelationState& s,
                                const ModelParams& p) {
  if (p.boundary != Boundary::periodic)
    throw std::invalid_argument(
        "momentum transform requires periodic boundary conditions");
  if (s.n_sites() != p.n_sites)
    throw std::invalid_argument("state size does not match n_sites");
  const int n = s.n_sites();
  const MatrixXcd f = dft_matrix(n);
  const MatrixXcd g = f.conjugate();  // g(m, l) = e^{+i k_m l} / sqrt(N)

  MomentumCorrelators out;
  out.k_grid = VectorXd::LinSpaced(n, 0, 2.0 * M_PI * (n - 1) / n);
  out.first_k = f * s.first;
  out.normal_k = g * s.normal * g.adjoint();
  out.anomalous_k = f * s.anomalous * f.transpose();
  return out;
}

CorrelationState from_momentum(const MomentumCorrelators& m) {
  const int n = static_cast<int>(m.first_k.size());
  const MatrixXcd f = dft_matrix(n);
  const MatrixXcd g = f.conjugate();

  CorrelationState s = CorrelationState::zero(n);
  s.first = f.adjoint() * m.first_k;
  s.normal = g.adjoint() * m.normal_k * g;
  s.anomalous = f.adjoint() * m.anomalous_k * f.conjugate();
  return s;
}

MatrixXcd connected_correlator(const CorrelationState& s,
                               bool include_commutator_offset) {
  const int n = s.n_sites();
  // connected part in real space first, so a factorized state gives an
  // exactly zero matrix before the (linear) transform
  MatrixXcd connected(n, n);
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < n; ++r)
      connected(r, c) = s.normal(r, c) - std::conj(s.first(r)) * s.first(c);

  const MatrixXcd g = dft_matrix(n).conjugate();
  MatrixXcd ck = g * connected * g.adjoint();  // <a_k^dag a_k'>_c

  MatrixXcd f = ck.transpose();  // f(k, k') needs <a_k a_k'^dag>_c
  if (include_commutator_offset)
    f += MatrixXcd::Identity(n, n);
  return f;
}

cplx output_field_correlator(cplx normal_k_entry, double k, double k_prime,
                             double t1, double t2, int n_sites,
                             const LineConstants& c) {
  if (k <= 0 || k_prime <= 0)
    throw std::invalid_argument("right-mover momenta must be positive");
  if (c.coupling <= 0 || c.velocity <= 0 || c.spacing <= 0 || n_sites < 1)
    throw std::invalid_argument("line constants must be positive");
  const double pref = c.coupling * c.velocity /
                      (n_sites * std::sqrt(k * k_prime) * c.spacing * c.spacing);
  const cplx phase =
      std::exp(cplx(0, c.velocity * (k * t1 - k_prime * t2) / c.spacing));
  return pref * phase * normal_k_entry;
}

std::vector<RectangleRow> rectangle_sum_check(int n_sites, double k,
                                              const std::vector<double>& omega_grid,
                                              double v, double d) {
  if (n_sites < 2) throw std::invalid_argument("need at least two sites");
  std::vector<RectangleRow> rows;
  rows.reserve(omega_grid.size());
  const double half_width = M_PI / n_sites;  // delta: 2 delta = 2 pi / N
  for (double omega : omega_grid) {
    const double theta = (omega / v - k / d) * d;  // phase per site
    cplx acc(0, 0);
    for (int n = 0; n < n_sites; ++n) acc += std::exp(cplx(0, -theta * n));
    rows.push_back({omega, acc,
                    std::abs(theta) < half_width ? double(n_sites) : 0.0});
  }
  return rows;
}

double sinc_factor(double y, int n_sites) {
  const double z = y * M_PI / n_sites;
  return z == 0 ? 1.0 : std::sin(z) / z;
}

}  // namespace ddbh::measurement
