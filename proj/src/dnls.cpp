#include "ddbh/dnls.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace ddbh::dnls {

VectorXcd rhs(const ClassicalField& phi, const ModelParams& p) {
  if (phi.size() != p.n_sites)
    throw std::invalid_argument("dnls: field length does not match n_sites");
  const cplx mi(0.0, -1.0);
  VectorXcd out(p.n_sites);
  for (int n = 0; n < p.n_sites; ++n) {
    cplx hop(0, 0);
    auto nb = neighbors(n, p);
    if (nb.left) hop += phi(*nb.left);
    if (nb.right) hop += phi(*nb.right);
    cplx local = p.detuning * phi(n) +
                 p.interaction * std::norm(phi(n)) * phi(n) -
                 p.hopping * hop + p.drive;
    out(n) = mi * local - 0.5 * p.loss * phi(n);
  }
  return out;
}

namespace {

SettleResult evolve_impl(const ClassicalField& phi0, const ModelParams& p,
                         double horizon, const EvolveOptions& opt,
                         bool early_exit, double wall_cap_seconds) {
  check_field(phi0, p);
  auto rhs_fn = [p](double, const VectorXcd& y, VectorXcd& dy) {
    dy = rhs(y, p);
  };
  ProfileFn profile_of = [](const VectorXcd& y) { return y; };
  EngineResult er = run_trajectory(rhs_fn, phi0, p.n_sites, profile_of,
                                   nullptr, horizon, opt, early_exit,
                                   wall_cap_seconds);
  SettleResult out;
  out.trajectory = std::move(er.trajectory);
  out.final_field = std::move(er.final_y);
  out.representative = std::move(er.representative_y);
  out.verdict = er.verdict;
  out.wall_seconds = er.wall_seconds;
  out.hit_wall_cap = er.hit_wall_cap;
  return out;
}

}  // namespace

Trajectory integrate(const ClassicalField& phi0, const ModelParams& p,
                     double t_end, const EvolveOptions& opt) {
  return evolve_impl(phi0, p, t_end, opt, false, 0.0).trajectory;
}

SettleResult evolve_until_settled(const ClassicalField& phi0,
                                  const ModelParams& p,
                                  const SettleOptions& opt) {
  EvolveOptions eo = opt.evolve;
  eo.track_events = true;  // the periodic exit needs refined extrema
  return evolve_impl(phi0, p, opt.t_max, eo, true, opt.wall_cap_seconds);
}

double total_norm(const ClassicalField& phi) { return phi.squaredNorm(); }

double energy(const ClassicalField& phi, const ModelParams& p) {
  double e = 0;
  for (int n = 0; n < p.n_sites; ++n) {
    e += p.detuning * std::norm(phi(n)) +
         0.5 * p.interaction * std::norm(phi(n)) * std::norm(phi(n)) +
         2.0 * p.drive * phi(n).real();
    // one right-going bond per site; open chains miss the last edge
    auto nb = neighbors(n, p);
    if (nb.right)
      e += -2.0 * p.hopping * std::real(std::conj(phi(n)) * phi(*nb.right));
  }
  return e;
}

std::vector<SingleSiteRoot> single_site_intensities(const ModelParams& p) {
  if (p.n_sites != 1 || p.hopping != 0)
    throw std::invalid_argument(
        "single_site_intensities requires n_sites = 1 and J = 0");

  const double U = p.interaction, A = p.drive, dw = p.detuning, g = p.loss;
  auto amplitude_at = [&](double I) {
    return -A / cplx(dw + U * I, -0.5 * g);
  };

  if (A == 0) return {{0.0, cplx(0, 0)}};

  // I [(dw + U I)^2 + g^2/4] = A^2, expanded in I.
  const double c3 = U * U;
  const double c2 = 2.0 * dw * U;
  const double c1 = dw * dw + 0.25 * g * g;
  const double c0 = -A * A;
  auto poly = [&](double I) { return ((c3 * I + c2) * I + c1) * I + c0; };
  auto dpoly = [&](double I) { return (3 * c3 * I + 2 * c2) * I + c1; };

  std::vector<double> roots;
  if (c3 == 0) {
    if (c2 == 0) {
      if (c1 == 0) return {};  // resonant undamped linear drive: no root
      roots.push_back(-c0 / c1);
    } else {
      double disc = c1 * c1 - 4 * c2 * c0;
      if (disc >= 0) {
        roots.push_back((-c1 + std::sqrt(disc)) / (2 * c2));
        roots.push_back((-c1 - std::sqrt(disc)) / (2 * c2));
      }
    }
  } else {
    Eigen::Matrix3d companion = Eigen::Matrix3d::Zero();
    companion(0, 2) = -c0 / c3;
    companion(1, 0) = 1;
    companion(1, 2) = -c1 / c3;
    companion(2, 1) = 1;
    companion(2, 2) = -c2 / c3;
    Eigen::EigenSolver<Eigen::Matrix3d> es(companion);
    for (int i = 0; i < 3; ++i) {
      cplx r = es.eigenvalues()(i);
      if (std::abs(r.imag()) < 1e-8 * std::max(1.0, std::abs(r)))
        roots.push_back(r.real());
    }
  }

  std::vector<SingleSiteRoot> out;
  for (double I : roots) {
    // polish on the cubic, then keep physical (real, nonnegative) roots
    for (int it = 0; it < 4; ++it) {
      double d = dpoly(I);
      if (d == 0) break;
      I -= poly(I) / d;
    }
    if (!(I > -1e-12)) continue;
    I = std::max(I, 0.0);
    bool dup = false;
    for (const auto& kept : out)
      if (std::abs(kept.intensity - I) < 1e-9) dup = true;
    if (!dup) out.push_back({I, amplitude_at(I)});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.intensity < b.intensity;
  });
  return out;
}

double stationary_residual(const ClassicalField& phi, const ModelParams& p) {
  return rhs(phi, p).cwiseAbs().maxCoeff();
}

Eigen::MatrixXd real_jacobian(const ClassicalField& phi, const ModelParams& p) {
  const int N = p.n_sites;
  const cplx mi(0.0, -1.0);
  // Wirtinger blocks: dF/dphi and dF/dconj(phi)
  MatrixXcd fz = MatrixXcd::Zero(N, N), fzb = MatrixXcd::Zero(N, N);
  for (int n = 0; n < N; ++n) {
    fz(n, n) = mi * (p.detuning + 2.0 * p.interaction * std::norm(phi(n))) -
               0.5 * p.loss;
    fzb(n, n) = mi * p.interaction * phi(n) * phi(n);
    auto nb = neighbors(n, p);
    if (nb.left) fz(n, *nb.left) += cplx(0, 1) * p.hopping;
    if (nb.right) fz(n, *nb.right) += cplx(0, 1) * p.hopping;
  }
  Eigen::MatrixXd jac(2 * N, 2 * N);
  jac.topLeftCorner(N, N) = (fz + fzb).real();
  jac.topRightCorner(N, N) = -(fz - fzb).imag();
  jac.bottomLeftCorner(N, N) = (fz + fzb).imag();
  jac.bottomRightCorner(N, N) = (fz - fzb).real();
  return jac;
}

NewtonResult newton_stationary(const ClassicalField& guess,
                               const ModelParams& p, const NewtonOptions& opt) {
  check_field(guess, p);
  const int N = p.n_sites;
  NewtonResult res;
  res.field = guess;

  for (int it = 0; it <= opt.max_iter; ++it) {
    VectorXcd f = rhs(res.field, p);
    res.residual = f.cwiseAbs().maxCoeff();
    res.iterations = it;
    if (!std::isfinite(res.residual)) return res;
    if (res.residual < opt.tol) {
      res.converged = true;
      return res;
    }
    if (it == opt.max_iter) break;

    Eigen::MatrixXd jac = real_jacobian(res.field, p);
    Eigen::VectorXd rhs_real(2 * N);
    rhs_real.head(N) = -f.real();
    rhs_real.tail(N) = -f.imag();
    Eigen::VectorXd delta = jac.partialPivLu().solve(rhs_real);
    if (!delta.allFinite()) return res;

    // damp only when the full step makes things much worse
    double base = f.norm();
    double scale = 1.0;
    ClassicalField candidate;
    for (int half = 0; half < 4; ++half) {
      candidate = res.field;
      candidate.real() += scale * delta.head(N);
      candidate.imag() += scale * delta.tail(N);
      if (rhs(candidate, p).norm() < 10.0 * base) break;
      scale *= 0.5;
    }
    res.field = candidate;
  }
  return res;
}

VectorXcd linear_stability(const ClassicalField& stationary,
                           const ModelParams& p) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(real_jacobian(stationary, p));
  return es.eigenvalues();
}

bool is_stable(const VectorXcd& spectrum, double margin) {
  return spectrum.real().maxCoeff() < -margin;
}

StationaryBranch continue_branch(const ClassicalField& seed,
                                 const ModelParams& p,
                                 const std::vector<double>& j_path,
                                 const NewtonOptions& opt) {
  if (j_path.empty()) return {};
  StationaryBranch branch;

  auto solve_at = [&](double j, const ClassicalField& from,
                      BranchPoint& out) -> bool {
    ModelParams pj = p.at_hopping(j);
    NewtonResult nr = newton_stationary(from, pj, opt);
    if (!nr.converged) return false;
    out.j = j;
    out.field = nr.field;
    out.residual = nr.residual;
    out.stable = is_stable(linear_stability(nr.field, pj));
    return true;
  };

  BranchPoint first;
  if (!solve_at(j_path.front(), seed, first)) {
    branch.failed_at = j_path.front();
    return branch;
  }
  branch.points.push_back(first);

  for (size_t i = 1; i < j_path.size(); ++i) {
    BranchPoint next;
    if (solve_at(j_path[i], branch.points.back().field, next)) {
      branch.points.push_back(next);
      continue;
    }
    // bisect between the last good J and the failing one to pin the end
    double j_lo = branch.points.back().j, j_hi = j_path[i];
    while (j_hi - j_lo > 1e-3) {
      double j_mid = 0.5 * (j_lo + j_hi);
      BranchPoint mid;
      if (solve_at(j_mid, branch.points.back().field, mid)) {
        branch.points.push_back(mid);
        j_lo = j_mid;
      } else {
        j_hi = j_mid;
      }
    }
    branch.failed_at = j_hi;
    break;
  }
  return branch;
}

ClassicalField anti_continuous_soliton(const ModelParams& p, int center_site) {
  if (center_site < 0 || center_site >= p.n_sites)
    throw std::out_of_range("center site out of range");
  ModelParams ss = p.single_site();
  auto roots = single_site_intensities(ss);

  std::vector<SingleSiteRoot> stable;
  for (const auto& r : roots) {
    ClassicalField one(1);
    one(0) = r.amplitude;
    if (is_stable(linear_stability(one, ss))) stable.push_back(r);
  }
  if (stable.size() < 2)
    throw std::runtime_error(
        "anti-continuous seed needs two stable single-site roots");

  ClassicalField phi(p.n_sites);
  phi.setConstant(stable.front().amplitude);
  phi(center_site) = stable.back().amplitude;
  return phi;
}

}  // namespace ddbh::dnls
