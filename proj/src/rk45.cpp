#include "ddbh/rk45.hpp"

#include <algorithm>
#include <cmath>

namespace ddbh {

const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::ok: return "ok";
    case RunStatus::diverged: return "diverged";
    default: return "step_underflow";
  }
}

namespace {

// Dormand-Prince nodes, stage coefficients, 5th-order weights and the
// (5th - 4th) error weights.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;

constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace

Dopri5::Dopri5(Rhs rhs, RkControl ctrl) : rhs_(std::move(rhs)), ctrl_(ctrl) {}

void Dopri5::reset(double t0, VectorXcd y0) {
  t_ = t0;
  y_ = std::move(y0);
  h_ = 0;
  for (auto& k : k_) k.resize(y_.size());
  y_stage_.resize(y_.size());
  y_err_.resize(y_.size());
  rhs_(t_, y_, k_[0]);
}

double Dopri5::error_norm(const VectorXcd& y_new) const {
  const auto n = y_.size();
  double acc = 0;
  for (long i = 0; i < n; ++i) {
    double sc = ctrl_.abs_tol +
                ctrl_.rel_tol * std::max(std::abs(y_(i)), std::abs(y_new(i)));
    double e = std::abs(y_err_(i)) / sc;
    acc += e * e;
  }
  return std::sqrt(acc / static_cast<double>(n));
}

double Dopri5::initial_step(double t_limit) const {
  // Hairer-style heuristic from the norms of y and f, refined by one Euler
  // probe of the second derivative.
  const auto n = y_.size();
  double d0 = 0, d1 = 0;
  for (long i = 0; i < n; ++i) {
    double sc = ctrl_.abs_tol + ctrl_.rel_tol * std::abs(y_(i));
    double a = std::abs(y_(i)) / sc, b = std::abs(k_[0](i)) / sc;
    d0 += a * a;
    d1 += b * b;
  }
  d0 = std::sqrt(d0 / n);
  d1 = std::sqrt(d1 / n);
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min(h0, std::abs(t_limit - t_));

  VectorXcd y1 = y_ + h0 * k_[0];
  VectorXcd f1(n);
  rhs_(t_ + h0, y1, f1);
  double d2 = 0;
  for (long i = 0; i < n; ++i) {
    double sc = ctrl_.abs_tol + ctrl_.rel_tol * std::abs(y_(i));
    double e = std::abs(f1(i) - k_[0](i)) / sc;
    d2 += e * e;
  }
  d2 = std::sqrt(d2 / n) / h0;

  double dm = std::max(d1, d2);
  double h1 = (dm <= 1e-15) ? std::max(1e-6, h0 * 1e-3)
                            : std::pow(0.01 / dm, 0.2);
  return std::min({100 * h0, h1, ctrl_.max_step});
}

bool Dopri5::step(double t_limit) {
  if (t_ >= t_limit) return true;
  if (h_ <= 0) h_ = initial_step(t_limit);

  double h = std::min({h_, ctrl_.max_step, t_limit - t_});
  while (true) {
    const double floor = 1e-14 * std::max(1.0, std::abs(t_));
    if (h < floor) return false;

    y_stage_ = y_ + h * (a21 * k_[0]);
    rhs_(t_ + c2 * h, y_stage_, k_[1]);
    y_stage_ = y_ + h * (a31 * k_[0] + a32 * k_[1]);
    rhs_(t_ + c3 * h, y_stage_, k_[2]);
    y_stage_ = y_ + h * (a41 * k_[0] + a42 * k_[1] + a43 * k_[2]);
    rhs_(t_ + c4 * h, y_stage_, k_[3]);
    y_stage_ = y_ + h * (a51 * k_[0] + a52 * k_[1] + a53 * k_[2] + a54 * k_[3]);
    rhs_(t_ + c5 * h, y_stage_, k_[4]);
    y_stage_ = y_ + h * (a61 * k_[0] + a62 * k_[1] + a63 * k_[2] + a64 * k_[3] +
                         a65 * k_[4]);
    rhs_(t_ + h, y_stage_, k_[5]);
    // 5th order solution; its derivative is stage 7 (FSAL).
    y_stage_ = y_ + h * (b1 * k_[0] + b3 * k_[2] + b4 * k_[3] + b5 * k_[4] +
                         b6 * k_[5]);
    rhs_(t_ + h, y_stage_, k_[6]);
    y_err_ = h * (e1 * k_[0] + e3 * k_[2] + e4 * k_[3] + e5 * k_[4] +
                  e6 * k_[5] + e7 * k_[6]);

    double err = error_norm(y_stage_);
    if (err <= 1.0 || !std::isfinite(err)) {
      if (!std::isfinite(err)) {
        // Non-finite stage: shrink hard and retry as a rejected step.
        ++n_rejected_;
        h *= 0.1;
        continue;
      }
      t_ += h;
      y_.swap(y_stage_);
      k_[0].swap(k_[6]);
      ++n_accepted_;
      double fac = (err == 0) ? 5.0
                              : std::clamp(ctrl_.safety * std::pow(err, -0.2),
                                           0.2, 5.0);
      h_ = std::min(h * fac, ctrl_.max_step);
      return true;
    }
    ++n_rejected_;
    h *= std::clamp(ctrl_.safety * std::pow(err, -0.2), 0.1, 1.0);
  }
}

bool Dopri5::advance_to(double t_target) {
  while (t_ < t_target) {
    if (!step(t_target)) return false;
  }
  return true;
}

}  // namespace ddbh
