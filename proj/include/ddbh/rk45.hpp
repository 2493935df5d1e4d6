#pragma once

#include "ddbh/model.hpp"

#include <functional>
#include <limits>

namespace ddbh {

struct RkControl {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double max_step = std::numeric_limits<double>::infinity();
  double safety = 0.9;
};

enum class RunStatus { ok, diverged, step_underflow };
const char* to_string(RunStatus s);

/// Dormand-Prince 5(4) embedded pair with FSAL and standard step control.
/// State is a flat complex vector; the error norm treats each complex
/// component's modulus against abs_tol + rel_tol * |y|.
class Dopri5 {
 public:
  using Rhs = std::function<void(double t, const VectorXcd& y, VectorXcd& dydt)>;

  Dopri5(Rhs rhs, RkControl ctrl = {});

  void reset(double t0, VectorXcd y0);

  /// One accepted step, never stepping past t_limit.
  /// Returns false on step-size underflow.
  bool step(double t_limit);

  /// Integrate until t() == t_target exactly. False on underflow.
  bool advance_to(double t_target);

  double t() const { return t_; }
  const VectorXcd& state() const { return y_; }
  /// f(t, y) at the current point (fresh by the FSAL property).
  const VectorXcd& derivative() const { return k_[0]; }

  long n_accepted() const { return n_accepted_; }
  long n_rejected() const { return n_rejected_; }

 private:
  double error_norm(const VectorXcd& y_new) const;
  double initial_step(double t_limit) const;

  Rhs rhs_;
  RkControl ctrl_;
  double t_ = 0;
  double h_ = 0;  // 0: choose on next step
  VectorXcd y_;
  VectorXcd k_[7];
  VectorXcd y_stage_, y_err_;
  long n_accepted_ = 0, n_rejected_ = 0;
};

}  // namespace ddbh
