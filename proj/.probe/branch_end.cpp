#include "ddbh/soe.hpp"
#include <cstdio>
using namespace ddbh;
int main(int argc, char** argv) {
  const int N = argc > 1 ? atoi(argv[1]) : 30;
  double j_hi = argc > 2 ? atof(argv[2]) : 8.0;
  double hold_t = argc > 3 ? atof(argv[3]) : 0.0;  // long hold at the end
  const int c = N / 2;
  // enter the branch with a cold kick at J=3 (oscillating window)
  ModelParams p3 = star_params(N, 3.0);
  CorrelationState s = soe::cold_start_state(p3, c);
  std::mt19937_64 rng(42);
  s.first += soe::localized_perturbation(N, c, 1e-3, rng);
  soe::SettleOptions so;
  so.t_max = 600;
  so.wall_cap_seconds = 90;
  auto res0 = soe::evolve_until_settled(s, p3, so);
  s = res0.final_state;
  printf("anchor J=3.0 (N=%d): %s\n", N, to_string(res0.verdict.status));
  fflush(stdout);
  double last_j = 3.0;
  for (double j = 3.2; j <= j_hi + 1e-9; j += 0.2) {
    ModelParams p = star_params(N, j);
    CorrelationState init = s;
    std::mt19937_64 prng(42 ^ (uint64_t)(j * 1000));
    init.first += soe::localized_perturbation(N, c, 1e-3, prng);
    auto r = soe::evolve_until_settled(init, p, so);
    s = r.final_state;
    VectorXd prof = soe::classification_profile(r.verdict, r.trajectory);
    printf("J=%.2f  %-20s %-9s amp_c=%.3f res=%.1e %.1fs%s\n", j,
           to_string(soe::classify_mode(r.verdict, prof)),
           to_string(r.verdict.status), prof(c), r.verdict.residual,
           r.wall_seconds, r.hit_wall_cap ? " CAP" : "");
    fflush(stdout);
    last_j = j;
    if (soe::classify_mode(r.verdict, prof) == ModeLabel::homogeneous) break;
  }
  if (hold_t > 0) {
    // long hold at the last J: does the localized cycle drift away?
    ModelParams p = star_params(N, last_j);
    soe::EvolveOptions eo;
    eo.track_events = false;
    eo.sample_dt = 1.0;
    auto res = soe::integrate(s, p, hold_t, eo);
    VectorXd a0 = res.trajectory.profiles.front().cwiseAbs();
    VectorXd a1 = res.trajectory.profiles.back().cwiseAbs();
    printf("hold J=%.2f for t=%.0f: range %.4f -> %.4f, amp_c %.4f -> %.4f (%s)\n",
           last_j, hold_t, a0.maxCoeff() - a0.minCoeff(),
           a1.maxCoeff() - a1.minCoeff(), a0(c), a1(c),
           to_string(res.trajectory.status));
  }
  return 0;
}
