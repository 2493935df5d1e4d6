#include "ddbh/soe.hpp"
#include "ddbh/dnls.hpp"
#include <cstdio>
using namespace ddbh;
int main(int argc, char** argv) {
  const int N = 30;
  double dj = argc > 1 ? atof(argv[1]) : 0.05;
  double t_evol = argc > 2 ? atof(argv[2]) : 100.0;
  // settle the kicked soliton at J=1.6 first
  ModelParams p0 = star_params(N, 1.6);
  CorrelationState s = soe::cold_start_state(p0, 15);
  {
    std::mt19937_64 rng(42);
    s.first += soe::localized_perturbation(N, 15, 1e-3, rng);
    soe::SettleOptions so;
    so.t_max = 600;
    s = soe::evolve_until_settled(s, p0, so).final_state;
  }
  std::mt19937_64 rng(123);
  for (double j = 1.6 + dj; j <= 6.0 + 1e-9; j += dj) {
    ModelParams p = star_params(N, j);
    CorrelationState init = s;
    init.first += soe::localized_perturbation(N, 15, 1e-3, rng);
    soe::EvolveOptions opt;
    opt.track_events = true;
    auto res = soe::integrate(init, p, t_evol, opt);
    s = res.final_state;
    VectorXd prof = soe::classification_profile(res.verdict, res.trajectory);
    double bg = 0.5 * (prof(0) + prof(1));
    printf("J=%.2f  %-20s %-9s amp_c=%.3f bg=%.3f res=%.1e\n", j,
           to_string(soe::classify_mode(res.verdict, prof)),
           to_string(res.verdict.status), prof(15), bg, res.verdict.residual);
    fflush(stdout);
  }
  return 0;
}
