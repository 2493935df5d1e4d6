#include "ddbh/soe.hpp"
#include "ddbh/dnls.hpp"
#include <cstdio>
using namespace ddbh;
int main() {
  const int N = 30;
  for (double kick : {2.2, 2.6, 3.0}) {
    for (double j : {4.9, 5.0, 5.1, 5.2, 5.3, 5.4, 5.5, 5.6}) {
      ModelParams p = star_params(N, j);
      CorrelationState s0 = soe::cold_start_state(p, 15, kick);
      std::mt19937_64 rng(42);
      s0.first += soe::localized_perturbation(N, 15, 1e-3, rng);
      soe::SettleOptions opt;
      opt.t_max = 600;
      opt.wall_cap_seconds = 45;
      auto res = soe::evolve_until_settled(s0, p, opt);
      VectorXd prof = soe::classification_profile(res.verdict, res.trajectory);
      printf("kick=%.1f J=%.2f  %-20s %-9s range=%.3f %.0fs\n", kick, j,
             to_string(soe::classify_mode(res.verdict, prof)),
             to_string(res.verdict.status),
             prof.maxCoeff() - prof.minCoeff(), res.wall_seconds);
      fflush(stdout);
    }
  }
  return 0;
}
