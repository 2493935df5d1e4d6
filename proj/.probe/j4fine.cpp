#include "ddbh/soe.hpp"
#include <cstdio>
using namespace ddbh;
int main() {
  const int N = 30;
  for (double j : {5.02, 5.05, 5.08, 5.1, 5.12, 5.15, 5.18}) {
    ModelParams p = star_params(N, j);
    CorrelationState s0 = soe::cold_start_state(p, 15, 2.0);
    std::mt19937_64 rng(42);
    s0.first += soe::localized_perturbation(N, 15, 1e-3, rng);
    soe::SettleOptions opt;
    opt.t_max = 600;
    opt.wall_cap_seconds = 60;
    auto res = soe::evolve_until_settled(s0, p, opt);
    VectorXd prof = soe::classification_profile(res.verdict, res.trajectory);
    printf("J=%.2f  %-20s %-9s range=%.3f %.0fs\n", j,
           to_string(soe::classify_mode(res.verdict, prof)),
           to_string(res.verdict.status), prof.maxCoeff() - prof.minCoeff(),
           res.wall_seconds);
    fflush(stdout);
  }
  return 0;
}
