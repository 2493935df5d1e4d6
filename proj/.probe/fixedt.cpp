#include "ddbh/soe.hpp"
#include "ddbh/dnls.hpp"
#include <cstdio>
using namespace ddbh;
// fixed-integration-time protocol: carry the state, integrate t_evol per
// point, classify from the trailing window
int main(int argc, char** argv) {
  const int N = 30;
  double j_lo = atof(argv[1]), j_hi = atof(argv[2]), dj = atof(argv[3]);
  double t_evol = argc > 4 ? atof(argv[4]) : 100.0;
  std::mt19937_64 rng(42);
  ModelParams p0 = star_params(N, j_lo);
  CorrelationState carry = soe::cold_start_state(p0, 15);
  int dir = j_hi >= j_lo ? 1 : -1;
  for (double j = j_lo; dir * j <= dir * j_hi + 1e-9; j += dj * dir) {
    ModelParams p = star_params(N, j < 1e-12 && j > -1e-12 ? 0.0 : j);
    CorrelationState init = carry;
    init.first += soe::localized_perturbation(N, 15, 1e-3, rng);
    soe::EvolveOptions opt;
    opt.track_events = true;
    auto res = soe::integrate(init, p, t_evol, opt);
    carry = res.final_state;
    VectorXd prof = soe::classification_profile(res.verdict, res.trajectory);
    int peaks = 0;
    for (int i = 0; i < N; ++i) {
      double l = prof((i+N-1)%N), r = prof((i+1)%N);
      if (prof(i) > l && prof(i) > r && prof(i) > prof.minCoeff() + 0.5*(prof.maxCoeff()-prof.minCoeff())) ++peaks;
    }
    printf("J=%.2f  %-20s %-9s amp_c=%.3f peaks=%d range=%.3f res=%.1e\n",
           p.hopping, to_string(soe::classify_mode(res.verdict, prof)),
           to_string(res.verdict.status), prof(15), peaks,
           prof.maxCoeff()-prof.minCoeff(), res.verdict.residual);
    fflush(stdout);
  }
  return 0;
}
