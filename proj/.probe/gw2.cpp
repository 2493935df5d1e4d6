#include "ddbh/gutzwiller.hpp"
#include <cstdio>
using namespace ddbh;
int main() {
  const int N = 15, n_max = 15, center = 7;
  for (double jval : {0.5, 2.0}) {
    ModelParams p = star_params(N, jval);
    GutzwillerState s0 = gutzwiller::kick_protocol_initial(p, n_max, center, 8.8);
    gutzwiller::EvolveOptions opt;
    auto traj = gutzwiller::evolve(s0, p, 100.0, opt);
    auto c = gutzwiller::localization_contrast(traj, center, 0);
    printf("J=%.2f plateau=%.2f(nc=%.2f) tail_rate=%.4f half=%.2f%s crossing=%.2f\n",
           jval, c.plateau, c.plateau_center_occupation, c.tail_rate,
           c.half_life, c.censored ? "c" : "", c.first_crossing);
    fflush(stdout);
  }
  return 0;
}
