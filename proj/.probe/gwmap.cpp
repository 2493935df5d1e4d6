#include "ddbh/gutzwiller.hpp"
#include <cstdio>
using namespace ddbh;
int main() {
  const int N = 15, n_max = 15, center = 7;
  for (double jval : {0.2, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5}) {
    ModelParams p = star_params(N, jval);
    GutzwillerState s0 = gutzwiller::kick_protocol_initial(p, n_max, center, 8.8);
    gutzwiller::EvolveOptions opt;
    auto traj = gutzwiller::evolve(s0, p, 100.0, opt);
    auto c = gutzwiller::localization_contrast(traj, center, 0);
    // slow-stage decay rate from the tail (t in [20, 60])
    size_t i1 = 200, i2 = 600;
    double rate = std::log(c.contrast[i1] / c.contrast[i2]) / (c.times[i2] - c.times[i1]);
    printf("J=%.2f plateau=%.2f(nc=%.2f at t=%.1f) half=%.2f%s tail_rate=%.4f  c(10)=%.2f c(30)=%.2f c(60)=%.2f c(100)=%.2f\n",
           jval, c.plateau, c.plateau_center_occupation, c.plateau_time,
           c.half_life, c.censored ? "c" : "", rate,
           c.contrast[100], c.contrast[300], c.contrast[600], c.contrast[1000]);
    fflush(stdout);
  }
  return 0;
}
