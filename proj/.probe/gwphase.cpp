#include "ddbh/gutzwiller.hpp"
#include <cstdio>
using namespace ddbh;
int main(int argc, char** argv) {
  double jval = atof(argv[1]);
  double dphase = atof(argv[2]);
  double t_end = argc > 3 ? atof(argv[3]) : 60.0;
  const int N = 15, n_max = 15, center = 7;
  ModelParams p = star_params(N, jval);
  MatrixXcd bg = gutzwiller::homogeneous_background(p, n_max);
  auto ops = gutzwiller::FockOperators::build(n_max);
  cplx bg_mean = gutzwiller::site_mean(bg, ops);
  GutzwillerState s0 = GutzwillerState::uniform(bg, N, n_max);
  cplx alpha = std::sqrt(8.8) * std::exp(cplx(0, std::arg(bg_mean) + dphase));
  s0.rhos[center] = gutzwiller::coherent_state_rho(alpha, n_max);
  gutzwiller::EvolveOptions opt;
  auto traj = gutzwiller::evolve(s0, p, t_end, opt);
  auto c = gutzwiller::localization_contrast(traj, center, 0);
  printf("J=%.2f dphase=%.2f plateau=%.2f(nc=%.2f) half=%.2f%s | contrast:", jval,
         dphase, c.plateau, c.plateau_center_occupation, c.half_life,
         c.censored ? "c" : "");
  for (double t : {2.0, 5.0, 10.0, 20.0, 30.0, 45.0, 60.0}) {
    size_t i = (size_t)(t / 0.1);
    if (i < c.contrast.size()) printf(" %.0f:%.2f", t, c.contrast[i]);
  }
  printf("\n");
  return 0;
}
