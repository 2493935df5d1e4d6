#include "ddbh/soe.hpp"
#include "ddbh/dnls.hpp"
#include <cstdio>
using namespace ddbh;
int main(int argc, char** argv) {
  const int N = 30;
  double kick = argc > 1 ? atof(argv[1]) : 2.0;
  std::mt19937_64 rng(42);
  for (double j : {0.05, 0.08, 0.1, 0.12, 0.15, 0.2, 0.3, 0.8, 1.2, 1.6, 2.0,
                   2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 5.2, 5.4, 5.6}) {
    ModelParams p = star_params(N, j);
    auto roots = dnls::single_site_intensities(p.single_site());
    VectorXcd phi = VectorXcd::Constant(N, roots[0].amplitude);
    phi(15) += kick * phi(15) / std::abs(phi(15));
    CorrelationState s0 = CorrelationState::factorized(phi);
    std::mt19937_64 prng(42);
    s0.first += soe::localized_perturbation(N, 15, 1e-3, prng);
    soe::SettleOptions opt;
    opt.t_max = 600;
    opt.wall_cap_seconds = 60;
    auto res = soe::evolve_until_settled(s0, p, opt);
    VectorXd prof = soe::classification_profile(res.verdict, res.trajectory);
    printf("J=%.2f  %-20s %-9s amp_c=%.3f [%.3f,%.3f] res=%.1e %.1fs%s\n", j,
           to_string(soe::classify_mode(res.verdict, prof)),
           to_string(res.verdict.status), prof(15),
           res.verdict.extremal_profiles ? res.verdict.extremal_profiles->first(15) : prof(15),
           res.verdict.extremal_profiles ? res.verdict.extremal_profiles->second(15) : prof(15),
           res.verdict.residual, res.wall_seconds, res.hit_wall_cap ? " CAP" : "");
    fflush(stdout);
  }
  return 0;
}
