#include "ddbh/scan.hpp"
#include <cstdio>
using namespace ddbh;
int main() {
  ModelParams tmpl = star_params(30, 0.0);
  std::vector<double> js;
  for (double j = 0.0; j <= 6.0 + 1e-9; j += 0.2) js.push_back(j < 1e-12 ? 0 : j);
  scan::JScanOptions opt;
  opt.refine_bifurcations = false;
  opt.settle.t_max = 600;
  opt.settle.wall_cap_seconds = 45;
  opt.on_point = [](const scan::PhaseRecord& r) {
    printf("J=%-5g %-20s %-9s amp_c=%.3f [%.3f,%.3f] %.1fs\n", r.j,
           to_string(r.label), to_string(r.status), r.center_amp,
           r.center_amp_min, r.center_amp_max, r.elapsed_seconds);
    fflush(stdout);
  };
  scan::scan_j(tmpl, js, Tier::dnls, opt);
  return 0;
}
