#include "ddbh/scan.hpp"
#include <cstdio>
using namespace ddbh;
int main(int argc, char** argv) {
  const int N = 30;
  ModelParams tmpl = star_params(N, 0.0);
  scan::JScanOptions opt;
  opt.settle.t_max = 600;
  opt.settle.wall_cap_seconds = 60;
  opt.bifurcation_dj = 0.01;
  opt.on_point = [](const scan::PhaseRecord& r) {
    printf("  J=%-6g %-20s %-9s amp_c=%.3f res=%.1e %.1fs%s\n", r.j,
           to_string(r.label), to_string(r.status), r.center_amp, r.residual,
           r.elapsed_seconds, r.timed_out ? " CAP" : "");
    fflush(stdout);
  };
  std::vector<double> js;
  bool down = argv[1][0] == 'd';
  if (down) {
    for (double j = 1.6; j >= -1e-9; j -= 0.2) js.push_back(j > 1e-12 ? j : 0.0);
    js.insert(js.begin() + 7, 0.3);  // 1.6 1.4 ... 0.4 [0.3] 0.2 0.0
  } else {
    for (double j = 1.6; j <= 6.01; j += 0.2) js.push_back(j);
    js.push_back(5.6);
    std::sort(js.begin(), js.end());
    js.erase(std::unique(js.begin(), js.end()), js.end());
  }
  printf("%s leg:\n", down ? "descending" : "ascending");
  auto res = scan::scan_j(tmpl, js, Tier::soe, opt);
  for (const auto& b : res.bifurcations)
    printf("boundary: %s -> %s at J in [%.3f, %.3f] estimate %.3f\n",
           to_string(b.from), to_string(b.to), b.j_lo, b.j_hi, b.estimate);
  return 0;
}
