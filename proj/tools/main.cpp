#include "ddbh/dnls.hpp"
#include "ddbh/gutzwiller.hpp"
#include "ddbh/io.hpp"
#include "ddbh/measurement.hpp"
#include "ddbh/model.hpp"
#include "ddbh/scan.hpp"
#include "ddbh/soe.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace ddbh;
using nlohmann::json;

namespace {

struct CommonArgs {
  std::string config_file;
  std::string out_dir = "out";
  uint64_t seed = 42;
  // flag overrides; NaN / -1 marks "not set"
  double j = -1, u = std::nan(""), a = -1, gamma = -1,
         delta_omega = std::nan("");
  int n_sites = -1;
  std::string boundary, tier = "soe";
  bool schedule = false;
  double t_end = 100.0;
  double rel_tol = 1e-9, abs_tol = 1e-12;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_file, "config file (key = value)");
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--seed", args.seed, "random seed");
  cmd->add_option("--n-sites", args.n_sites, "number of lattice sites");
  cmd->add_option("--j", args.j, "hopping J");
  cmd->add_option("--u", args.u, "interaction U");
  cmd->add_option("--a", args.a, "drive amplitude A");
  cmd->add_option("--gamma", args.gamma, "loss rate gamma");
  cmd->add_option("--delta-omega", args.delta_omega, "detuning");
  cmd->add_flag("--schedule", args.schedule, "detuning schedule 3 + 2J");
  cmd->add_option("--boundary", args.boundary, "periodic|open");
  cmd->add_option("--tier", args.tier, "dnls|soe|gutzwiller");
  cmd->add_option("--t-end", args.t_end, "evolution horizon");
  cmd->add_option("--rel-tol", args.rel_tol, "integrator relative tolerance");
  cmd->add_option("--abs-tol", args.abs_tol, "integrator absolute tolerance");
}

ModelParams resolve_params(const CommonArgs& args) {
  std::map<std::string, std::string> cfg;
  if (!args.config_file.empty()) cfg = read_config_file(args.config_file);
  auto set = [&](const char* key, double v) { cfg[key] = io::format_double(v); };
  if (args.n_sites >= 0) set("n_sites", args.n_sites);
  if (args.j >= 0) {
    set("j", args.j);
    if (cfg.count("detuning_schedule")) cfg.erase("delta_omega");
  }
  if (!std::isnan(args.u)) set("u", args.u);
  if (args.a >= 0) set("a", args.a);
  if (args.gamma >= 0) set("gamma", args.gamma);
  if (!std::isnan(args.delta_omega)) {
    set("delta_omega", args.delta_omega);
    cfg.erase("detuning_schedule");
  }
  if (args.schedule) {
    cfg["detuning_schedule"] = "on";
    cfg.erase("delta_omega");
  }
  if (!args.boundary.empty()) cfg["boundary"] = args.boundary;
  // star-point defaults for anything still missing
  if (!cfg.count("n_sites")) cfg["n_sites"] = "30";
  if (!cfg.count("j")) cfg["j"] = "0";
  if (!cfg.count("u")) cfg["u"] = "-1";
  if (!cfg.count("a")) cfg["a"] = "2";
  if (!cfg.count("gamma")) cfg["gamma"] = "2";
  if (!cfg.count("delta_omega") && !cfg.count("detuning_schedule"))
    cfg["detuning_schedule"] = "on";
  return build_params(cfg);
}

void write_run_json(const std::string& out_dir, const ModelParams& p,
                    const CommonArgs& args, const std::string& command,
                    double elapsed_seconds, const json& extra = {}) {
  json run{{"version", io::version_string()},
           {"command", command},
           {"params", io::params_to_json(p)},
           {"seed", args.seed},
           {"rel_tol", args.rel_tol},
           {"abs_tol", args.abs_tol},
           {"elapsed_seconds", elapsed_seconds}};
  if (!extra.is_null()) run["extra"] = extra;
  io::save_json((fs::path(out_dir) / "run.json").string(), run);
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

int cmd_evolve(const CommonArgs& args) {
  Timer timer;
  ModelParams p = resolve_params(args);
  Tier tier = tier_from_string(args.tier);
  fs::create_directories(args.out_dir);
  std::mt19937_64 rng(args.seed);
  const int center = p.n_sites / 2;

  if (tier == Tier::dnls) {
    dnls::EvolveOptions opt;
    opt.rk.rel_tol = args.rel_tol;
    opt.rk.abs_tol = args.abs_tol;
    ClassicalField phi;
    try {
      phi = dnls::anti_continuous_soliton(p, center);
    } catch (const std::runtime_error&) {
      auto roots = dnls::single_site_intensities(p.single_site());
      phi = VectorXcd::Constant(p.n_sites, roots.front().amplitude);
    }
    phi += soe::localized_perturbation(p.n_sites, center, 1e-3, rng);
    auto traj = dnls::integrate(phi, p, args.t_end, opt);
    io::write_field_trajectory_csv(
        (fs::path(args.out_dir) / "trajectory.csv").string(), traj);
    auto verdict = detect_steady(traj);
    write_run_json(args.out_dir, p, args, "evolve", timer.seconds(),
                   {{"status", to_string(verdict.status)}});
    std::printf("evolve dnls: N=%d J=%g t_end=%g -> %s (%s)\n", p.n_sites,
                p.hopping, args.t_end, to_string(traj.status),
                to_string(verdict.status));
    return traj.status == RunStatus::ok ? 0 : 1;
  }

  if (tier == Tier::soe) {
    soe::EvolveOptions opt;
    opt.rk.rel_tol = args.rel_tol;
    opt.rk.abs_tol = args.abs_tol;
    opt.track_events = true;
    CorrelationState s0 = soe::cold_start_state(p, center);
    s0.first += soe::localized_perturbation(p.n_sites, center, 1e-3, rng);
    auto res = soe::integrate(s0, p, args.t_end, opt);
    io::write_moment_trajectory_csv(
        (fs::path(args.out_dir) / "trajectory.csv").string(), res.trajectory);
    json snap = io::correlation_state_to_json(res.final_state);
    snap["verdict"] = {{"status", to_string(res.verdict.status)},
                       {"residual", res.verdict.residual}};
    if (res.verdict.period) snap["verdict"]["period"] = *res.verdict.period;
    io::save_json((fs::path(args.out_dir) / "final_state.json").string(), snap);
    write_run_json(args.out_dir, p, args, "evolve", timer.seconds(),
                   {{"status", to_string(res.verdict.status)}});
    std::printf("evolve soe: N=%d J=%g t_end=%g -> %s (%s)\n", p.n_sites,
                p.hopping, args.t_end, to_string(res.trajectory.status),
                to_string(res.verdict.status));
    return res.trajectory.status == RunStatus::ok ? 0 : 1;
  }

  gutzwiller::EvolveOptions opt;
  opt.rk.rel_tol = args.rel_tol;
  opt.rk.abs_tol = args.abs_tol;
  const int n_max = 15;
  MatrixXcd bg = gutzwiller::homogeneous_background(p, n_max);
  GutzwillerState s0 = GutzwillerState::uniform(bg, p.n_sites, n_max);
  auto traj = gutzwiller::evolve(s0, p, args.t_end, opt);
  io::write_gutzwiller_trajectory_csv(
      (fs::path(args.out_dir) / "trajectory.csv").string(), traj);
  io::save_json((fs::path(args.out_dir) / "final_state.json").string(),
                io::gutzwiller_state_to_json(traj.final_state()));
  write_run_json(args.out_dir, p, args, "evolve", timer.seconds(),
                 {{"truncation_valid", traj.truncation_valid}});
  std::printf("evolve gutzwiller: N=%d J=%g t_end=%g -> %s\n", p.n_sites,
              p.hopping, args.t_end, to_string(traj.status));
  return traj.status == RunStatus::ok ? 0 : 1;
}

int cmd_scan_j(const CommonArgs& args, const std::string& j_range,
               bool cold_start, bool descend, double t_max, double wall_cap,
               int n_max, double kick) {
  Timer timer;
  ModelParams p = resolve_params(args);
  Tier tier = tier_from_string(args.tier);
  fs::create_directories(args.out_dir);

  std::vector<double> js = scan::parse_range(j_range);
  if (descend) std::reverse(js.begin(), js.end());

  scan::JScanOptions opt;
  opt.seed = args.seed;
  opt.cold_start = cold_start;
  opt.settle.evolve.rk.rel_tol = args.rel_tol;
  opt.settle.evolve.rk.abs_tol = args.abs_tol;
  opt.settle.t_max = t_max;
  opt.settle.wall_cap_seconds = wall_cap;
  opt.n_max = n_max;
  opt.kick_occupation = kick;
  opt.checkpoint_dir = (fs::path(args.out_dir) / "checkpoint").string();
  opt.on_point = [](const scan::PhaseRecord& r) {
    std::fprintf(stderr, "  J=%-8g %-20s %-10s amp_c=%.4f (%.1fs)%s\n", r.j,
                 to_string(r.label), to_string(r.status), r.center_amp,
                 r.elapsed_seconds, r.timed_out ? " [wall cap]" : "");
  };

  auto result = scan::scan_j(p, js, tier, opt);
  io::save_text((fs::path(args.out_dir) / "phases.csv").string(),
                scan::phase_records_csv(result.records));
  io::save_text((fs::path(args.out_dir) / "heatmap_j.csv").string(),
                scan::heatmap_csv(result.records));
  io::save_text((fs::path(args.out_dir) / "bifurcations.csv").string(),
                scan::bifurcations_csv(result.bifurcations));

  if (tier == Tier::dnls && !js.empty()) {
    // Newton-continued stationary branch alongside the dynamical records
    std::vector<double> path = js;
    std::sort(path.begin(), path.end());
    ModelParams p0 = p.at_hopping(path.front());
    ClassicalField seed;
    try {
      seed = dnls::anti_continuous_soliton(p0, p.n_sites / 2);
    } catch (const std::runtime_error&) {
      auto roots = dnls::single_site_intensities(p0.single_site());
      seed = VectorXcd::Constant(p.n_sites, roots.front().amplitude);
    }
    auto nr = dnls::newton_stationary(seed, p0);
    if (nr.converged) {
      auto branch = dnls::continue_branch(nr.field, p, path);
      io::write_branch_csv((fs::path(args.out_dir) / "branch.csv").string(),
                           branch);
    }
  }
  json extra{{"n_points", result.records.size()},
             {"n_bifurcations", result.bifurcations.size()}};
  write_run_json(args.out_dir, p, args, "scan-j", timer.seconds(), extra);
  std::printf(
      "scan-j %s: %zu points, %zu bifurcations -> %s/phases.csv (%.1fs)\n",
      to_string(tier), result.records.size(), result.bifurcations.size(),
      args.out_dir.c_str(), timer.seconds());
  return 0;
}

int cmd_scan_ua(const CommonArgs& args, const std::string& u_range,
                const std::string& a_range, int threads) {
  Timer timer;
  ModelParams p = resolve_params(args);
  Tier tier = tier_from_string(args.tier);
  fs::create_directories(args.out_dir);
  auto us = scan::parse_range(u_range);
  auto as = scan::parse_range(a_range);
  auto cells = scan::scan_ua(us, as, tier, p, threads);
  io::save_text((fs::path(args.out_dir) / "ua_grid.csv").string(),
                scan::ua_grid_csv(cells));
  int unresolved = 0;
  for (const auto& c : cells) unresolved += c.resolved ? 0 : 1;
  write_run_json(args.out_dir, p, args, "scan-ua", timer.seconds(),
                 {{"cells", cells.size()}, {"unresolved", unresolved}});
  std::printf("scan-ua: %zu cells (%d unresolved) -> %s/ua_grid.csv (%.1fs)\n",
              cells.size(), unresolved, args.out_dir.c_str(), timer.seconds());
  return 0;
}

int cmd_single_site(const CommonArgs& args) {
  ModelParams p = resolve_params(args).single_site();
  auto roots = dnls::single_site_intensities(p);
  std::printf("single site at U=%g A=%g gamma=%g delta_omega=%g\n",
              p.interaction, p.drive, p.loss, p.detuning);
  std::printf("  dnls intensities (%zu):", roots.size());
  for (const auto& r : roots) std::printf(" %.12g", r.intensity);
  std::printf("\n");
  auto soe_res = soe::single_site_count(p);
  if (soe_res.converged == 0) {
    std::printf("  soe count: unresolved (no Newton start converged)\n");
    return 1;
  }
  std::printf("  soe count: %zu distinct solution(s), %d/%d starts converged\n",
              soe_res.solutions.size(), soe_res.converged, soe_res.starts);
  for (const auto& s : soe_res.solutions)
    std::printf("    <a>=%.6g%+.6gi  <n>=%.6g  <aa>=%.6g%+.6gi\n",
                s.mean.real(), s.mean.imag(), s.occupation, s.anomalous.real(),
                s.anomalous.imag());
  return 0;
}

int cmd_gutzwiller_protocol(const CommonArgs& args, int n_max, double kick,
                            double trunc_threshold) {
  Timer timer;
  ModelParams p = resolve_params(args);
  fs::create_directories(args.out_dir);
  const int center = p.n_sites / 2;

  GutzwillerState s0 =
      gutzwiller::kick_protocol_initial(p, n_max, center, kick);
  gutzwiller::EvolveOptions opt;
  opt.rk.rel_tol = args.rel_tol;
  opt.rk.abs_tol = args.abs_tol;
  opt.truncation_threshold = trunc_threshold;
  auto traj = gutzwiller::evolve(s0, p, args.t_end, opt);
  io::write_gutzwiller_trajectory_csv(
      (fs::path(args.out_dir) / "observables.csv").string(), traj);

  auto contrast = gutzwiller::localization_contrast(traj, center, 0);
  std::string csv = "t,contrast\n";
  for (size_t i = 0; i < contrast.times.size(); ++i)
    csv += io::format_double(contrast.times[i]) + "," +
           io::format_double(contrast.contrast[i]) + "\n";
  io::save_text((fs::path(args.out_dir) / "contrast.csv").string(), csv);

  json extra{{"half_life", contrast.half_life},
             {"half_life_censored", contrast.censored},
             {"plateau_contrast", contrast.plateau},
             {"plateau_center_occupation", contrast.plateau_center_occupation},
             {"truncation_valid", traj.truncation_valid},
             {"max_top_population", traj.max_top_population}};
  write_run_json(args.out_dir, p, args, "gutzwiller-protocol", timer.seconds(),
                 extra);
  std::printf(
      "gutzwiller protocol: N=%d n_max=%d J=%g kick=%g -> half-life %.2f%s, "
      "plateau <n_c>=%.2f, truncation %s (%.1fs)\n",
      p.n_sites, n_max, p.hopping, kick, contrast.half_life,
      contrast.censored ? " (censored)" : "",
      contrast.plateau_center_occupation,
      traj.truncation_valid ? "ok" : "breached", timer.seconds());
  return traj.status == RunStatus::ok ? 0 : 1;
}

int cmd_correlator(const CommonArgs& args, bool include_offset, double t_max) {
  Timer timer;
  ModelParams p = resolve_params(args);
  fs::create_directories(args.out_dir);
  std::mt19937_64 rng(args.seed);
  const int center = p.n_sites / 2;

  CorrelationState s0 = soe::cold_start_state(p, center);
  s0.first += soe::localized_perturbation(p.n_sites, center, 1e-3, rng);
  soe::SettleOptions settle;
  settle.evolve.rk.rel_tol = args.rel_tol;
  settle.evolve.rk.abs_tol = args.abs_tol;
  settle.t_max = t_max;
  auto res = soe::evolve_until_settled(s0, p, settle);

  MatrixXcd f =
      measurement::connected_correlator(res.representative, include_offset);
  io::write_complex_matrix_csv(
      (fs::path(args.out_dir) / "correlator_map.csv").string(), f, "k");
  json meta{
      {"commutator_offset_included", include_offset},
      {"status", to_string(res.verdict.status)},
      {"constants",
       {{"gamma_line", 1.0}, {"velocity", 1.0}, {"spacing", 1.0}}},
      {"k_grid", "2 pi m / N, m = 0..N-1"}};
  io::save_json((fs::path(args.out_dir) / "correlator_meta.json").string(),
                meta);
  write_run_json(args.out_dir, p, args, "correlator", timer.seconds(),
                 {{"status", to_string(res.verdict.status)}});
  std::printf("correlator: J=%g settled %s -> %s/correlator_map.csv (%.1fs)\n",
              p.hopping, to_string(res.verdict.status), args.out_dir.c_str(),
              timer.seconds());
  return 0;
}

int cmd_rectangle_check(const CommonArgs& args, int n, double k_over_d,
                        double span, double step) {
  fs::create_directories(args.out_dir);
  std::vector<double> omegas;
  for (double w = k_over_d - span; w <= k_over_d + span + 1e-12; w += step)
    omegas.push_back(w);
  auto rows = measurement::rectangle_sum_check(n, k_over_d, omegas);
  std::string csv = "omega,re_exact,im_exact,abs_exact,rectangle\n";
  for (const auto& r : rows)
    csv += io::format_double(r.omega) + "," +
           io::format_double(r.exact.real()) + "," +
           io::format_double(r.exact.imag()) + "," +
           io::format_double(std::abs(r.exact)) + "," +
           io::format_double(r.rectangle) + "\n";
  io::save_text((fs::path(args.out_dir) / "rectangle.csv").string(), csv);
  auto peak = measurement::rectangle_sum_check(n, k_over_d, {k_over_d});
  std::printf(
      "rectangle check: N=%d k/d=%g peak=%g sinc(y=1)=%.4f -> "
      "%s/rectangle.csv\n",
      n, k_over_d, std::abs(peak[0].exact), measurement::sinc_factor(1.0, n),
      args.out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"driven-dissipative Bose-Hubbard lattice simulator"};
  app.require_subcommand(1);

  CommonArgs args;

  auto* evolve = app.add_subcommand("evolve", "integrate one trajectory");
  add_common(evolve, args);

  auto* scan_j_cmd = app.add_subcommand("scan-j", "phase scan over hopping J");
  add_common(scan_j_cmd, args);
  std::string j_range = "0:6:0.05";
  bool cold_start = false, descend = false;
  double t_max = 600, wall_cap = 300, kick = 8.8;
  int n_max = 15, threads = 0;
  scan_j_cmd->add_option("--j-range", j_range, "lo:hi:step or comma list");
  scan_j_cmd->add_flag("--cold-start", cold_start, "fresh start per point");
  scan_j_cmd->add_flag("--descend", descend, "sweep from high J down");
  scan_j_cmd->add_option("--t-max", t_max, "settle horizon per point");
  scan_j_cmd->add_option("--wall-cap", wall_cap, "per-point wall cap (s)");
  scan_j_cmd->add_option("--n-max", n_max, "gutzwiller Fock truncation");
  scan_j_cmd->add_option("--kick", kick, "gutzwiller center-kick occupation");

  auto* scan_ua_cmd =
      app.add_subcommand("scan-ua", "single-site solution counts over (U, A)");
  add_common(scan_ua_cmd, args);
  std::string u_range = "-2:0:0.1", a_range = "0:3:0.1";
  scan_ua_cmd->add_option("--u-range", u_range, "lo:hi:step or comma list");
  scan_ua_cmd->add_option("--a-range", a_range, "lo:hi:step or comma list");
  scan_ua_cmd->add_option("--threads", threads, "worker threads (0 = auto)");

  auto* single = app.add_subcommand(
      "single-site", "decoupled-site roots (dnls) and solution count (soe)");
  add_common(single, args);

  auto* protocol = app.add_subcommand(
      "gutzwiller-protocol", "homogeneous background plus center kick");
  add_common(protocol, args);
  double trunc_threshold = 1e-6;
  protocol->add_option("--n-max", n_max, "Fock truncation");
  protocol->add_option("--kick", kick, "center-kick occupation <n_c>");
  protocol->add_option("--truncation-threshold", trunc_threshold,
                       "top-level population validity threshold");

  auto* correlator = app.add_subcommand(
      "correlator", "settle the soe state and emit the connected correlator");
  add_common(correlator, args);
  bool include_offset = false;
  correlator->add_flag("--offset-included", include_offset,
                       "keep the delta_kk' commutator offset");
  correlator->add_option("--t-max", t_max, "settle horizon");

  auto* rectangle = app.add_subcommand(
      "rectangle-check", "lattice sum against its rectangle approximation");
  add_common(rectangle, args);
  int rect_n = 10;
  double rect_k = M_PI, rect_span = 2.0, rect_step = 0.01;
  rectangle->add_option("--n", rect_n, "number of sites");
  rectangle->add_option("--k", rect_k, "momentum k/d");
  rectangle->add_option("--span", rect_span, "omega span around k");
  rectangle->add_option("--step", rect_step, "omega grid step");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(evolve)) return cmd_evolve(args);
    if (app.got_subcommand(scan_j_cmd))
      return cmd_scan_j(args, j_range, cold_start, descend, t_max, wall_cap,
                        n_max, kick);
    if (app.got_subcommand(scan_ua_cmd))
      return cmd_scan_ua(args, u_range, a_range, threads);
    if (app.got_subcommand(single)) return cmd_single_site(args);
    if (app.got_subcommand(protocol))
      return cmd_gutzwiller_protocol(args, n_max, kick, trunc_threshold);
    if (app.got_subcommand(correlator))
      return cmd_correlator(args, include_offset, t_max);
    if (app.got_subcommand(rectangle))
      return cmd_rectangle_check(args, rect_n, rect_k, rect_span, rect_step);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
