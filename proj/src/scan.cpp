#include "ddbh/scan.hpp"

#include "ddbh/dnls.hpp"
#include "ddbh/gutzwiller.hpp"
#include "ddbh/io.hpp"

#include <json.hpp>

#include <atomic>
#include <bit>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <thread>

namespace ddbh::scan {

namespace {

using nlohmann::json;

std::mt19937_64 point_rng(uint64_t seed, double j) {
  const uint64_t h = std::bit_cast<uint64_t>(j);
  return std::mt19937_64(seed * 0x9E3779B97F4A7C15ull ^ (h + 0xD1B54A32D192ED03ull));
}

PhaseRecord make_record(double j, Tier tier, const SteadyVerdict& verdict,
                        const Trajectory& traj, double wall_seconds,
                        bool timed_out) {
  PhaseRecord rec;
  rec.j = j;
  rec.tier = tier;
  rec.status = verdict.status;
  rec.residual = verdict.residual;
  rec.period = verdict.period;
  rec.profile = classification_profile(verdict, traj);
  rec.label = classify_mode(verdict, rec.profile);
  rec.center_amp = rec.profile(traj.center);
  if (verdict.status == SteadyStatus::periodic && verdict.extremal_profiles) {
    rec.center_amp_min = verdict.extremal_profiles->first(traj.center);
    rec.center_amp_max = verdict.extremal_profiles->second(traj.center);
  } else {
    rec.center_amp_min = rec.center_amp_max = rec.center_amp;
  }
  rec.elapsed_seconds = wall_seconds;
  rec.timed_out = timed_out;
  return rec;
}

json record_to_json(const PhaseRecord& r) {
  json j{{"j", r.j},
         {"tier", to_string(r.tier)},
         {"label", to_string(r.label)},
         {"status", to_string(r.status)},
         {"residual", r.residual},
         {"center_amp", r.center_amp},
         {"center_amp_max", r.center_amp_max},
         {"center_amp_min", r.center_amp_min},
         {"elapsed_seconds", r.elapsed_seconds},
         {"timed_out", r.timed_out},
         {"profile", std::vector<double>(r.profile.data(),
                                         r.profile.data() + r.profile.size())}};
  if (r.period) j["period"] = *r.period;
  return j;
}

PhaseRecord record_from_json(const json& j) {
  PhaseRecord r;
  r.j = j.at("j").get<double>();
  r.tier = tier_from_string(j.at("tier").get<std::string>());
  r.label = mode_label_from_string(j.at("label").get<std::string>());
  const std::string st = j.at("status").get<std::string>();
  for (SteadyStatus s : {SteadyStatus::steady, SteadyStatus::periodic,
                         SteadyStatus::transient, SteadyStatus::diverged})
    if (st == to_string(s)) r.status = s;
  r.residual = j.at("residual").get<double>();
  if (j.contains("period")) r.period = j.at("period").get<double>();
  r.center_amp = j.at("center_amp").get<double>();
  r.center_amp_max = j.at("center_amp_max").get<double>();
  r.center_amp_min = j.at("center_amp_min").get<double>();
  r.elapsed_seconds = j.at("elapsed_seconds").get<double>();
  r.timed_out = j.at("timed_out").get<bool>();
  auto prof = j.at("profile").get<std::vector<double>>();
  r.profile = Eigen::Map<const VectorXd>(prof.data(), prof.size());
  return r;
}

// --- tier adapters -------------------------------------------------------

struct SoeTier {
  using State = CorrelationState;
  static constexpr Tier tier = Tier::soe;

  static State cold(const ModelParams& pj, int center, const JScanOptions&) {
    return soe::cold_start_state(pj, center);
  }
  static State perturb(State s, const VectorXcd& noise) {
    s.first += noise;
    return s;
  }
  static PhaseRecord settle(const State& s0, const ModelParams& pj,
                            const JScanOptions& opt, State& final_state) {
    auto res = soe::evolve_until_settled(s0, pj, opt.settle);
    final_state = res.final_state;
    return make_record(pj.hopping, tier, res.verdict, res.trajectory,
                       res.wall_seconds, res.hit_wall_cap);
  }
  static json state_to_json(const State& s) {
    return io::correlation_state_to_json(s);
  }
  static State state_from_json(const json& j) {
    return io::correlation_state_from_json(j);
  }
};

struct DnlsTier {
  using State = ClassicalField;
  static constexpr Tier tier = Tier::dnls;

  static State cold(const ModelParams& pj, int center, const JScanOptions&) {
    try {
      return dnls::anti_continuous_soliton(pj, center);
    } catch (const std::runtime_error&) {
      // single stable root: homogeneous start
      auto roots = dnls::single_site_intensities(pj.single_site());
      return VectorXcd::Constant(pj.n_sites, roots.front().amplitude);
    }
  }
  static State perturb(State s, const VectorXcd& noise) { return s + noise; }
  static PhaseRecord settle(const State& s0, const ModelParams& pj,
                            const JScanOptions& opt, State& final_state) {
    dnls::SettleOptions so;
    so.evolve = opt.settle.evolve;
    so.t_max = opt.settle.t_max;
    so.wall_cap_seconds = opt.settle.wall_cap_seconds;
    auto res = dnls::evolve_until_settled(s0, pj, so);
    final_state = res.final_field;
    return make_record(pj.hopping, tier, res.verdict, res.trajectory,
                       res.wall_seconds, res.hit_wall_cap);
  }
  static json state_to_json(const State& s) {
    json arr = json::array();
    for (long i = 0; i < s.size(); ++i)
      arr.push_back({s(i).real(), s(i).imag()});
    return {{"field", arr}};
  }
  static State state_from_json(const json& j) {
    const auto& arr = j.at("field");
    State s(arr.size());
    for (long i = 0; i < s.size(); ++i)
      s(i) = cplx(arr[i][0].get<double>(), arr[i][1].get<double>());
    return s;
  }
};

struct GutzwillerTier {
  using State = GutzwillerState;
  static constexpr Tier tier = Tier::gutzwiller;

  static State cold(const ModelParams& pj, int center,
                    const JScanOptions& opt) {
    return gutzwiller::kick_protocol_initial(pj, opt.n_max, center,
                                             opt.kick_occupation);
  }
  static State perturb(State s, const VectorXcd&) { return s; }
  static PhaseRecord settle(const State& s0, const ModelParams& pj,
                            const JScanOptions& opt, State& final_state) {
    auto res = gutzwiller::evolve_until_settled(s0, pj, opt.settle.evolve,
                                                opt.settle.t_max,
                                                opt.settle.wall_cap_seconds);
    final_state = res.final_state;
    return make_record(pj.hopping, tier, res.verdict, res.trajectory,
                       res.wall_seconds, res.hit_wall_cap);
  }
  static json state_to_json(const State& s) {
    return io::gutzwiller_state_to_json(s);
  }
  static State state_from_json(const json& j) {
    return io::gutzwiller_state_from_json(j);
  }
};

template <class T>
JScanResult scan_j_impl(const ModelParams& tmpl,
                        const std::vector<double>& j_values,
                        const JScanOptions& opt) {
  using State = typename T::State;
  JScanResult result;
  if (j_values.empty()) return result;

  if (!opt.cold_start && j_values.size() > 1) {
    // monotone in either direction: the sweep may descend from the unique
    // high-J homogeneous phase as well as ascend from J = 0
    bool ascending = true, descending = true;
    for (size_t i = 1; i < j_values.size(); ++i) {
      ascending &= j_values[i] >= j_values[i - 1];
      descending &= j_values[i] <= j_values[i - 1];
    }
    if (!ascending && !descending)
      throw std::invalid_argument(
          "adiabatic sweep needs monotone j_values (or cold_start)");
  }

  const int center = tmpl.n_sites / 2;
  std::vector<State> states;
  states.reserve(j_values.size());

  namespace fs = std::filesystem;
  const bool checkpointing = !opt.checkpoint_dir.empty();
  fs::path ckpt_file;
  json ckpt;
  size_t start_index = 0;
  if (checkpointing) {
    fs::create_directories(opt.checkpoint_dir);
    ckpt_file = fs::path(opt.checkpoint_dir) / "checkpoint.json";
    if (fs::exists(ckpt_file)) {
      ckpt = io::load_json(ckpt_file.string());
      if (ckpt.at("tier").get<std::string>() != to_string(T::tier) ||
          ckpt.at("seed").get<uint64_t>() != opt.seed)
        throw std::runtime_error(
            "checkpoint does not match this scan (tier/seed differ)");
      for (const auto& rj : ckpt.at("records")) {
        PhaseRecord rec = record_from_json(rj);
        if (start_index < j_values.size() &&
            std::abs(rec.j - j_values[start_index]) < 1e-12) {
          result.records.push_back(rec);
          states.push_back(T::state_from_json(io::load_json(
              (fs::path(opt.checkpoint_dir) /
               ("state_" + std::to_string(start_index) + ".json"))
                  .string())));
          ++start_index;
        }
      }
    } else {
      ckpt = {{"tier", to_string(T::tier)},
              {"seed", opt.seed},
              {"records", json::array()}};
    }
  }

  auto run_point = [&](double j, const State* seed,
                       State& out_state) -> PhaseRecord {
    ModelParams pj = tmpl.at_hopping(j);
    auto rng = point_rng(opt.seed, j);
    State initial = seed ? *seed : T::cold(pj, center, opt);
    initial = T::perturb(
        std::move(initial),
        soe::localized_perturbation(pj.n_sites, center, opt.perturbation, rng));
    return T::settle(initial, pj, opt, out_state);
  };

  for (size_t i = start_index; i < j_values.size(); ++i) {
    const State* seed =
        (!opt.cold_start && !states.empty()) ? &states.back() : nullptr;
    State out_state;
    PhaseRecord rec = run_point(j_values[i], seed, out_state);
    states.push_back(std::move(out_state));
    result.records.push_back(rec);
    if (opt.on_point) opt.on_point(rec);
    if (checkpointing) {
      io::save_json((fs::path(opt.checkpoint_dir) /
                     ("state_" + std::to_string(i) + ".json"))
                        .string(),
                    T::state_to_json(states.back()));
      ckpt["records"].push_back(record_to_json(rec));
      io::save_json(ckpt_file.string(), ckpt);
    }
  }

  // label-change boundaries, refined by adiabatic bisection from the left
  for (size_t i = 0; i + 1 < result.records.size(); ++i) {
    const auto& lo_rec = result.records[i];
    const auto& hi_rec = result.records[i + 1];
    if (lo_rec.label == hi_rec.label) continue;
    Bifurcation bif;
    bif.from = lo_rec.label;
    bif.to = hi_rec.label;
    // a: sweep-predecessor side, b: successor side (either J direction)
    double j_a = lo_rec.j, j_b = hi_rec.j;
    if (opt.refine_bifurcations) {
      State left = states[i];
      while (std::abs(j_b - j_a) > opt.bifurcation_dj) {
        const double j_mid = 0.5 * (j_a + j_b);
        State mid_state;
        PhaseRecord mid =
            run_point(j_mid, opt.cold_start ? nullptr : &left, mid_state);
        // labels matching neither side (unresolved transients in between)
        // count toward the predecessor side
        if (mid.label != hi_rec.label) {
          j_a = j_mid;
          left = std::move(mid_state);
        } else {
          j_b = j_mid;
        }
      }
    }
    bif.j_lo = std::min(j_a, j_b);
    bif.j_hi = std::max(j_a, j_b);
    bif.estimate = 0.5 * (j_a + j_b);
    result.bifurcations.push_back(bif);
  }
  return result;
}

void parallel_for(long n, int n_threads, const std::function<void(long)>& fn) {
  if (n_threads <= 0)
    n_threads = static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::max(1, std::min<int>(n_threads, static_cast<int>(n)));
  if (n_threads == 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (int t = 0; t < n_threads; ++t)
    pool.emplace_back([&] {
      for (long i = next++; i < n; i = next++) fn(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace

JScanResult scan_j(const ModelParams& tmpl, const std::vector<double>& j_values,
                   Tier tier, const JScanOptions& opt) {
  switch (tier) {
    case Tier::dnls: return scan_j_impl<DnlsTier>(tmpl, j_values, opt);
    case Tier::soe: return scan_j_impl<SoeTier>(tmpl, j_values, opt);
    default: return scan_j_impl<GutzwillerTier>(tmpl, j_values, opt);
  }
}

std::vector<UaCell> scan_ua(const std::vector<double>& u_values,
                            const std::vector<double>& a_values, Tier tier,
                            const ModelParams& tmpl, int n_threads) {
  std::vector<UaCell> cells(u_values.size() * a_values.size());
  const long n_a = static_cast<long>(a_values.size());
  parallel_for(static_cast<long>(cells.size()), n_threads, [&](long idx) {
    UaCell& cell = cells[idx];
    cell.u = u_values[idx / n_a];
    cell.a = a_values[idx % n_a];
    ModelParams pj = tmpl.single_site();
    pj.interaction = cell.u;
    pj.drive = cell.a;
    try {
      cell.dnls_count =
          static_cast<int>(dnls::single_site_intensities(pj).size());
      if (tier != Tier::dnls) {
        auto soe_res = soe::single_site_count(pj);
        cell.soe_count = static_cast<int>(soe_res.solutions.size());
        if (soe_res.converged == 0) cell.resolved = false;
      }
    } catch (const std::exception&) {
      cell.resolved = false;
    }
  });
  return cells;
}

std::string phase_records_csv(const std::vector<PhaseRecord>& records) {
  std::ostringstream out;
  out << "j,tier,label,status,center_amp,center_amp_max,center_amp_min,"
         "residual,period,elapsed_seconds,timed_out\n";
  for (const auto& r : records) {
    out << io::format_double(r.j) << ',' << to_string(r.tier) << ','
        << to_string(r.label) << ',' << to_string(r.status) << ','
        << io::format_double(r.center_amp) << ','
        << io::format_double(r.center_amp_max) << ','
        << io::format_double(r.center_amp_min) << ','
        << io::format_double(r.residual) << ','
        << (r.period ? io::format_double(*r.period) : "") << ','
        << io::format_double(r.elapsed_seconds) << ',' << (r.timed_out ? 1 : 0)
        << '\n';
  }
  return out.str();
}

std::string heatmap_csv(const std::vector<PhaseRecord>& records) {
  std::ostringstream out;
  out << "j,site,amplitude\n";
  for (const auto& r : records)
    for (long n = 0; n < r.profile.size(); ++n)
      out << io::format_double(r.j) << ',' << n << ','
          << io::format_double(r.profile(n)) << '\n';
  return out.str();
}

std::string bifurcations_csv(const std::vector<Bifurcation>& bifurcations) {
  std::ostringstream out;
  out << "j_lo,j_hi,estimate,from,to\n";
  for (const auto& b : bifurcations)
    out << io::format_double(b.j_lo) << ',' << io::format_double(b.j_hi) << ','
        << io::format_double(b.estimate) << ',' << to_string(b.from) << ','
        << to_string(b.to) << '\n';
  return out.str();
}

std::string ua_grid_csv(const std::vector<UaCell>& cells) {
  std::ostringstream out;
  out << "u,a,dnls_count,soe_count,resolved\n";
  for (const auto& c : cells)
    out << io::format_double(c.u) << ',' << io::format_double(c.a) << ','
        << c.dnls_count << ',' << c.soe_count << ',' << (c.resolved ? 1 : 0)
        << '\n';
  return out.str();
}

std::vector<double> parse_range(const std::string& spec) {
  std::vector<double> out;
  if (spec.find(':') != std::string::npos) {
    double lo, hi, step;
    char c1, c2;
    std::istringstream in(spec);
    if (!(in >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' ||
        step <= 0)
      throw std::invalid_argument("bad range '" + spec + "' (want lo:hi:step)");
    for (double v = lo; v <= hi + 1e-9 * step; v += step)
      out.push_back(std::abs(v) < 1e-15 ? 0.0 : v);
    return out;
  }
  std::istringstream in(spec);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  return out;
}

}  // namespace ddbh::scan
