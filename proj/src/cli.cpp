#include "spinsim/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "spinsim/config.hpp"
#include "spinsim/errors.hpp"
#include "spinsim/experiments.hpp"
#include "spinsim/io.hpp"
#include "spinsim/model.hpp"
#include "spinsim/parallel.hpp"
#include "spinsim/units.hpp"

namespace spinsim {
namespace {

constexpr const char* kVersion = "1.0.0";

struct GlobalOpts {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 0;  // 0 = hardware concurrency
  std::string out_dir = ".";
  std::string format = "json";
  std::vector<std::string> sets;
};

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

// Collects artifacts so the manifest lists every file the run produced.
struct RunContext {
  ExperimentConfig cfg;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out_dir;
  std::string format;
  RunManifest manifest;
  std::chrono::steady_clock::time_point t_start;

  std::string path_of(const std::string& name) const {
    return (std::filesystem::path(out_dir) / name).string();
  }

  void emit(const std::string& name, const std::string& content) {
    std::filesystem::create_directories(out_dir);
    const std::string path = path_of(name);
    write_text_file(path, content);
    manifest.outputs.push_back(path);
  }

  void echo_config(JsonObject& j) const {
    j.set_string("config", serialize_config(cfg));
    j.set_string("config_hash", config_hash(cfg));
    j.set_u64("seed", seed);
  }

  void finish(const std::string& subcommand) {
    manifest.subcommand = subcommand;
    manifest.config_hash = config_hash(cfg);
    manifest.seed = seed;
    manifest.version = kVersion;
    manifest.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - t_start)
                           .count();
    std::filesystem::create_directories(out_dir);
    write_text_file(path_of("manifest.json"), manifest_to_json(manifest));
  }
};

RunContext make_context(const GlobalOpts& g) {
  RunContext ctx;
  ctx.cfg = load_config(g.config_path, g.sets);
  ctx.seed = g.seed_given ? g.seed : ctx.cfg.sim.seed;
  ctx.threads = resolve_threads(g.threads);
  ctx.out_dir = g.out_dir;
  ctx.format = g.format;
  ctx.t_start = std::chrono::steady_clock::now();
  return ctx;
}

// ---------------------------------------------------------------- rates --

int cmd_rates(RunContext& ctx) {
  const RateReport r = rate_report(ctx.cfg);
  JsonObject j;
  ctx.echo_config(j);
  j.set_number("n_bar", r.n_bar);
  j.set_number("gamma_max", r.gamma_max);
  j.set_number("gamma_eff", r.gamma_eff);
  j.set_number("gamma_flip", r.gamma_flip);
  j.set_number("sn", r.sn);
  j.set_number("sn_bound", r.sn_bound);
  j.set_number("kappa_derived", r.kappa_derived);
  j.set_number("delta_zeeman", r.delta_zeeman);
  j.set_number("theta", r.theta);
  j.set_number("q_free", r.q_free);
  j.set_number("free_space_counts", r.free_space_counts);
  j.set_number("readout_error_4", r.readout_error_4);
  ctx.emit("rates.json", j.dump());

  if (ctx.format == "csv") {
    std::string csv = "key,value\n";
    const std::pair<const char*, double> kv[] = {
        {"n_bar", r.n_bar},
        {"gamma_max", r.gamma_max},
        {"gamma_eff", r.gamma_eff},
        {"gamma_flip", r.gamma_flip},
        {"sn", r.sn},
        {"sn_bound", r.sn_bound},
        {"kappa_derived", r.kappa_derived},
        {"delta_zeeman", r.delta_zeeman},
        {"theta", r.theta},
        {"q_free", r.q_free},
        {"free_space_counts", r.free_space_counts},
        {"readout_error_4", r.readout_error_4}};
    for (const auto& [k, v] : kv)
      csv += std::string(k) + "," + format_g9(v) + "\n";
    ctx.emit("rates.csv", csv);
  }

  std::printf("n_bar             %12s\n", format_g9(r.n_bar).c_str());
  std::printf("gamma_max   /s    %12s\n", format_g9(r.gamma_max).c_str());
  std::printf("gamma_eff   /s    %12s\n", format_g9(r.gamma_eff).c_str());
  std::printf("gamma_flip  /s    %12s\n", format_g9(r.gamma_flip).c_str());
  std::printf("sn                %12s\n", format_g9(r.sn).c_str());
  std::printf("sn_bound          %12s\n", format_g9(r.sn_bound).c_str());
  std::printf("kappa_derived r/s %12s\n", format_g9(r.kappa_derived).c_str());
  std::printf("delta_zeeman  r/s %12s\n", format_g9(r.delta_zeeman).c_str());
  std::printf("theta         rad %12s\n", format_g9(r.theta).c_str());
  std::printf("q_free            %12s\n", format_g9(r.q_free).c_str());
  std::printf("free_space_counts %12s\n",
              format_g9(r.free_space_counts).c_str());
  std::printf("readout_error_4   %12s\n",
              format_g9(r.readout_error_4).c_str());
  ctx.finish("rates");
  return 0;
}

// -------------------------------------------------------------- transit --

int cmd_transit(RunContext& ctx, int drops, const std::string& dump_events,
                const std::string& dump_trajectories, int dump_drop) {
  const int n_drops = drops > 0 ? drops : ctx.cfg.sim.drops;
  const TransitStats stats =
      run_transit_campaign(n_drops, ctx.cfg, ctx.seed, ctx.threads);

  JsonObject j;
  ctx.echo_config(j);
  j.set_int("n_drops", static_cast<long long>(stats.n_drops));
  j.set_int("n_atoms", static_cast<long long>(stats.n_atoms));
  j.set_int("n_coincidences", static_cast<long long>(stats.n_coincidences));
  j.set_number("mean_counts_per_transit", stats.mean_counts_per_transit);
  j.set_number("amplitude", stats.gauss_fit.amplitude);
  j.set_number("t_peak_s", stats.gauss_fit.t_peak);
  j.set_number("half_width_s", stats.gauss_fit.sigma_t);
  j.set_number("offset", stats.gauss_fit.offset);
  j.set_number("eta_gate_window", stats.eta_gate_window);
  j.set_number("eta_peak_window", stats.eta_peak_window);
  std::vector<double> hist;
  for (std::size_t c : stats.counts_per_transit_hist)
    hist.push_back(static_cast<double>(c));
  j.set_number_array("counts_per_transit_hist", hist);
  ctx.emit("transit.json", j.dump());

  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < stats.profile_t_s.size(); ++i)
    rows.push_back({stats.profile_t_s[i] * 1e6, stats.profile_rate[i]});
  ctx.emit("fig3e_profile.csv", table_to_csv("t_us,rate_per_s", rows));

  if (!dump_events.empty()) {
    const Timeline tl = transit_drop_events(dump_drop, ctx.cfg, ctx.seed);
    write_text_file(dump_events, events_to_csv(tl));
    ctx.manifest.outputs.push_back(dump_events);
  }
  if (!dump_trajectories.empty()) {
    std::vector<std::vector<double>> trows;
    for (int d = 0; d < n_drops; ++d)
      for (const Trajectory& tr :
           transit_drop_trajectories(d, ctx.cfg, ctx.seed))
        trows.push_back({tr.t_entry, tr.entry[0], tr.entry[2], tr.velocity[0],
                         tr.velocity[2], tr.phase});
    write_text_file(dump_trajectories,
                    table_to_csv("t_entry,x0,z0,vx,vz,phase", trows));
    ctx.manifest.outputs.push_back(dump_trajectories);
  }

  std::printf("drops %zu  atoms %zu  coincidences %zu\n", stats.n_drops,
              stats.n_atoms, stats.n_coincidences);
  std::printf("counts/transit %s  t_peak %s us  half-width %s us\n",
              format_g9(stats.mean_counts_per_transit).c_str(),
              format_g9(stats.gauss_fit.t_peak * 1e6).c_str(),
              format_g9(stats.gauss_fit.sigma_t * 1e6).c_str());
  std::printf("eta(6us,36us) %s  eta(peak window) %s\n",
              format_g9(stats.eta_gate_window).c_str(),
              format_g9(stats.eta_peak_window).c_str());
  ctx.finish("transit");
  return 0;
}

// ------------------------------------------------------------- coincide --

int cmd_coincide(RunContext& ctx, const std::string& events_path,
                 std::int64_t t_coin_ns, double t_win_us) {
  const Timeline events = events_from_csv(read_text_file(events_path));
  const std::int64_t t_win_ns =
      static_cast<std::int64_t>(std::llround(t_win_us * 1e3));
  const std::vector<CoincidenceEvent> windows =
      detect_coincidences(events, t_coin_ns, t_win_ns);
  ctx.emit("windows.csv", windows_to_csv(windows, events));

  JsonObject j;
  ctx.echo_config(j);
  j.set_int("n_events", static_cast<long long>(events.size()));
  j.set_int("n_windows", static_cast<long long>(windows.size()));
  j.set_int("t_coin_ns", t_coin_ns);
  j.set_int("t_win_ns", t_win_ns);
  ctx.emit("coincide.json", j.dump());
  std::printf("%zu events -> %zu windows\n", events.size(), windows.size());
  ctx.finish("coincide");
  return 0;
}

// -------------------------------------------------------------- measure --

JsonObject projective_to_json(const ProjectiveResult& r) {
  JsonObject j;
  j.set_string("pulse", pulse_name(r.pulse));
  j.set_int("n_in", r.n_in);
  j.set_int("n_suc", r.n_suc);
  j.set_number("eta0_used", r.eta0_used);
  j.set_number("beta2_hat", r.beta2_hat);
  j.set_number("sigma_beta2", r.sigma_beta2);
  j.set_number("mean_n_count", r.mean_n_count);
  j.set_int("trials_consumed", r.trials_consumed);
  return j;
}

int cmd_measure(RunContext& ctx, const std::string& pulse, int n_in,
                double eta0, bool calibrate) {
  double eta0_used = eta0;
  JsonObject j;
  ctx.echo_config(j);
  if (calibrate) {
    const Calibration cal =
        calibrate_eta0_zeta(4.0, ctx.cfg, ctx.seed, ctx.threads);
    ctx.cfg.detection.zeta = cal.zeta;
    eta0_used = cal.eta0;
    JsonObject cj;
    cj.set_number("zeta", cal.zeta);
    cj.set_number("mean_n_count", cal.mean_n_count);
    cj.set_number("eta0", cal.eta0);
    cj.set_number("eta0_sigma", cal.eta0_sigma);
    cj.set_int("n_protocols", cal.n_protocols);
    j.set_object("calibration", cj);
    std::printf("calibrated zeta %s  eta0 %s +- %s\n",
                format_g9(cal.zeta).c_str(), format_g9(cal.eta0).c_str(),
                format_g9(cal.eta0_sigma).c_str());
  }

  std::vector<PulseKind> pulses;
  if (pulse == "all")
    pulses = {PulseKind::kSigmaMinus, PulseKind::kSigmaPerp,
              PulseKind::kSigmaPlus};
  else
    pulses = {pulse_from_name(pulse)};

  std::string csv = "pulse,beta2_hat,sigma\n";
  std::vector<std::string> rendered;
  for (PulseKind pk : pulses) {
    const ProjectiveResult r = run_projective_campaign(
        pk, n_in, eta0_used, ctx.cfg, ctx.seed, ctx.threads);
    std::string d = projective_to_json(r).dump();
    if (!d.empty() && d.back() == '\n') d.pop_back();
    rendered.push_back(d);
    csv += std::string(pulse_name(pk)) + "," + format_g9(r.beta2_hat) + "," +
           format_g9(r.sigma_beta2) + "\n";
    std::printf("%-12s beta2_hat %s +- %s  (N_suc %d / N_in %d, mean "
                "N_count %s)\n",
                pulse_name(pk), format_g9(r.beta2_hat).c_str(),
                format_g9(r.sigma_beta2).c_str(), r.n_suc, r.n_in,
                format_g9(r.mean_n_count).c_str());
  }
  j.set_raw("results", json_array(rendered));
  ctx.emit("measure.json", j.dump());
  ctx.emit("fig4b.csv", csv);
  ctx.finish("measure");
  return 0;
}

// ---------------------------------------------------------------- sweep --

int cmd_sweep(RunContext& ctx, const std::string& powers_arg,
              double mean_n_count) {
  std::vector<double> powers;
  if (powers_arg.empty()) {
    const double pr = ctx.cfg.drive.p_ref_w;
    for (double f : {0.125, 0.25, 0.375, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75,
                     2.0})
      powers.push_back(f * pr);
  } else {
    std::stringstream ss(powers_arg);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        powers.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw UsageError("sweep: bad power value '" + tok + "'");
      }
    }
  }
  const SweepResult res =
      run_power_sweep(powers, ctx.cfg, ctx.seed, ctx.threads, mean_n_count);

  JsonObject j;
  ctx.echo_config(j);
  std::vector<std::string> rows;
  std::vector<std::vector<double>> csv_rows;
  for (const SweepRow& r : res.rows) {
    JsonObject rj;
    rj.set_number("power_w", r.power_w);
    rj.set_number("n_minus", r.n_minus);
    rj.set_number("n_plus", r.n_plus);
    std::string d = rj.dump();
    if (!d.empty() && d.back() == '\n') d.pop_back();
    rows.push_back(d);
    csv_rows.push_back({r.power_w * 1e6, r.n_minus, r.n_plus});
  }
  j.set_raw("rows", json_array(rows));
  j.set_number("fit_minus_slope", res.fit_minus_slope);
  j.set_number("fit_plus_intercept", res.fit_plus.intercept);
  j.set_number("fit_plus_slope", res.fit_plus.slope);
  j.set_number("p_ref_w", res.p_ref_w);
  j.set_number("sn_lower", res.sn_lower);
  j.set_number("sn_lower_fit", res.sn_lower_fit);
  j.set_number("delta_beta2", res.delta_beta2);
  ctx.emit("sweep.json", j.dump());
  ctx.emit("fig5.csv", table_to_csv("power_uW,n_minus,n_plus", csv_rows));
  std::printf("sn_lower %s (fit %s)  delta_beta2 %s\n",
              format_g9(res.sn_lower).c_str(),
              format_g9(res.sn_lower_fit).c_str(),
              format_g9(res.delta_beta2).c_str());
  ctx.finish("sweep");
  return 0;
}

// --------------------------------------------------------------- design --

int cmd_design(RunContext& ctx, int grid) {
  if (grid < 4) throw UsageError("design: --grid must be >= 4");
  const double a = hz_to_angular(ctx.cfg.atom.a_hz);
  std::vector<double> deltas;
  deltas.reserve(static_cast<std::size_t>(grid) - 1);
  for (int i = 1; i < grid; ++i)
    deltas.push_back(a * static_cast<double>(i) / grid);
  const SnCurve curve = sn_curve(deltas, ctx.cfg);

  JsonObject j;
  ctx.echo_config(j);
  j.set_int("grid", grid);
  j.set_number("delta_argmax", curve.delta_argmax);
  j.set_number("delta_argmax_hz", angular_to_hz(curve.delta_argmax));
  j.set_number("bound", curve.bound);
  ctx.emit("design.json", j.dump());

  std::vector<std::vector<double>> rows;
  for (const SnPoint& p : curve.points)
    rows.push_back({angular_to_hz(p.delta), p.sn});
  ctx.emit("design.csv", table_to_csv("delta_hz,sn", rows));
  std::printf("argmax delta %s Hz  bound %s\n",
              format_g9(angular_to_hz(curve.delta_argmax)).c_str(),
              format_g9(curve.bound).c_str());
  ctx.finish("design");
  return 0;
}

// ------------------------------------------------------------------- g2 --

int cmd_g2(RunContext& ctx, std::int64_t bin_ns, double max_lag_us,
           int transits) {
  if (transits < 1) throw UsageError("g2: --transits must be >= 1");
  std::int64_t max_lag_ns =
      static_cast<std::int64_t>(std::llround(max_lag_us * 1e3));
  if (bin_ns <= 0) throw UsageError("g2: --bin-ns must be > 0");
  max_lag_ns -= max_lag_ns % bin_ns;
  if (max_lag_ns <= 0) throw UsageError("g2: lag range shorter than a bin");

  const RateModel model = RateModel::from_config(ctx.cfg);
  constexpr std::uint64_t kG2Salt = 3ull << 41;
  std::vector<Timeline> timelines(static_cast<std::size_t>(transits));
  parallel_for(timelines.size(), ctx.threads, [&](std::size_t k) {
    const std::uint64_t stream = kG2Salt + k;
    Rng traj_rng(ctx.seed, stream, Purpose::kTrajectory);
    const Trajectory traj =
        sample_trajectory(traj_rng, ctx.cfg.source, ctx.cfg.cavity);
    timelines[k] =
        simulate_transit(traj, Spin::kDown, BeamSchedule::always_on(),
                         ctx.cfg, model, ctx.seed, stream, false)
            .events;
  });
  std::size_t n_events = 0;
  for (const Timeline& tl : timelines) n_events += tl.size();
  if (n_events < 2)
    throw StatisticsError("g2: fewer than 2 events; raise --transits");

  const std::vector<G2Point> g2 =
      g2_histogram_multi(timelines, bin_ns, max_lag_ns);
  JsonObject j;
  ctx.echo_config(j);
  j.set_int("bin_ns", bin_ns);
  j.set_int("max_lag_ns", max_lag_ns);
  j.set_int("transits", transits);
  j.set_int("n_events", static_cast<long long>(n_events));
  ctx.emit("g2.json", j.dump());
  std::vector<std::vector<double>> rows;
  for (const G2Point& p : g2) rows.push_back({p.lag_ns, p.g2});
  ctx.emit("g2.csv", table_to_csv("lag_ns,g2", rows));
  std::printf("%zu events over %d transits; g2(first bin) %s\n", n_events,
              transits, format_g9(g2.front().g2).c_str());
  ctx.finish("g2");
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Monte Carlo simulator and analytic toolkit for "
               "cavity-enhanced single-spin readout"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  GlobalOpts g;
  app.add_option("--config", g.config_path, "Config file (INI-style)");
  auto* seed_opt = app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--threads", g.threads, "Worker threads (0 = auto)");
  app.add_option("--out", g.out_dir, "Output directory");
  app.add_option("--format", g.format, "Primary output format")
      ->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--set", g.sets, "Override, section.key=value (repeatable)");

  auto* c_rates = app.add_subcommand("rates", "Analytic rate report");

  int tr_drops = 0;
  int tr_dump_drop = 0;
  std::string tr_dump_events, tr_dump_traj;
  auto* c_transit = app.add_subcommand("transit", "Transit campaign");
  c_transit->add_option("--drops", tr_drops, "Hold intervals to simulate");
  c_transit->add_option("--dump-events", tr_dump_events,
                        "Write one drop's events CSV here");
  c_transit->add_option("--dump-drop", tr_dump_drop,
                        "Which drop --dump-events writes");
  c_transit->add_option("--dump-trajectories", tr_dump_traj,
                        "Write sampled trajectories CSV here");

  std::string co_events;
  std::int64_t co_t_coin_ns = 600;
  double co_t_win_us = 36.0;
  auto* c_coincide =
      app.add_subcommand("coincide", "Offline coincidence extraction");
  c_coincide->add_option("--events", co_events, "Event CSV to process")
      ->required();
  c_coincide->add_option("--t-coin-ns", co_t_coin_ns, "Pair spacing, ns");
  c_coincide->add_option("--t-win-us", co_t_win_us, "Window length, us");

  std::string me_pulse = "sigma_minus";
  int me_n_in = 100;
  double me_eta0 = 0.86;
  bool me_calibrate = false;
  auto* c_measure =
      app.add_subcommand("measure", "Projective-measurement campaign");
  c_measure->add_option("--pulse", me_pulse, "Pulse kind or 'all'");
  c_measure->add_option("--n-in", me_n_in, "Protocols to complete");
  c_measure->add_option("--eta0", me_eta0, "Heralded success probability");
  c_measure->add_flag("--calibrate", me_calibrate,
                      "Calibrate zeta and eta0 first");

  std::string sw_powers;
  double sw_mean_n = 4.0;
  auto* c_sweep = app.add_subcommand("sweep", "Excitation power sweep");
  c_sweep->add_option("--powers", sw_powers, "Comma-separated powers, W");
  c_sweep->add_option("--mean-n-count", sw_mean_n,
                      "Mean N_count for the systematic bound");

  int de_grid = 512;
  auto* c_design = app.add_subcommand("design", "S/N vs detuning table");
  c_design->add_option("--grid", de_grid, "Detuning grid size");

  std::int64_t g2_bin_ns = 100;
  double g2_max_lag_us = 10.0;
  int g2_transits = 200;
  auto* c_g2 = app.add_subcommand("g2", "Photon correlation histogram");
  c_g2->add_option("--bin-ns", g2_bin_ns, "Lag bin width, ns");
  c_g2->add_option("--max-lag-us", g2_max_lag_us, "Maximum lag, us");
  c_g2->add_option("--transits", g2_transits, "Transits to simulate");

  for (CLI::App* sub : {c_rates, c_transit, c_coincide, c_measure, c_sweep,
                        c_design, c_g2})
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    g.seed_given = seed_opt->count() > 0;
    RunContext ctx = make_context(g);
    if (c_rates->parsed()) return cmd_rates(ctx);
    if (c_transit->parsed())
      return cmd_transit(ctx, tr_drops, tr_dump_events, tr_dump_traj,
                         tr_dump_drop);
    if (c_coincide->parsed())
      return cmd_coincide(ctx, co_events, co_t_coin_ns, co_t_win_us);
    if (c_measure->parsed())
      return cmd_measure(ctx, me_pulse, me_n_in, me_eta0, me_calibrate);
    if (c_sweep->parsed()) return cmd_sweep(ctx, sw_powers, sw_mean_n);
    if (c_design->parsed()) return cmd_design(ctx, de_grid);
    if (c_g2->parsed())
      return cmd_g2(ctx, g2_bin_ns, g2_max_lag_us, g2_transits);
    std::fprintf(stderr, "error: no subcommand\n");
    return 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const StatisticsError& e) {
    std::fprintf(stderr, "statistics error: %s\n", e.what());
    return 3;
  } catch (const FitError& e) {
    std::fprintf(stderr, "fit error: %s\n", e.what());
    return 3;
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace spinsim
