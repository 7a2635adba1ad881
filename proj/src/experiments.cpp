#include "spinsim/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>

#include "spinsim/errors.hpp"
#include "spinsim/parallel.hpp"
#include "spinsim/units.hpp"

namespace spinsim {
namespace {

// Stream-id layout.  Protocol trials use the bare trial index; drop-based
// campaigns salt the high bits so streams never collide across campaigns.
constexpr std::uint64_t kTransitSalt = 1ull << 40;
constexpr std::uint64_t kSweepSalt = 1ull << 41;

std::uint64_t transit_stream(int drop) {
  return kTransitSalt + (static_cast<std::uint64_t>(drop) << 16);
}

std::uint64_t sweep_stream(std::size_t power_idx, int branch, int drop) {
  return kSweepSalt | (static_cast<std::uint64_t>(branch) << 40) |
         (power_idx << 28) | (static_cast<std::uint64_t>(drop) << 12);
}

std::vector<double> poisson_arrivals(double rate_per_s, double t_end_s,
                                     Rng& rng) {
  std::vector<double> out;
  double t = 0;
  while (true) {
    t += rng.exponential(rate_per_s);
    if (t >= t_end_s) break;
    out.push_back(t);
  }
  return out;
}

// integral of a*exp(-(t-mu)^2/(2 sigma^2)) over [t1, t2]
double gauss_area(double a, double mu, double sigma, double t1, double t2) {
  if (sigma <= 0) return 0;
  const double s = sigma * std::sqrt(2.0);
  return a * sigma * std::sqrt(kPi / 2.0) *
         (std::erf((t2 - mu) / s) - std::erf((t1 - mu) / s));
}

// Signal fraction of the fitted profile inside [t1, t2].
double window_purity(const GaussFit& fit, double t1, double t2) {
  const double sg =
      std::max(gauss_area(fit.amplitude, fit.t_peak, fit.sigma_t, t1, t2), 0.0);
  const double so = std::max(fit.offset, 0.0) * (t2 - t1);
  if (sg + so <= 0) return 0;
  return std::clamp(sg / (sg + so), 0.0, 1.0);
}

struct DropOut {
  std::vector<double> profile;  // raw event counts per lag bin
  std::size_t n_coin = 0;
  std::size_t n_atoms = 0;
  std::size_t n_trig = 0;  // coincidences attributed to an atom
  double sum_trig_counts = 0;
  std::vector<std::size_t> trig_counts;  // per-transit counts, trigger atoms
};

struct OwnedEvent {
  PhotonEvent ev;
  int owner;  // atom index within the drop, -1 for dark
};

// One hold interval: Poisson arrivals, per-atom transits, drop-level dark
// counts, coincidence circuit, lag profile, per-transit count attribution.
DropOut simulate_drop(int drop, const ExperimentConfig& cfg,
                      const RateModel& model, std::uint64_t seed,
                      std::int64_t bin_ns, int bins) {
  DropOut out;
  out.profile.assign(static_cast<std::size_t>(bins), 0.0);
  const std::uint64_t base = transit_stream(drop);
  const double hold = cfg.detection.t_hold_s;
  const std::int64_t hold_ns = static_cast<std::int64_t>(
      std::llround(hold * 1e9));

  Rng arr_rng(seed, base, Purpose::kArrivals);
  const std::vector<double> arrivals =
      poisson_arrivals(cfg.source.f_per_s, hold, arr_rng);
  out.n_atoms = arrivals.size();

  const BeamSchedule beam = BeamSchedule::always_on();
  std::vector<OwnedEvent> owned;
  std::vector<std::size_t> atom_counts(arrivals.size(), 0);
  for (std::size_t k = 0; k < arrivals.size(); ++k) {
    const std::uint64_t stream = base + k + 1;
    Rng traj_rng(seed, stream, Purpose::kTrajectory);
    Trajectory traj = sample_trajectory(traj_rng, cfg.source, cfg.cavity);
    traj.t_entry = arrivals[k];
    const TrialRecord rec = simulate_transit(traj, Spin::kDown, beam, cfg,
                                             model, seed, stream, false);
    for (const PhotonEvent& ev : rec.events) {
      if (ev.t_ns >= hold_ns) break;
      owned.push_back({ev, static_cast<int>(k)});
      ++atom_counts[k];
    }
  }

  Rng dark_rng(seed, base, Purpose::kDark);
  for (const PhotonEvent& ev :
       dark_stream(cfg.detection.r_dark_per_s, cfg.detection.n_det, 0.0, hold,
                   dark_rng))
    owned.push_back({ev, -1});

  std::sort(owned.begin(), owned.end(),
            [](const OwnedEvent& a, const OwnedEvent& b) {
              return event_less(a.ev, b.ev);
            });
  // Same nanosecond, same detector: the hardware registers one click.
  owned.erase(std::unique(owned.begin(), owned.end(),
                          [](const OwnedEvent& a, const OwnedEvent& b) {
                            return a.ev.t_ns == b.ev.t_ns &&
                                   a.ev.detector == b.ev.detector;
                          }),
              owned.end());
  Timeline merged;
  merged.reserve(owned.size());
  for (const OwnedEvent& oe : owned) merged.push_back(oe.ev);

  const std::int64_t t_coin_ns = static_cast<std::int64_t>(
      std::llround(cfg.detection.t_coin_s * 1e9));
  const std::int64_t t_win_ns = static_cast<std::int64_t>(
      std::llround(cfg.detection.t_win_s * 1e9));
  const std::vector<CoincidenceEvent> coin =
      detect_coincidences(merged, t_coin_ns, t_win_ns);
  out.n_coin = coin.size();

  const std::int64_t span_ns = bin_ns * bins;
  std::size_t lo = 0;
  for (const CoincidenceEvent& c : coin) {
    while (lo < merged.size() && merged[lo].t_ns < c.t0_ns) ++lo;
    // The triggering pair itself is excluded: the profile is the rate of
    // subsequent detections, not the herald.
    for (std::size_t i = lo + 1; i < merged.size(); ++i) {
      const std::int64_t lag = merged[i].t_ns - c.t0_ns;
      if (lag >= span_ns) break;
      out.profile[static_cast<std::size_t>(lag / bin_ns)] += 1.0;
    }
    // Attribute the coincidence to the atom that produced its trigger
    // photon (the second of the pair).
    if (lo < merged.size() && merged[lo].t_ns == c.t0_ns &&
        owned[lo].owner >= 0) {
      const std::size_t k = static_cast<std::size_t>(owned[lo].owner);
      ++out.n_trig;
      out.sum_trig_counts += static_cast<double>(atom_counts[k]);
      out.trig_counts.push_back(atom_counts[k]);
    }
  }
  return out;
}

struct TrialOut {
  bool triggered = false;
  Trajectory trajectory;
  MeasurementOutcome outcome;
};

TrialOut run_protocol_trial(std::uint64_t trial, PulseKind pulse,
                            const ExperimentConfig& cfg,
                            const RateModel& model, std::uint64_t seed) {
  TrialOut out;
  Rng traj_rng(seed, trial, Purpose::kTrajectory);
  const Trajectory traj = sample_trajectory(traj_rng, cfg.source, cfg.cavity);
  const TrialRecord rec =
      simulate_transit(traj, Spin::kDown, BeamSchedule::always_on(), cfg,
                       model, seed, trial, true);
  const std::int64_t t_coin_ns = static_cast<std::int64_t>(
      std::llround(cfg.detection.t_coin_s * 1e9));
  const std::int64_t t_win_ns = static_cast<std::int64_t>(
      std::llround(cfg.detection.t_win_s * 1e9));
  const auto coin = detect_coincidences(rec.events, t_coin_ns, t_win_ns);
  if (coin.empty()) return out;
  out.triggered = true;
  out.trajectory = traj;
  out.outcome = run_measurement_protocol(traj, coin.front().t0_ns, pulse, cfg,
                                         model, seed, trial);
  return out;
}

}  // namespace

TransitStats run_transit_campaign(int n_drops, const ExperimentConfig& cfg,
                                  std::uint64_t seed, int threads) {
  if (n_drops <= 0) throw UsageError("run_transit_campaign: n_drops <= 0");
  const RateModel model = RateModel::from_config(cfg);
  const int bins = cfg.sim.bins;
  const std::int64_t bin_ns = static_cast<std::int64_t>(
      std::llround(cfg.sim.profile_span_s * 1e9 / bins));
  if (bin_ns <= 0) throw ConfigError("sim.profile_span_s too small for bins");

  std::vector<DropOut> drops(static_cast<std::size_t>(n_drops));
  parallel_for(drops.size(), threads, [&](std::size_t d) {
    drops[d] = simulate_drop(static_cast<int>(d), cfg, model, seed, bin_ns,
                             bins);
  });

  TransitStats stats;
  stats.n_drops = static_cast<std::size_t>(n_drops);
  std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
  std::size_t n_trig = 0;
  double sum_trig = 0;
  std::size_t max_count = 0;
  for (const DropOut& d : drops) {
    stats.n_coincidences += d.n_coin;
    stats.n_atoms += d.n_atoms;
    n_trig += d.n_trig;
    sum_trig += d.sum_trig_counts;
    for (int b = 0; b < bins; ++b) counts[static_cast<std::size_t>(b)] +=
        d.profile[static_cast<std::size_t>(b)];
    for (std::size_t c : d.trig_counts) max_count = std::max(max_count, c);
  }
  if (stats.n_coincidences < 10)
    throw StatisticsError("run_transit_campaign: fewer than 10 coincidences");

  stats.counts_per_transit_hist.assign(max_count + 1, 0);
  for (const DropOut& d : drops)
    for (std::size_t c : d.trig_counts) ++stats.counts_per_transit_hist[c];
  stats.mean_counts_per_transit =
      n_trig > 0 ? sum_trig / static_cast<double>(n_trig) : 0.0;

  const double bin_s = static_cast<double>(bin_ns) * 1e-9;
  stats.profile_t_s.resize(static_cast<std::size_t>(bins));
  stats.profile_rate.resize(static_cast<std::size_t>(bins));
  for (int b = 0; b < bins; ++b) {
    const std::size_t i = static_cast<std::size_t>(b);
    stats.profile_t_s[i] = (b + 0.5) * bin_s;
    stats.profile_rate[i] =
        counts[i] / (static_cast<double>(stats.n_coincidences) * bin_s);
  }

  stats.gauss_fit = fit_gaussian_profile(stats.profile_t_s,
                                         stats.profile_rate);
  stats.eta_gate_window = window_purity(stats.gauss_fit,
                                         cfg.detection.t_gap_s,
                                         cfg.detection.t_win_s);
  const double half = cfg.source.t_transit_s / 2.0;
  stats.eta_peak_window = window_purity(stats.gauss_fit,
                                        stats.gauss_fit.t_peak - half,
                                        stats.gauss_fit.t_peak + half);
  return stats;
}

Timeline transit_drop_events(int drop, const ExperimentConfig& cfg,
                             std::uint64_t seed) {
  const RateModel model = RateModel::from_config(cfg);
  const std::uint64_t base = transit_stream(drop);
  const double hold = cfg.detection.t_hold_s;
  const std::int64_t hold_ns =
      static_cast<std::int64_t>(std::llround(hold * 1e9));
  Rng arr_rng(seed, base, Purpose::kArrivals);
  const std::vector<double> arrivals =
      poisson_arrivals(cfg.source.f_per_s, hold, arr_rng);
  Timeline all;
  for (std::size_t k = 0; k < arrivals.size(); ++k) {
    const std::uint64_t stream = base + k + 1;
    Rng traj_rng(seed, stream, Purpose::kTrajectory);
    Trajectory traj = sample_trajectory(traj_rng, cfg.source, cfg.cavity);
    traj.t_entry = arrivals[k];
    const TrialRecord rec =
        simulate_transit(traj, Spin::kDown, BeamSchedule::always_on(), cfg,
                         model, seed, stream, false);
    for (const PhotonEvent& ev : rec.events)
      if (ev.t_ns < hold_ns) all.push_back(ev);
  }
  Rng dark_rng(seed, base, Purpose::kDark);
  for (const PhotonEvent& ev :
       dark_stream(cfg.detection.r_dark_per_s, cfg.detection.n_det, 0.0, hold,
                   dark_rng))
    all.push_back(ev);
  std::sort(all.begin(), all.end(), event_less);
  all.erase(std::unique(all.begin(), all.end(),
                        [](const PhotonEvent& a, const PhotonEvent& b) {
                          return a.t_ns == b.t_ns &&
                                 a.detector == b.detector;
                        }),
            all.end());
  return all;
}

std::vector<Trajectory> transit_drop_trajectories(int drop,
                                                  const ExperimentConfig& cfg,
                                                  std::uint64_t seed) {
  const std::uint64_t base = transit_stream(drop);
  Rng arr_rng(seed, base, Purpose::kArrivals);
  const std::vector<double> arrivals =
      poisson_arrivals(cfg.source.f_per_s, cfg.detection.t_hold_s, arr_rng);
  std::vector<Trajectory> out;
  out.reserve(arrivals.size());
  for (std::size_t k = 0; k < arrivals.size(); ++k) {
    Rng traj_rng(seed, base + k + 1, Purpose::kTrajectory);
    Trajectory traj = sample_trajectory(traj_rng, cfg.source, cfg.cavity);
    traj.t_entry = arrivals[k];
    out.push_back(traj);
  }
  return out;
}

ProjectiveResult run_projective_campaign(PulseKind pulse, int n_in,
                                         double eta0,
                                         const ExperimentConfig& cfg,
                                         std::uint64_t seed, int threads,
                                         std::vector<ProtocolTrial>* details) {
  if (n_in <= 0) throw UsageError("run_projective_campaign: n_in <= 0");
  if (eta0 <= 0) throw UsageError("run_projective_campaign: eta0 <= 0");
  const RateModel model = RateModel::from_config(cfg);
  const std::uint64_t cap = std::max<std::uint64_t>(
      static_cast<std::uint64_t>(cfg.sim.trials),
      200ull * static_cast<std::uint64_t>(n_in));
  const std::size_t block =
      std::max<std::size_t>(256, static_cast<std::size_t>(n_in));

  std::vector<ProtocolTrial> collected;
  collected.reserve(static_cast<std::size_t>(n_in));
  std::uint64_t next_trial = 0;
  while (collected.size() < static_cast<std::size_t>(n_in) &&
         next_trial < cap) {
    const std::size_t n =
        std::min<std::size_t>(block, static_cast<std::size_t>(cap -
                                                              next_trial));
    std::vector<TrialOut> outs(n);
    const std::uint64_t first = next_trial;
    parallel_for(n, threads, [&](std::size_t i) {
      outs[i] = run_protocol_trial(first + i, pulse, cfg, model, seed);
    });
    for (std::size_t i = 0;
         i < n && collected.size() < static_cast<std::size_t>(n_in); ++i) {
      if (!outs[i].triggered) continue;
      ProtocolTrial pt;
      pt.trial = first + i;
      pt.trajectory = outs[i].trajectory;
      pt.outcome = outs[i].outcome;
      collected.push_back(pt);
    }
    next_trial += n;
  }
  if (collected.size() < static_cast<std::size_t>(n_in))
    throw StatisticsError(
        "run_projective_campaign: trial cap reached before n_in protocols");

  ProjectiveResult res;
  res.pulse = pulse;
  res.n_in = n_in;
  res.eta0_used = eta0;
  res.trials_consumed = static_cast<int>(collected.back().trial) + 1;
  double sum_counts = 0;
  for (const ProtocolTrial& pt : collected) {
    sum_counts += pt.outcome.n_count;
    if (pt.outcome.projected) ++res.n_suc;
  }
  res.mean_n_count = sum_counts / static_cast<double>(n_in);
  res.beta2_hat =
      static_cast<double>(res.n_suc) / (eta0 * static_cast<double>(n_in));
  const double p_hat =
      static_cast<double>(res.n_suc) / static_cast<double>(n_in);
  const double var_n =
      std::max(static_cast<double>(n_in) * p_hat * (1.0 - p_hat), 1.0);
  const double stat = std::sqrt(var_n) / (eta0 * static_cast<double>(n_in));
  const double sys = res.beta2_hat * kEta0PriorSigma / eta0;
  res.sigma_beta2 = std::sqrt(stat * stat + sys * sys);
  if (details) *details = std::move(collected);
  return res;
}

Calibration calibrate_eta0_zeta(double target_mean_counts,
                                const ExperimentConfig& cfg,
                                std::uint64_t seed, int threads) {
  if (target_mean_counts <= 0)
    throw UsageError("calibrate_eta0_zeta: target <= 0");
  const int n_cal = 800;
  auto mean_at = [&](double zeta) {
    ExperimentConfig c = cfg;
    c.detection.zeta = zeta;
    try {
      return run_projective_campaign(PulseKind::kSigmaMinus, n_cal, 1.0, c,
                                     seed, threads)
          .mean_n_count;
    } catch (const StatisticsError&) {
      return 0.0;  // too dim to herald; treat as below target
    }
  };

  double lo = 1e-3, hi = 1.0;
  if (mean_at(lo) > target_mean_counts || mean_at(hi) < target_mean_counts)
    throw StatisticsError(
        "calibrate_eta0_zeta: target not bracketed by zeta in [1e-3, 1]");
  double mid = std::sqrt(lo * hi);
  double best = mid, best_err = 1e300;
  for (int iter = 0; iter < 40; ++iter) {
    mid = std::sqrt(lo * hi);
    const double m = mean_at(mid);
    const double err = std::abs(m - target_mean_counts);
    if (err < best_err) {
      best_err = err;
      best = mid;
    }
    if (err <= 0.02 * target_mean_counts) break;
    if (m < target_mean_counts)
      lo = mid;
    else
      hi = mid;
  }

  ExperimentConfig tuned = cfg;
  tuned.detection.zeta = best;
  const int n_eta = 2000;
  const ProjectiveResult run = run_projective_campaign(
      PulseKind::kSigmaMinus, n_eta, 1.0, tuned, seed, threads);

  Calibration cal;
  cal.zeta = best;
  cal.mean_n_count = run.mean_n_count;
  cal.n_protocols = n_eta;
  cal.eta0 = static_cast<double>(run.n_suc) / static_cast<double>(n_eta);
  cal.eta0_sigma =
      std::sqrt(std::max(cal.eta0 * (1.0 - cal.eta0), 1.0 / n_eta) / n_eta);
  return cal;
}

SweepResult run_power_sweep(std::span<const double> powers_w,
                            const ExperimentConfig& cfg, std::uint64_t seed,
                            int threads, double mean_n_count) {
  if (powers_w.size() < 4)
    throw UsageError("run_power_sweep: need >= 4 power points");
  std::vector<double> powers(powers_w.begin(), powers_w.end());
  std::sort(powers.begin(), powers.end());
  if (powers.front() <= 0) throw UsageError("run_power_sweep: power <= 0");

  const int n_drops = cfg.sim.sweep_drops;
  const double hold = cfg.detection.t_hold_s;
  const std::int64_t hold_ns =
      static_cast<std::int64_t>(std::llround(hold * 1e9));

  std::vector<RateModel> models(powers.size());
  std::vector<ExperimentConfig> cfgs(powers.size());
  for (std::size_t ip = 0; ip < powers.size(); ++ip) {
    cfgs[ip] = cfg;
    cfgs[ip].drive.p_total_w = powers[ip];
    models[ip] = RateModel::from_config(cfgs[ip], ModelKind::kSaturating);
  }

  // task index = (ip * 2 + branch) * n_drops + drop
  const std::size_t drops_sz = static_cast<std::size_t>(n_drops);
  const std::size_t n_tasks = powers.size() * 2 * drops_sz;
  std::vector<double> task_counts(n_tasks, 0.0);
  parallel_for(n_tasks, threads, [&](std::size_t task) {
    const int drop = static_cast<int>(task % drops_sz);
    const std::size_t rest = task / drops_sz;
    const int branch = static_cast<int>(rest % 2);
    const std::size_t ip = rest / 2;
    const Spin spin = branch == 0 ? Spin::kDown : Spin::kUp;
    const std::uint64_t base = sweep_stream(ip, branch, drop);

    Rng arr_rng(seed, base, Purpose::kArrivals);
    const std::vector<double> arrivals =
        poisson_arrivals(cfg.source.f_per_s, hold, arr_rng);
    double counts = 0;
    for (std::size_t k = 0; k < arrivals.size(); ++k) {
      const std::uint64_t stream = base + k + 1;
      Rng traj_rng(seed, stream, Purpose::kTrajectory);
      Trajectory traj = sample_trajectory(traj_rng, cfgs[ip].source,
                                          cfgs[ip].cavity);
      traj.t_entry = arrivals[k];
      const TrialRecord rec =
          simulate_transit(traj, spin, BeamSchedule::always_on(), cfgs[ip],
                           models[ip], seed, stream, false);
      for (const PhotonEvent& ev : rec.events)
        if (ev.t_ns < hold_ns) counts += 1.0;
    }
    Rng dark_rng(seed, base, Purpose::kDark);
    counts += static_cast<double>(
        dark_stream(cfg.detection.r_dark_per_s, cfg.detection.n_det, 0.0,
                    hold, dark_rng)
            .size());
    task_counts[task] = counts;
  });

  SweepResult res;
  res.p_ref_w = cfg.drive.p_ref_w;
  res.rows.resize(powers.size());
  for (std::size_t ip = 0; ip < powers.size(); ++ip) {
    res.rows[ip].power_w = powers[ip];
    double sum_minus = 0, sum_plus = 0;
    for (std::size_t d = 0; d < drops_sz; ++d) {
      sum_minus += task_counts[(ip * 2 + 0) * drops_sz + d];
      sum_plus += task_counts[(ip * 2 + 1) * drops_sz + d];
    }
    res.rows[ip].n_minus = sum_minus / n_drops;
    res.rows[ip].n_plus = sum_plus / n_drops;
  }

  // sigma-' grows linearly at low power; sigma+' is fit where its signal
  // clears the dark floor.
  const std::size_t half = std::max<std::size_t>(powers.size() / 2, 2);
  std::vector<double> px, py;
  for (std::size_t ip = 0; ip < half; ++ip) {
    px.push_back(res.rows[ip].power_w);
    py.push_back(res.rows[ip].n_minus);
  }
  res.fit_minus_slope = fit_line_through_origin(px, py);
  px.clear();
  py.clear();
  for (std::size_t ip = powers.size() - half; ip < powers.size(); ++ip) {
    px.push_back(res.rows[ip].power_w);
    py.push_back(res.rows[ip].n_plus);
  }
  res.fit_plus = fit_line(px, py);

  std::size_t ref = 0;
  for (std::size_t ip = 1; ip < powers.size(); ++ip)
    if (std::abs(powers[ip] - res.p_ref_w) <
        std::abs(powers[ref] - res.p_ref_w))
      ref = ip;
  const double nm = res.rows[ref].n_minus;
  const double np = res.rows[ref].n_plus;
  res.sn_lower = np > 0 ? nm / np
                        : std::numeric_limits<double>::infinity();
  const double fit_plus_ref =
      res.fit_plus.intercept + res.fit_plus.slope * res.p_ref_w;
  res.sn_lower_fit = fit_plus_ref > 0
                         ? res.fit_minus_slope * res.p_ref_w / fit_plus_ref
                         : std::numeric_limits<double>::infinity();
  res.delta_beta2 = systematic_error_bound(mean_n_count, nm, np);
  return res;
}

double systematic_error_bound(double mean_n_count, double n_minus,
                              double n_plus) {
  if (n_minus <= 0)
    throw UsageError("systematic_error_bound: n_minus <= 0");
  if (n_plus < 0) throw UsageError("systematic_error_bound: n_plus < 0");
  return (2.0 + mean_n_count) * n_plus / n_minus;
}

namespace {

void accumulate_lags(const Timeline& events, std::int64_t bin_ns,
                     std::int64_t max_lag_ns, std::vector<double>& counts) {
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events[i].origin != Origin::kAtomic) continue;
    for (std::size_t j = i + 1; j < events.size(); ++j) {
      if (events[j].origin != Origin::kAtomic) continue;
      const std::int64_t lag = events[j].t_ns - events[i].t_ns;
      if (lag >= max_lag_ns) break;
      counts[static_cast<std::size_t>(lag / bin_ns)] += 1.0;
    }
  }
}

std::vector<G2Point> normalize_lags(std::vector<double>& counts,
                                    std::int64_t bin_ns) {
  const std::size_t n = counts.size();
  double base = 0;
  std::size_t nb = 0;
  for (std::size_t b = n / 2; b < n; ++b) {
    base += counts[b];
    ++nb;
  }
  base = nb > 0 ? base / static_cast<double>(nb) : 0.0;
  std::vector<G2Point> out(n);
  for (std::size_t b = 0; b < n; ++b) {
    out[b].lag_ns = (static_cast<double>(b) + 0.5) *
                    static_cast<double>(bin_ns);
    out[b].g2 = base > 0 ? counts[b] / base : 0.0;
  }
  return out;
}

}  // namespace

std::vector<G2Point> g2_histogram(const Timeline& events, std::int64_t bin_ns,
                                  std::int64_t max_lag_ns) {
  if (bin_ns <= 0 || max_lag_ns <= 0 || max_lag_ns % bin_ns != 0)
    throw UsageError("g2_histogram: max_lag must be a positive multiple of "
                     "the bin width");
  std::vector<double> counts(
      static_cast<std::size_t>(max_lag_ns / bin_ns), 0.0);
  accumulate_lags(events, bin_ns, max_lag_ns, counts);
  return normalize_lags(counts, bin_ns);
}

std::vector<G2Point> g2_histogram_multi(std::span<const Timeline> timelines,
                                        std::int64_t bin_ns,
                                        std::int64_t max_lag_ns) {
  if (bin_ns <= 0 || max_lag_ns <= 0 || max_lag_ns % bin_ns != 0)
    throw UsageError("g2_histogram_multi: max_lag must be a positive "
                     "multiple of the bin width");
  std::vector<double> counts(
      static_cast<std::size_t>(max_lag_ns / bin_ns), 0.0);
  for (const Timeline& tl : timelines)
    accumulate_lags(tl, bin_ns, max_lag_ns, counts);
  return normalize_lags(counts, bin_ns);
}

}  // namespace spinsim
