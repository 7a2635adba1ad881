#include "spinsim/stream_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "spinsim/errors.hpp"
#include "spinsim/units.hpp"

namespace spinsim {
namespace {

std::int64_t to_ns(double t_s) {
  return static_cast<std::int64_t>(std::llround(t_s * 1e9));
}

// Thinning loop; on acceptance also draws a detector bit from the same
// stream so the draw sequence stays a pure function of (seed, stream).
struct TimedHit {
  std::int64_t t_ns;
  std::uint8_t detector;
};

std::vector<TimedHit> thin_with_detectors(
    const std::function<double(double)>& rate_fn, double bound, double t0,
    double t1, Rng& rng) {
  std::vector<TimedHit> hits;
  if (bound <= 0.0 || t1 <= t0) return hits;
  double t = t0;
  std::int64_t last_ns = to_ns(t0) - 1;
  while (true) {
    t += rng.exponential(bound);
    if (t > t1) break;
    const double r = rate_fn(t);
    if (r > bound * (1.0 + 1e-9))
      throw std::logic_error("thinning: rate exceeds declared bound");
    if (rng.uniform() * bound < r) {
      std::int64_t ns = to_ns(t);
      if (ns <= last_ns) ns = last_ns + 1;
      last_ns = ns;
      hits.push_back({ns, static_cast<std::uint8_t>(rng.next_u64() & 1u)});
    }
  }
  return hits;
}

// First event of an inhomogeneous process, or nullopt.
std::optional<double> first_event_time(
    const std::function<double(double)>& rate_fn, double bound, double t0,
    double t1, Rng& rng) {
  if (bound <= 0.0 || t1 <= t0) return std::nullopt;
  double t = t0;
  while (true) {
    t += rng.exponential(bound);
    if (t > t1) return std::nullopt;
    const double r = rate_fn(t);
    if (r > bound * (1.0 + 1e-9))
      throw std::logic_error("thinning: rate exceeds declared bound");
    if (rng.uniform() * bound < r) return t;
  }
}

std::vector<TimedHit> refractory_filter(const std::vector<TimedHit>& hits,
                                        double tau_dead_s) {
  const std::int64_t dead_ns = to_ns(tau_dead_s);
  std::vector<TimedHit> out;
  out.reserve(hits.size());
  std::int64_t last = std::numeric_limits<std::int64_t>::min() / 2;
  for (const TimedHit& h : hits) {
    if (h.t_ns - last < dead_ns) continue;
    out.push_back(h);
    last = h.t_ns;
  }
  return out;
}

void check_sorted(const Timeline& t, const char* who) {
  for (std::size_t i = 1; i < t.size(); ++i)
    if (!event_less(t[i - 1], t[i]))
      throw UsageError(std::string(who) + ": input timeline not sorted");
}

}  // namespace

void BeamSchedule::gate_off(double t0, double t1) {
  if (t1 <= t0) throw UsageError("BeamSchedule::gate_off: empty interval");
  transitions_.push_back({t0, false});
  transitions_.push_back({t1, true});
  std::sort(transitions_.begin(), transitions_.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
}

bool BeamSchedule::on(double t) const {
  bool state = initial_on_;
  for (const auto& [ts, s] : transitions_) {
    if (ts > t) break;
    state = s;
  }
  return state;
}

std::vector<std::int64_t> sample_inhomogeneous_poisson(
    const std::function<double(double)>& rate_fn, double bound, double t0,
    double t1, Rng& rng) {
  if (bound < 0.0)
    throw UsageError("sample_inhomogeneous_poisson: negative bound");
  std::vector<std::int64_t> out;
  for (const TimedHit& h : thin_with_detectors(rate_fn, bound, t0, t1, rng))
    out.push_back(h.t_ns);
  return out;
}

Timeline dark_stream(double r_dark_per_s, int n_det, double t0, double t1,
                     Rng& rng) {
  Timeline out;
  if (r_dark_per_s < 0.0) throw UsageError("dark_stream: negative rate");
  if (r_dark_per_s == 0.0 || t1 <= t0) return out;
  for (int det = 0; det < n_det; ++det) {
    double t = t0;
    std::int64_t last_ns = std::numeric_limits<std::int64_t>::min();
    while (true) {
      t += rng.exponential(r_dark_per_s);
      if (t > t1) break;
      // sub-ns gaps collapse onto one timestamp: one registered click
      const std::int64_t ns = to_ns(t);
      if (ns == last_ns) continue;
      last_ns = ns;
      out.push_back({ns, static_cast<std::uint8_t>(det), Origin::kDark});
    }
  }
  std::sort(out.begin(), out.end(), event_less);
  return out;
}

Timeline merge_timelines(const Timeline& a, const Timeline& b) {
  check_sorted(a, "merge_timelines");
  check_sorted(b, "merge_timelines");
  Timeline out;
  out.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out),
             event_less);
  return out;
}

std::vector<std::int64_t> apply_refractory(
    const std::vector<std::int64_t>& times_ns, double tau_dead_s) {
  const std::int64_t dead_ns = to_ns(tau_dead_s);
  std::vector<std::int64_t> out;
  out.reserve(times_ns.size());
  std::int64_t last = std::numeric_limits<std::int64_t>::min() / 2;
  for (std::int64_t t : times_ns) {
    if (t - last < dead_ns) continue;
    out.push_back(t);
    last = t;
  }
  return out;
}

TrialRecord simulate_transit(const Trajectory& traj, Spin spin_initial,
                             const BeamSchedule& schedule,
                             const ExperimentConfig& cfg,
                             const RateModel& model, std::uint64_t seed,
                             std::uint64_t stream, bool include_dark) {
  TrialRecord rec;
  rec.trajectory = traj;
  rec.spin_initial = spin_initial;

  const double t_begin = traj.t_entry;
  const double t_end = t_begin + transit_duration(traj, cfg.cavity);

  double emit_from = t_begin;
  bool emits = spin_initial == Spin::kDown;
  if (spin_initial == Spin::kUp) {
    Rng flip_rng(seed, stream, Purpose::kFlip);
    auto hazard = [&](double t) {
      return schedule.on(t)
                 ? rates_at(traj, t, Spin::kUp, model, true).flip_hazard
                 : 0.0;
    };
    const auto flip =
        first_event_time(hazard, model.gamma_flip, t_begin, t_end, flip_rng);
    if (flip) {
      rec.flip_time_ns = to_ns(*flip);
      emit_from = *flip;
      emits = true;
    }
  }

  Timeline atomic;
  if (emits) {
    Rng emit_rng(seed, stream, Purpose::kEmission);
    auto rate = [&](double t) {
      const bool on = schedule.on(t);
      return model.q * rates_at(traj, t, Spin::kDown, model, on).emit_rate;
    };
    auto hits = thin_with_detectors(rate, model.q * model.emit_bound(),
                                    emit_from, t_end, emit_rng);
    hits = refractory_filter(hits, cfg.detection.tau_dead_s);
    atomic.reserve(hits.size());
    for (const TimedHit& h : hits)
      atomic.push_back({h.t_ns, h.detector, Origin::kAtomic});
  }

  Timeline dark;
  if (include_dark) {
    Rng dark_rng(seed, stream, Purpose::kDark);
    dark = dark_stream(cfg.detection.r_dark_per_s, cfg.detection.n_det,
                       t_begin, t_end, dark_rng);
  }
  rec.n_atomic = atomic.size();
  rec.n_dark = dark.size();
  rec.events = merge_timelines(atomic, dark);
  return rec;
}

Timeline simulate_emission_window(const Trajectory& traj, Spin spin,
                                  const BeamSchedule& schedule, double t0,
                                  double t1, const ExperimentConfig& cfg,
                                  const RateModel& model, std::uint64_t seed,
                                  std::uint64_t stream,
                                  std::optional<std::int64_t>* flip_time_ns) {
  if (flip_time_ns) flip_time_ns->reset();
  double emit_from = t0;
  bool emits = spin == Spin::kDown;
  if (spin == Spin::kUp) {
    Rng flip_rng(seed, stream, Purpose::kMeasFlip);
    auto hazard = [&](double t) {
      return schedule.on(t)
                 ? rates_at(traj, t, Spin::kUp, model, true).flip_hazard
                 : 0.0;
    };
    const auto flip =
        first_event_time(hazard, model.gamma_flip, t0, t1, flip_rng);
    if (flip) {
      if (flip_time_ns) *flip_time_ns = static_cast<std::int64_t>(
          std::llround(*flip * 1e9));
      emit_from = *flip;
      emits = true;
    }
  }
  Timeline atomic;
  if (emits) {
    Rng emit_rng(seed, stream, Purpose::kMeasEmission);
    auto rate = [&](double t) {
      const bool on = schedule.on(t);
      return model.q * rates_at(traj, t, Spin::kDown, model, on).emit_rate;
    };
    auto hits = thin_with_detectors(rate, model.q * model.emit_bound(),
                                    emit_from, t1, emit_rng);
    hits = refractory_filter(hits, cfg.detection.tau_dead_s);
    atomic.reserve(hits.size());
    for (const TimedHit& h : hits)
      atomic.push_back({h.t_ns, h.detector, Origin::kAtomic});
  }
  return atomic;
}

}  // namespace spinsim
