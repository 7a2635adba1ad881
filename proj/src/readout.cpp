#include "spinsim/readout.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "spinsim/errors.hpp"
#include "spinsim/units.hpp"

namespace spinsim {

std::vector<CoincidenceEvent> detect_coincidences(const Timeline& timeline,
                                                  std::int64_t t_coin_ns,
                                                  std::int64_t t_win_ns) {
  for (std::size_t i = 1; i < timeline.size(); ++i)
    if (!event_less(timeline[i - 1], timeline[i]))
      throw UsageError("detect_coincidences: timeline not sorted");

  std::vector<CoincidenceEvent> windows;
  std::int64_t window_end = std::numeric_limits<std::int64_t>::min();
  for (std::size_t i = 1; i < timeline.size(); ++i) {
    const std::int64_t t = timeline[i].t_ns;
    if (t < window_end) continue;  // no retrigger during an active window
    if (t - timeline[i - 1].t_ns < t_coin_ns) {
      windows.push_back({t, t + t_win_ns});
      window_end = t + t_win_ns;
    }
  }
  return windows;
}

const char* pulse_name(PulseKind k) {
  switch (k) {
    case PulseKind::kSigmaMinus: return "sigma_minus";
    case PulseKind::kSigmaPerp: return "sigma_perp";
    case PulseKind::kSigmaPlus: return "sigma_plus";
    case PulseKind::kNone: return "none";
  }
  return "?";
}

PulseKind pulse_from_name(const std::string& name) {
  if (name == "sigma_minus") return PulseKind::kSigmaMinus;
  if (name == "sigma_perp") return PulseKind::kSigmaPerp;
  if (name == "sigma_plus") return PulseKind::kSigmaPlus;
  if (name == "none") return PulseKind::kNone;
  throw UsageError("unknown pulse kind '" + name + "'");
}

Preparation apply_preparation_pulse(PulseKind kind, Rng& rng, double pol_error,
                                    Spin current) {
  if (pol_error < 0.0 || pol_error > 1.0)
    throw UsageError("apply_preparation_pulse: pol_error must be in [0, 1]");
  Preparation prep;
  switch (kind) {
    case PulseKind::kSigmaMinus:
      prep.prepared_beta2 = 1.0;
      break;
    case PulseKind::kSigmaPerp:
      prep.prepared_beta2 = 0.5;
      break;
    case PulseKind::kSigmaPlus:
      prep.prepared_beta2 = pol_error;
      break;
    case PulseKind::kNone:
      // Post-coincidence atom keeps its spin (|down> when heralded).
      prep.prepared_beta2 = current == Spin::kDown ? 1.0 : 0.0;
      prep.spin_after = current;
      return prep;
  }
  prep.spin_after =
      rng.bernoulli(prep.prepared_beta2) ? Spin::kDown : Spin::kUp;
  return prep;
}

ProtocolSchedule ProtocolSchedule::at(double t0, const DetectionSpec& det) {
  ProtocolSchedule s;
  s.t0 = t0;
  s.beam_off_begin = t0;
  s.beam_off_end = t0 + det.t_gap_s;
  const double mid = t0 + 0.5 * (det.t_gap_s - det.t_pulse_s);
  s.pulse_begin = mid;
  s.pulse_end = mid + det.t_pulse_s;
  s.measure_begin = t0 + det.t_gap_s;
  s.measure_end = s.measure_begin + det.t_meas_s;
  return s;
}

MeasurementOutcome run_measurement_protocol(const Trajectory& traj,
                                            std::int64_t coincidence_t0_ns,
                                            PulseKind pulse,
                                            const ExperimentConfig& cfg,
                                            const RateModel& model,
                                            std::uint64_t seed,
                                            std::uint64_t stream) {
  const double t0 = ns_to_sec(static_cast<double>(coincidence_t0_ns));
  const ProtocolSchedule sched = ProtocolSchedule::at(t0, cfg.detection);

  BeamSchedule beam = BeamSchedule::always_on();
  beam.gate_off(sched.beam_off_begin, sched.beam_off_end);

  Rng pulse_rng(seed, stream, Purpose::kPulse);
  const Preparation prep =
      apply_preparation_pulse(pulse, pulse_rng, cfg.sim.pol_error);

  MeasurementOutcome out;
  out.t0_ns = coincidence_t0_ns;
  out.prepared_beta2 = prep.prepared_beta2;
  out.spin_after_pulse = prep.spin_after;

  std::optional<std::int64_t> flip_ns;
  const Timeline atomic = simulate_emission_window(
      traj, prep.spin_after, beam, sched.measure_begin, sched.measure_end,
      cfg, model, seed, stream, &flip_ns);

  Rng dark_rng(seed, stream, Purpose::kMeasDark);
  const Timeline dark =
      dark_stream(cfg.detection.r_dark_per_s, cfg.detection.n_det,
                  sched.measure_begin, sched.measure_end, dark_rng);

  const std::int64_t m0 = static_cast<std::int64_t>(
      std::llround(sched.measure_begin * 1e9));
  const std::int64_t m1 = static_cast<std::int64_t>(
      std::llround(sched.measure_end * 1e9));
  int n = 0;
  for (const Timeline* tl : {&atomic, &dark})
    for (const PhotonEvent& e : *tl)
      if (e.t_ns >= m0 && e.t_ns < m1) ++n;

  out.n_count = n;
  out.projected = n >= 1;
  return out;
}

}  // namespace spinsim
