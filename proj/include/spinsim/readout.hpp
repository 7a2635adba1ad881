#pragma once

#include <cstdint>
#include <vector>

#include "spinsim/stream_sim.hpp"

// Coincidence circuit and the projective-measurement sequencer.

namespace spinsim {

struct CoincidenceEvent {
  std::int64_t t0_ns = 0;          // time of the second photon of the pair
  std::int64_t window_end_ns = 0;  // t0 + T_win
};

// Scans the merged two-detector stream.  A coincidence fires when the
// spacing of consecutive events drops below t_coin while no window is
// active; an active window suppresses retriggering.  Windows never overlap.
std::vector<CoincidenceEvent> detect_coincidences(const Timeline& timeline,
                                                  std::int64_t t_coin_ns,
                                                  std::int64_t t_win_ns);

enum class PulseKind { kSigmaMinus, kSigmaPerp, kSigmaPlus, kNone };

const char* pulse_name(PulseKind k);
PulseKind pulse_from_name(const std::string& name);  // throws UsageError

struct Preparation {
  Spin spin_after = Spin::kDown;
  double prepared_beta2 = 1.0;  // |<down|psi>|^2
};

// Spin state after a polarization pulse.  The Born rule is realized at
// pulse time: the spin is |down> with probability beta^2 (the downstream
// dynamics are population-diagonal, so coherences never matter).
// kNone keeps the pre-existing spin of `current`.
Preparation apply_preparation_pulse(PulseKind kind, Rng& rng,
                                    double pol_error,
                                    Spin current = Spin::kDown);

// Timing layout of one protocol run relative to the coincidence at t0.
struct ProtocolSchedule {
  double t0 = 0;             // s
  double beam_off_begin = 0; // = t0
  double beam_off_end = 0;   // = t0 + T_gap
  double pulse_begin = 0;    // centered inside the gap
  double pulse_end = 0;
  double measure_begin = 0;  // = t0 + T_gap
  double measure_end = 0;    // + T_meas

  static ProtocolSchedule at(double t0, const DetectionSpec& det);
};

struct MeasurementOutcome {
  double prepared_beta2 = 0;
  Spin spin_after_pulse = Spin::kDown;
  int n_count = 0;
  bool projected = false;
  std::int64_t t0_ns = 0;
};

// One coincidence-triggered projective measurement: beam gated off over
// [t0, t0+T_gap), pulse applied mid-gap, emission re-simulated from the
// end of the gap with the post-pulse spin, N_count accumulated over the
// measurement window (atomic + dark).
MeasurementOutcome run_measurement_protocol(const Trajectory& traj,
                                            std::int64_t coincidence_t0_ns,
                                            PulseKind pulse,
                                            const ExperimentConfig& cfg,
                                            const RateModel& model,
                                            std::uint64_t seed,
                                            std::uint64_t stream);

}  // namespace spinsim
