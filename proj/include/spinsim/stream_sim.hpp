#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "spinsim/kinematics.hpp"
#include "spinsim/rng.hpp"

// Stochastic generation of timestamped detector events for falling atoms:
// inhomogeneous Poisson emission via thinning, spin-flip hazard, dark
// counts, detector assignment, refractory filtering.

namespace spinsim {

enum class Origin : std::uint8_t { kAtomic, kDark };

struct PhotonEvent {
  std::int64_t t_ns = 0;
  std::uint8_t detector = 0;  // 0 or 1
  Origin origin = Origin::kAtomic;

  friend bool operator==(const PhotonEvent&, const PhotonEvent&) = default;
};

using Timeline = std::vector<PhotonEvent>;

// Strict ordering on (t, detector); a valid Timeline is strictly increasing.
inline bool event_less(const PhotonEvent& a, const PhotonEvent& b) {
  if (a.t_ns != b.t_ns) return a.t_ns < b.t_ns;
  if (a.detector != b.detector) return a.detector < b.detector;
  return static_cast<int>(a.origin) < static_cast<int>(b.origin);
}

// Beam gating as a piecewise-constant on/off schedule.
class BeamSchedule {
 public:
  static BeamSchedule always_on() { return BeamSchedule(); }

  // Beam off on [t0, t1), on elsewhere relative to the previous state.
  void gate_off(double t0, double t1);

  bool on(double t) const;

  const std::vector<std::pair<double, bool>>& transitions() const {
    return transitions_;
  }

 private:
  bool initial_on_ = true;
  std::vector<std::pair<double, bool>> transitions_;  // (t_s, state after t)
};

struct TrialRecord {
  Trajectory trajectory;
  Spin spin_initial = Spin::kDown;
  std::optional<std::int64_t> flip_time_ns;
  Timeline events;  // merged atomic + dark, sorted
  std::size_t n_atomic = 0;
  std::size_t n_dark = 0;
};

// Thinning sampler for an inhomogeneous Poisson process on [t0, t1] (s).
// rate_fn must satisfy rate_fn(t) <= bound; violations are detected at the
// sampled points and throw.  Returns strictly increasing integer ns.
std::vector<std::int64_t> sample_inhomogeneous_poisson(
    const std::function<double(double)>& rate_fn, double bound, double t0,
    double t1, Rng& rng);

// Homogeneous Poisson dark counts per detector over [t0, t1] (s), merged.
Timeline dark_stream(double r_dark_per_s, int n_det, double t0, double t1,
                     Rng& rng);

// Sorted union preserving tags; inputs must already be sorted.
Timeline merge_timelines(const Timeline& a, const Timeline& b);

// Drops atomic events closer than tau_dead to the previous surviving one.
std::vector<std::int64_t> apply_refractory(
    const std::vector<std::int64_t>& times_ns, double tau_dead_s);

// One atom through the cavity.  For spin up, a flip time is drawn from the
// local hazard; after it the atom emits as |down>.  Detection efficiency q
// and calibration zeta are folded into the sampled rate; events are split
// 50/50 between detectors, refractory-filtered, and merged with dark
// counts over the transit.  Deterministic given (seed, stream).
// include_dark=false leaves dark counts to the caller (drop-level streams
// add them once per hold interval, not once per atom).
TrialRecord simulate_transit(const Trajectory& traj, Spin spin_initial,
                             const BeamSchedule& schedule,
                             const ExperimentConfig& cfg,
                             const RateModel& model, std::uint64_t seed,
                             std::uint64_t stream, bool include_dark = true);

// Atomic emission only, over an explicit window; used by the measurement
// protocol re-simulation.  Purposes distinguish it from the pre-trigger
// stream of the same trial.
Timeline simulate_emission_window(const Trajectory& traj, Spin spin,
                                  const BeamSchedule& schedule, double t0,
                                  double t1, const ExperimentConfig& cfg,
                                  const RateModel& model, std::uint64_t seed,
                                  std::uint64_t stream,
                                  std::optional<std::int64_t>* flip_time_ns);

}  // namespace spinsim
