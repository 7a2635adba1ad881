#pragma once

#include <array>

#include "spinsim/config.hpp"
#include "spinsim/rng.hpp"

// Atom trajectories through the crossed cavity-mode / excitation-beam
// geometry and the local emission and spin-flip rates along them.
//
// Geometry: gravity along -y, cavity (standing-wave) axis z, excitation
// beam along x.  Trajectories are straight lines; gravity during the
// ~100 us transit is negligible.

namespace spinsim {

enum class Spin { kDown, kUp };

struct Trajectory {
  std::array<double, 3> entry{};     // m, at t_entry
  std::array<double, 3> velocity{};  // m/s, vy < 0
  double phase = 0;                  // standing-wave phase offset, [0, pi)
  double t_entry = 0;                // s
};

struct LocalField {
  double g_local = 0;      // angular rad/s
  double omega_local = 0;  // angular rad/s
  bool beam_on = false;
};

// Precomputed per-config quantities consumed by the rate evaluation.
struct RateModel {
  double g_max = 0;       // angular rad/s
  double kappa = 0;       // angular rad/s
  double gamma = 0;       // angular rad/s
  double lambda = 0;      // m
  double w_c = 0;         // m
  double w_l = 0;         // m
  double omega_max = 0;   // angular rad/s at the configured power
  double laser_detuning = 0;  // angular rad/s
  double gamma_max = 0;   // /s, peak emission rate at omega_max
  double gamma_flip = 0;  // /s, spin-flip rate at omega_max
  double zeta = 0;        // rate-calibration factor
  double q = 0;           // detection efficiency
  ModelKind kind = ModelKind::kPaperEmpirical;

  static RateModel from_config(const ExperimentConfig& cfg);
  static RateModel from_config(const ExperimentConfig& cfg, ModelKind kind);

  // Upper bound on the physical emission rate anywhere in space.
  double emit_bound() const;
};

// Entry point, transverse velocities, and standing-wave phase for one atom.
Trajectory sample_trajectory(Rng& rng, const SourceSpec& source,
                             const CavitySpec& cavity);

std::array<double, 3> position_at(const Trajectory& traj, double t);

// Mode and beam amplitudes at the atom's position.
LocalField local_fields(const Trajectory& traj, double t,
                        const RateModel& model, bool beam_on);

struct LocalRates {
  double emit_rate = 0;    // /s, physical (zeta folded in, q not)
  double flip_hazard = 0;  // /s
};

// Emission rate for a |down> atom and flip hazard for an |up> atom at the
// given local fields.
LocalRates local_rates(const LocalField& fields, Spin spin,
                       const RateModel& model);

// Convenience: rates along a trajectory at time t.
LocalRates rates_at(const Trajectory& traj, double t, Spin spin,
                    const RateModel& model, bool beam_on);

// Time after t_entry at which the atom leaves the interaction region
// (falls 3 w_c below the axis).
double transit_duration(const Trajectory& traj, const CavitySpec& cavity);

}  // namespace spinsim
