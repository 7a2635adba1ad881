#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace spinsim {

// Which emission model the stochastic simulator uses for a |down> atom.
enum class ModelKind { kPaperEmpirical, kSaturating };

// ---------------------------------------------------------------------------
// Parameter sections.  Frequencies are stored in Hz (nu such that
// angular = 2*pi*nu); conversion to angular rad/s happens at the point of
// use.  All defaults are the published operating point of the apparatus.
// ---------------------------------------------------------------------------

struct AtomSpecies {
  double gamma_hz = 182e3;    // natural linewidth
  double lambda_m = 556e-9;   // transition wavelength
  double a_hz = 5.9e9;        // excited-state hyperfine splitting
  double g_f = 1.0;           // Lande factor of the F'=3/2 manifold
  double m_f = -1.5;          // cycling excited sublevel
};

struct CavitySpec {
  double l_c_m = 150e-6;      // mirror spacing
  double w_c_m = 19e-6;       // mode waist
  double t_m = 2.5e-5;        // mirror transmittance
  double l_m = 3e-6;          // mirror loss
  double r_m = 0.999972;      // mirror reflectivity
  double kappa_hz = 4.5e6;    // field decay rate (half linewidth)
  double g_max_hz = 2.8e6;    // peak atom-cavity coupling
};

struct DriveSpec {
  double p_total_w = 0.9e-6;      // excitation power
  double p_ref_w = 0.9e-6;        // reference power for omega_ref
  double omega_ref_hz = 2.4e6;    // sigma- Rabi frequency at p_ref
  double w_l_m = 24e-6;           // excitation beam waist
  double laser_detuning_hz = 0;   // omega_l = omega_a = omega_c by default
};

struct FieldSpec {
  double b_gauss = 34.0;
  // Zeeman shift of the cycling excited sublevel, Hz.  Negative means
  // "derive from B, g_f, m_f"; a non-negative value overrides.
  double delta_hz = -1.0;
};

struct DetectionSpec {
  double q = 0.3;               // total photon detection efficiency
  int n_det = 2;                // detector count
  double r_dark_per_s = 200.0;  // dark counts per detector per second
  double tau_dead_s = 100e-9;   // post-emission refractory interval
  double t_coin_s = 600e-9;     // coincidence spacing threshold
  double t_win_s = 36e-6;       // coincidence logic-pulse duration
  double t_gap_s = 6e-6;        // beam-off gap after a coincidence
  double t_pulse_s = 2e-6;      // spin polarization pulse duration
  double t_meas_s = 30e-6;      // photon-counting measurement window
  double t_hold_s = 3e-3;       // sample-and-hold observation interval
  double zeta = 0.1;            // rate-calibration factor
};

struct SourceSpec {
  double h_m = 7e-3;              // drop height
  double f_per_s = 1e3;           // atom flux
  double v_f_m_s = 0.3;           // arrival speed
  double v_a_m_s = 4e-2;          // transverse velocity spread (1 sigma)
  double t_transit_s = 120e-6;    // nominal transit duration
  double src_halfwidth_m = 57e-6; // transverse entry half-width (3 w_c)
};

struct SimSpec {
  std::uint64_t seed = 1;
  int drops = 2000;            // drops for the transit campaign
  int sweep_drops = 200;       // drops per power-sweep point
  int trials = 10000;          // protocol trials cap
  int bins = 50;               // profile histogram bins
  double profile_span_s = 100e-6;  // profile window after a coincidence
  double pol_error = 0.0;      // residual |down> admixture of sigma+ light
  std::string model = "paper_empirical";
};

struct ExperimentConfig {
  AtomSpecies atom;
  CavitySpec cavity;
  DriveSpec drive;
  FieldSpec field;
  DetectionSpec detection;
  SourceSpec source;
  SimSpec sim;

  // Effective Zeeman shift in Hz (override or derived from B).
  double delta_hz_effective() const;
  ModelKind model_kind() const;

  // Throws ConfigError naming the offending key.
  void validate() const;
};

// Loads an INI-style file ([section], key=value, '#'/';' comments) over the
// defaults, then applies "section.key=value" overrides.  Unknown keys are
// rejected.  An empty path loads pure defaults.
ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides = {});

// Parses config text directly (same grammar as load_config).
ExperimentConfig parse_config_text(const std::string& text,
                                   const std::vector<std::string>& overrides = {});

// Canonical serialization: fixed section/key order, full precision.
// Equal configs produce identical bytes.
std::string serialize_config(const ExperimentConfig& cfg);

// FNV-1a hash of the canonical serialization, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace spinsim
