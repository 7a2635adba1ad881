#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "spinsim/fit.hpp"
#include "spinsim/readout.hpp"
#include "spinsim/stream_sim.hpp"

// Campaign runners and estimators: transit statistics, projective
// measurements, calibration, power sweep, photon correlations.

namespace spinsim {

// Published uncertainty on the heralded success probability; carried as a
// fixed prior so error bars are comparable across campaigns.
inline constexpr double kEta0PriorSigma = 0.09;

struct TransitStats {
  std::vector<double> profile_t_s;     // bin centers, s since coincidence
  std::vector<double> profile_rate;    // detected rate /s per coincidence
  GaussFit gauss_fit;
  std::vector<std::size_t> counts_per_transit_hist;
  double mean_counts_per_transit = 0;  // over coincidence-triggering atoms
  double eta_gate_window = 0;         // eta(6 us, 36 us)
  double eta_peak_window = 0;          // eta(t_peak +/- T_transit/2)
  std::size_t n_coincidences = 0;
  std::size_t n_atoms = 0;
  std::size_t n_drops = 0;
};

// Simulates Poisson atom arrivals over n_drops hold intervals, runs the
// coincidence circuit on the merged stream, accumulates the detected-rate
// profile aligned to coincidence times, and fits Gaussian-plus-offset.
TransitStats run_transit_campaign(int n_drops, const ExperimentConfig& cfg,
                                  std::uint64_t seed, int threads = 1);

// Merged event stream of one hold interval of the transit campaign; same
// streams as run_transit_campaign, so dumped events reproduce its windows.
Timeline transit_drop_events(int drop, const ExperimentConfig& cfg,
                             std::uint64_t seed);

// The sampled trajectories of the same hold interval.
std::vector<Trajectory> transit_drop_trajectories(int drop,
                                                  const ExperimentConfig& cfg,
                                                  std::uint64_t seed);

// Per-protocol diagnostics, enough to recompute expectations offline.
struct ProtocolTrial {
  std::uint64_t trial = 0;   // rng stream id
  Trajectory trajectory;
  MeasurementOutcome outcome;
};

struct ProjectiveResult {
  PulseKind pulse = PulseKind::kSigmaMinus;
  int n_in = 0;
  int n_suc = 0;
  double eta0_used = 0;
  double beta2_hat = 0;
  double sigma_beta2 = 0;
  double mean_n_count = 0;
  int trials_consumed = 0;
};

// Runs coincidence-triggered protocols until n_in complete.
// beta2_hat = N_suc / (eta0 * N_in); sigma combines the binomial error of
// N_suc with the eta0 prior in quadrature.
ProjectiveResult run_projective_campaign(PulseKind pulse, int n_in,
                                         double eta0,
                                         const ExperimentConfig& cfg,
                                         std::uint64_t seed, int threads = 1,
                                         std::vector<ProtocolTrial>* details =
                                             nullptr);

struct Calibration {
  double zeta = 0;        // tuned so sigma- protocols average target counts
  double mean_n_count = 0;
  double eta0 = 0;        // success fraction of sigma- protocols
  double eta0_sigma = 0;  // binomial
  int n_protocols = 0;
};

// Bisects zeta until the sigma- protocol mean N_count hits the target
// within 2%, then estimates eta0 at the tuned zeta.
Calibration calibrate_eta0_zeta(double target_mean_counts,
                                const ExperimentConfig& cfg,
                                std::uint64_t seed, int threads = 1);

struct SweepRow {
  double power_w = 0;
  double n_minus = 0;  // counts, sigma-' initialization
  double n_plus = 0;   // counts, sigma+' initialization
};

struct SweepResult {
  std::vector<SweepRow> rows;        // ascending power
  double fit_minus_slope = 0;        // counts/W, through origin, low half
  LinearFit fit_plus;                // counts vs W, offset allowed, high half
  double p_ref_w = 0;
  double sn_lower = 0;      // N_minus/N_plus at the reference power
  double sn_lower_fit = 0;  // same ratio from the fitted branches
  double delta_beta2 = 0;   // (2 + mean N_count) * N_plus/N_minus at ref
};

// Accumulates counts over whole hold intervals without coincidence gating,
// spins set before cavity entry.  |down> emission uses the saturating
// model; |up> atoms flip at the Omega^2-scaled hazard.
SweepResult run_power_sweep(std::span<const double> powers_w,
                            const ExperimentConfig& cfg, std::uint64_t seed,
                            int threads = 1, double mean_n_count = 4.0);

// delta beta^2 <= (2 + mean_N_count) * N_plus / N_minus.
double systematic_error_bound(double mean_n_count, double n_minus,
                              double n_plus);

struct G2Point {
  double lag_ns = 0;  // bin center
  double g2 = 0;
};

// Normalized pair-lag histogram of atomic-origin events; baseline taken
// from the long-lag half of the histogram.
std::vector<G2Point> g2_histogram(const Timeline& events, std::int64_t bin_ns,
                                  std::int64_t max_lag_ns);

// Same, with pairs accumulated within each timeline separately.
std::vector<G2Point> g2_histogram_multi(std::span<const Timeline> timelines,
                                        std::int64_t bin_ns,
                                        std::int64_t max_lag_ns);

}  // namespace spinsim
