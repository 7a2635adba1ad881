#pragma once

#include <span>
#include <vector>

#include "spinsim/config.hpp"

// Analytic rate formulas, derived setup quantities, and closed-form error
// estimates.  Everything here is a pure function of its arguments; all
// frequencies are angular rad/s unless noted.

namespace spinsim {

// Summary of the detection operating point.
struct RateReport {
  double n_bar = 0;        // intracavity photon number
  double gamma_max = 0;    // peak emission rate, /s
  double gamma_eff = 0;    // standing-wave-averaged rate = gamma_max/2
  double gamma_flip = 0;   // spin-flip rate, /s
  double sn = 0;           // signal-to-noise q*gamma_eff/gamma_flip
  double sn_bound = 0;     // q*kappa*A^2/(2*gamma*g^2)
  double kappa_derived = 0;   // from mirror losses, angular rad/s
  double delta_zeeman = 0;    // from B field, angular rad/s
  double theta = 0;           // cavity-mode divergence angle, rad
  double q_free = 0;          // free-space collection efficiency
  double free_space_counts = 0;  // expected counts per transit in free space
  double readout_error_4 = 0;    // P(N_count = 0) at the mean of 4
};

// <n> = Omega^2 / (4 g^2); valid in the bad-cavity regime g^2 >> kappa*gamma.
double intracavity_photon_number(double omega, double g);

// Gamma = 2 kappa <n>.
double emission_rate(double kappa, double n_bar);

// Free-space photon absorption rate at detuning delta.
double free_space_rate(double delta, double gamma, double omega);

// Gamma_flip = Gamma_free(delta) + Gamma_free(A - delta); delta in (0, A).
double spin_flip_rate(double delta, double hfs_a, double gamma, double omega);

// q * gamma_eff / gamma_flip; +inf when gamma_flip == 0.
double signal_to_noise(double q, double gamma_eff, double gamma_flip);

struct SnPoint {
  double delta;  // angular rad/s
  double sn;
};

struct SnCurve {
  std::vector<SnPoint> points;
  double delta_argmax = 0;
  double bound = 0;  // q*kappa*A^2 / (2*gamma*g^2)
};

// S/N over a detuning grid inside (0, A); gamma_eff is held fixed while
// gamma_flip varies with delta.
SnCurve sn_curve(std::span<const double> delta_grid,
                 const ExperimentConfig& cfg);

// Half linewidth (angular) from mirror transmittance/loss and spacing.
double kappa_from_mirrors(double t_m, double l_m, double l_c);

// 2*pi * |g_f * m_f| * (1.3996 MHz/G) * B.
double zeeman_shift(double b_gauss, double g_f, double m_f);

// Omega scales as sqrt(P).
double rabi_from_power(double p_total_w, const DriveSpec& drive);

struct FallResult {
  double t_fall;  // s
  double v_f;     // m/s
};
FallResult fall_kinematics(double height_m);

struct FreeSpaceBackground {
  double theta;            // divergence angle, rad
  double q_free;           // q * theta^2 / 4
  double expected_counts;  // per transit with the beam at resonance
};
FreeSpaceBackground free_space_background(double q, double lambda, double w_c,
                                          double gamma, double omega,
                                          double t_transit);

// Poisson void probability exp(-mean).
double readout_error(double mean_counts);

// P(n >= 2) / P(n = 1) for Poisson occupancy mu.
double multi_atom_fraction(double mu);

// Steady-state emission rate with the cavity adiabatically eliminated:
// Gamma_c * P_e, Gamma_c = 4 g^2 / kappa.  Saturates as Omega -> inf.
double saturating_rate(double g, double omega, double kappa, double gamma,
                       double laser_detuning);

// Upper bound of saturating_rate over g' in [0, g], Omega' in [0, omega]
// (the rate is not monotone in g).
double saturating_rate_bound(double g, double omega, double kappa,
                             double gamma, double laser_detuning);

// Full analytic chain evaluated at the configured operating point.
RateReport rate_report(const ExperimentConfig& cfg);

}  // namespace spinsim
