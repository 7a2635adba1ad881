#include "spinsim/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "spinsim/errors.hpp"
#include "spinsim/units.hpp"

namespace spinsim {

double intracavity_photon_number(double omega, double g) {
  if (g <= 0.0)
    throw std::domain_error(
        "intracavity_photon_number: g must be > 0 (bad-cavity formula)");
  const double r = omega / (2.0 * g);
  return r * r;
}

double emission_rate(double kappa, double n_bar) {
  if (kappa <= 0.0) throw std::domain_error("emission_rate: kappa must be > 0");
  if (n_bar < 0.0) throw std::domain_error("emission_rate: n_bar must be >= 0");
  return 2.0 * kappa * n_bar;
}

double free_space_rate(double delta, double gamma, double omega) {
  if (gamma <= 0.0)
    throw std::domain_error("free_space_rate: gamma must be > 0");
  const double half_omega_sq = 0.5 * omega * omega;
  return 0.5 * gamma * half_omega_sq /
         (delta * delta + 0.25 * gamma * gamma + half_omega_sq);
}

double spin_flip_rate(double delta, double hfs_a, double gamma, double omega) {
  if (!(delta > 0.0 && delta < hfs_a))
    throw std::domain_error("spin_flip_rate: delta must lie in (0, A)");
  return free_space_rate(delta, gamma, omega) +
         free_space_rate(hfs_a - delta, gamma, omega);
}

double signal_to_noise(double q, double gamma_eff, double gamma_flip) {
  if (gamma_flip < 0.0)
    throw std::domain_error("signal_to_noise: gamma_flip must be >= 0");
  if (gamma_flip == 0.0)
    return std::numeric_limits<double>::infinity();
  return q * gamma_eff / gamma_flip;
}

SnCurve sn_curve(std::span<const double> delta_grid,
                 const ExperimentConfig& cfg) {
  if (delta_grid.empty()) throw UsageError("sn_curve: empty detuning grid");
  const double gamma = hz_to_angular(cfg.atom.gamma_hz);
  const double hfs = hz_to_angular(cfg.atom.a_hz);
  const double kappa = hz_to_angular(cfg.cavity.kappa_hz);
  const double g = hz_to_angular(cfg.cavity.g_max_hz);
  const double omega = rabi_from_power(cfg.drive.p_total_w, cfg.drive);
  const double gamma_eff =
      0.5 * emission_rate(kappa, intracavity_photon_number(omega, g));

  SnCurve curve;
  curve.bound = cfg.detection.q * kappa * hfs * hfs / (2.0 * gamma * g * g);
  curve.points.reserve(delta_grid.size());
  double best = -1.0;
  for (double delta : delta_grid) {
    if (!(delta > 0.0 && delta < hfs))
      throw UsageError("sn_curve: grid point outside (0, A)");
    const double sn = signal_to_noise(
        cfg.detection.q, gamma_eff, spin_flip_rate(delta, hfs, gamma, omega));
    curve.points.push_back({delta, sn});
    if (sn > best) {
      best = sn;
      curve.delta_argmax = delta;
    }
  }
  return curve;
}

double kappa_from_mirrors(double t_m, double l_m, double l_c) {
  const double total = t_m + l_m;
  if (!(total > 0.0 && total < 1.0))
    throw std::domain_error("kappa_from_mirrors: T_m + L_m must be in (0, 1)");
  if (l_c <= 0.0)
    throw std::domain_error("kappa_from_mirrors: L_c must be > 0");
  const double finesse = kPi / total;
  const double fwhm_hz = kSpeedOfLight / (2.0 * l_c) / finesse;
  return kPi * fwhm_hz;  // half linewidth, angular
}

double zeeman_shift(double b_gauss, double g_f, double m_f) {
  if (b_gauss < 0.0) throw std::domain_error("zeeman_shift: B must be >= 0");
  return kTwoPi * std::abs(g_f * m_f) * kBohrHzPerGauss * b_gauss;
}

double rabi_from_power(double p_total_w, const DriveSpec& drive) {
  if (p_total_w < 0.0)
    throw std::domain_error("rabi_from_power: power must be >= 0");
  return hz_to_angular(drive.omega_ref_hz) *
         std::sqrt(p_total_w / drive.p_ref_w);
}

FallResult fall_kinematics(double height_m) {
  if (height_m <= 0.0)
    throw std::domain_error("fall_kinematics: height must be > 0");
  const double t_fall = std::sqrt(2.0 * height_m / kGravity);
  return {t_fall, kGravity * t_fall};
}

FreeSpaceBackground free_space_background(double q, double lambda, double w_c,
                                          double gamma, double omega,
                                          double t_transit) {
  FreeSpaceBackground bg;
  bg.theta = lambda / (kPi * w_c);
  bg.q_free = q * bg.theta * bg.theta / 4.0;
  bg.expected_counts =
      bg.q_free * free_space_rate(0.0, gamma, omega) * t_transit;
  return bg;
}

double readout_error(double mean_counts) {
  if (mean_counts < 0.0)
    throw std::domain_error("readout_error: mean must be >= 0");
  return std::exp(-mean_counts);
}

double multi_atom_fraction(double mu) {
  if (mu < 0.0)
    throw std::domain_error("multi_atom_fraction: mean must be >= 0");
  if (mu == 0.0) return 0.0;
  return (std::expm1(mu) - mu) / mu;
}

double saturating_rate(double g, double omega, double kappa, double gamma,
                       double laser_detuning) {
  if (kappa <= 0.0)
    throw std::domain_error("saturating_rate: kappa must be > 0");
  const double gamma_c = 4.0 * g * g / kappa;
  const double width = gamma + gamma_c;
  const double p_e = 0.25 * omega * omega /
                     (0.25 * width * width + laser_detuning * laser_detuning +
                      0.5 * omega * omega);
  return gamma_c * p_e;
}

double saturating_rate_bound(double g, double omega, double kappa,
                             double gamma, double laser_detuning) {
  // The rate peaks at Gamma_c^2 = gamma^2 + 4*(Delta_l^2 + Omega^2/2);
  // clamp the optimum into the reachable range [0, Gamma_c(g)].
  const double gamma_c_max = 4.0 * g * g / kappa;
  const double gamma_c_opt = std::sqrt(
      gamma * gamma +
      4.0 * (laser_detuning * laser_detuning + 0.5 * omega * omega));
  const double gamma_c = std::min(gamma_c_max, gamma_c_opt);
  const double g_eff = 0.5 * std::sqrt(gamma_c * kappa);
  return saturating_rate(g_eff, omega, kappa, gamma, laser_detuning) *
         (1.0 + 1e-12);
}

RateReport rate_report(const ExperimentConfig& cfg) {
  const double gamma = hz_to_angular(cfg.atom.gamma_hz);
  const double hfs = hz_to_angular(cfg.atom.a_hz);
  const double kappa = hz_to_angular(cfg.cavity.kappa_hz);
  const double g = hz_to_angular(cfg.cavity.g_max_hz);
  const double omega = rabi_from_power(cfg.drive.p_total_w, cfg.drive);
  const double delta = hz_to_angular(cfg.delta_hz_effective());

  RateReport r;
  r.n_bar = intracavity_photon_number(omega, g);
  r.gamma_max = emission_rate(kappa, r.n_bar);
  r.gamma_eff = 0.5 * r.gamma_max;
  r.gamma_flip = spin_flip_rate(delta, hfs, gamma, omega);
  r.sn = signal_to_noise(cfg.detection.q, r.gamma_eff, r.gamma_flip);
  r.sn_bound = cfg.detection.q * kappa * hfs * hfs / (2.0 * gamma * g * g);
  r.kappa_derived =
      kappa_from_mirrors(cfg.cavity.t_m, cfg.cavity.l_m, cfg.cavity.l_c_m);
  r.delta_zeeman = zeeman_shift(cfg.field.b_gauss, cfg.atom.g_f, cfg.atom.m_f);
  const FreeSpaceBackground bg =
      free_space_background(cfg.detection.q, cfg.atom.lambda_m,
                            cfg.cavity.w_c_m, gamma, omega,
                            cfg.source.t_transit_s);
  r.theta = bg.theta;
  r.q_free = bg.q_free;
  r.free_space_counts = bg.expected_counts;
  r.readout_error_4 = readout_error(4.0);
  return r;
}

}  // namespace spinsim
