#include "spinsim/kinematics.hpp"

#include <cmath>

#include "spinsim/errors.hpp"
#include "spinsim/model.hpp"
#include "spinsim/units.hpp"

namespace spinsim {

RateModel RateModel::from_config(const ExperimentConfig& cfg) {
  return from_config(cfg, cfg.model_kind());
}

RateModel RateModel::from_config(const ExperimentConfig& cfg, ModelKind kind) {
  RateModel m;
  m.g_max = hz_to_angular(cfg.cavity.g_max_hz);
  m.kappa = hz_to_angular(cfg.cavity.kappa_hz);
  m.gamma = hz_to_angular(cfg.atom.gamma_hz);
  m.lambda = cfg.atom.lambda_m;
  m.w_c = cfg.cavity.w_c_m;
  m.w_l = cfg.drive.w_l_m;
  m.omega_max = rabi_from_power(cfg.drive.p_total_w, cfg.drive);
  m.laser_detuning = hz_to_angular(cfg.drive.laser_detuning_hz);
  m.gamma_max =
      m.omega_max > 0.0
          ? emission_rate(m.kappa,
                          intracavity_photon_number(m.omega_max, m.g_max))
          : 0.0;
  const double delta = hz_to_angular(cfg.delta_hz_effective());
  const double hfs = hz_to_angular(cfg.atom.a_hz);
  m.gamma_flip = m.omega_max > 0.0
                     ? spin_flip_rate(delta, hfs, m.gamma, m.omega_max)
                     : 0.0;
  m.zeta = cfg.detection.zeta;
  m.q = cfg.detection.q;
  m.kind = kind;
  return m;
}

double RateModel::emit_bound() const {
  if (omega_max <= 0.0) return 0.0;
  if (kind == ModelKind::kPaperEmpirical) return zeta * gamma_max;
  return zeta * saturating_rate_bound(g_max, omega_max, kappa, gamma,
                                      laser_detuning);
}

Trajectory sample_trajectory(Rng& rng, const SourceSpec& source,
                             const CavitySpec& cavity) {
  Trajectory t;
  const double h = source.src_halfwidth_m;
  t.entry[0] = rng.uniform_range(-h, h);
  t.entry[1] = 3.0 * cavity.w_c_m;
  t.entry[2] = rng.uniform_range(-h, h);
  t.velocity[0] = rng.normal(0.0, source.v_a_m_s);
  t.velocity[1] = -source.v_f_m_s;
  t.velocity[2] = rng.normal(0.0, source.v_a_m_s);
  t.phase = rng.uniform_range(0.0, kPi);
  t.t_entry = 0.0;
  return t;
}

std::array<double, 3> position_at(const Trajectory& traj, double t) {
  const double dt = t - traj.t_entry;
  return {traj.entry[0] + traj.velocity[0] * dt,
          traj.entry[1] + traj.velocity[1] * dt,
          traj.entry[2] + traj.velocity[2] * dt};
}

LocalField local_fields(const Trajectory& traj, double t,
                        const RateModel& model, bool beam_on) {
  const auto [x, y, z] = position_at(traj, t);
  LocalField f;
  f.beam_on = beam_on;
  const double standing =
      std::sin(kTwoPi * z / model.lambda + traj.phase);
  f.g_local = model.g_max * std::abs(standing) *
              std::exp(-(x * x + y * y) / (model.w_c * model.w_c));
  f.omega_local =
      beam_on ? model.omega_max *
                    std::exp(-(y * y + z * z) / (model.w_l * model.w_l))
              : 0.0;
  return f;
}

LocalRates local_rates(const LocalField& fields, Spin spin,
                       const RateModel& model) {
  LocalRates out;
  if (spin == Spin::kDown) {
    if (!fields.beam_on || model.omega_max <= 0.0) return out;
    if (model.kind == ModelKind::kPaperEmpirical) {
      // zeta * Gamma_max * sin^2 * intensity envelopes; the envelopes are
      // exactly the squared normalized local amplitudes.
      const double gn = fields.g_local / model.g_max;
      const double on = fields.omega_local / model.omega_max;
      out.emit_rate = model.zeta * model.gamma_max * gn * gn * on * on;
    } else {
      out.emit_rate =
          model.zeta * saturating_rate(fields.g_local, fields.omega_local,
                                       model.kappa, model.gamma,
                                       model.laser_detuning);
    }
  } else {
    if (!fields.beam_on || model.omega_max <= 0.0) return out;
    const double on = fields.omega_local / model.omega_max;
    out.flip_hazard = model.gamma_flip * on * on;
  }
  return out;
}

LocalRates rates_at(const Trajectory& traj, double t, Spin spin,
                    const RateModel& model, bool beam_on) {
  return local_rates(local_fields(traj, t, model, beam_on), spin, model);
}

double transit_duration(const Trajectory& traj, const CavitySpec& cavity) {
  const double vy = traj.velocity[1];
  if (vy >= 0.0) throw UsageError("transit_duration: vy must be negative");
  return (traj.entry[1] + 3.0 * cavity.w_c_m) / (-vy);
}

}  // namespace spinsim
