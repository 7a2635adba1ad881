#include "spinsim/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "spinsim/errors.hpp"
#include "spinsim/model.hpp"
#include "spinsim/units.hpp"

namespace spinsim {
namespace {

struct Field {
  const char* section;
  const char* key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    while (pos < v.size() && std::isspace(static_cast<unsigned char>(v[pos])))
      ++pos;
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: cannot parse value '" + v + "' for key " + key);
  }
}

std::string fmt_full(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

Field dfield(const char* sec, const char* key,
             double* (*ptr)(ExperimentConfig&)) {
  return Field{
      sec, key,
      [ptr, sec, key](ExperimentConfig& c, const std::string& v) {
        *ptr(c) = parse_double(std::string(sec) + "." + key, v);
      },
      [ptr](const ExperimentConfig& c) {
        return fmt_full(*ptr(const_cast<ExperimentConfig&>(c)));
      }};
}

Field ifield(const char* sec, const char* key, int* (*ptr)(ExperimentConfig&)) {
  return Field{
      sec, key,
      [ptr, sec, key](ExperimentConfig& c, const std::string& v) {
        const double x = parse_double(std::string(sec) + "." + key, v);
        if (x != std::floor(x))
          throw ConfigError(std::string("config: key ") + sec + "." + key +
                            " must be an integer");
        *ptr(c) = static_cast<int>(x);
      },
      [ptr](const ExperimentConfig& c) {
        return std::to_string(*ptr(const_cast<ExperimentConfig&>(c)));
      }};
}

#define DF(sec, member, key) \
  dfield(#sec, key, +[](ExperimentConfig& c) { return &c.sec.member; })
#define IF(sec, member, key) \
  ifield(#sec, key, +[](ExperimentConfig& c) { return &c.sec.member; })

const std::vector<Field>& registry() {
  static const std::vector<Field> fields = [] {
    std::vector<Field> f;
    f.push_back(DF(atom, gamma_hz, "gamma_hz"));
    f.push_back(DF(atom, lambda_m, "lambda_m"));
    f.push_back(DF(atom, a_hz, "a_hz"));
    f.push_back(DF(atom, g_f, "g_f"));
    f.push_back(DF(atom, m_f, "m_f"));

    f.push_back(DF(cavity, l_c_m, "l_c_m"));
    f.push_back(DF(cavity, w_c_m, "w_c_m"));
    f.push_back(DF(cavity, t_m, "t_m"));
    f.push_back(DF(cavity, l_m, "l_m"));
    f.push_back(DF(cavity, r_m, "r_m"));
    f.push_back(DF(cavity, kappa_hz, "kappa_hz"));
    f.push_back(DF(cavity, g_max_hz, "g_max_hz"));

    f.push_back(DF(drive, p_total_w, "p_total_w"));
    f.push_back(DF(drive, p_ref_w, "p_ref_w"));
    f.push_back(DF(drive, omega_ref_hz, "omega_ref_hz"));
    f.push_back(DF(drive, w_l_m, "w_l_m"));
    f.push_back(DF(drive, laser_detuning_hz, "laser_detuning_hz"));

    f.push_back(DF(field, b_gauss, "b_gauss"));
    f.push_back(DF(field, delta_hz, "delta_hz"));

    f.push_back(DF(detection, q, "q"));
    f.push_back(IF(detection, n_det, "n_det"));
    f.push_back(DF(detection, r_dark_per_s, "r_dark_per_s"));
    f.push_back(DF(detection, tau_dead_s, "tau_dead_s"));
    f.push_back(DF(detection, t_coin_s, "t_coin_s"));
    f.push_back(DF(detection, t_win_s, "t_win_s"));
    f.push_back(DF(detection, t_gap_s, "t_gap_s"));
    f.push_back(DF(detection, t_pulse_s, "t_pulse_s"));
    f.push_back(DF(detection, t_meas_s, "t_meas_s"));
    f.push_back(DF(detection, t_hold_s, "t_hold_s"));
    f.push_back(DF(detection, zeta, "zeta"));

    f.push_back(DF(source, h_m, "h_m"));
    f.push_back(DF(source, f_per_s, "f_per_s"));
    f.push_back(DF(source, v_f_m_s, "v_f_m_s"));
    f.push_back(DF(source, v_a_m_s, "v_a_m_s"));
    f.push_back(DF(source, t_transit_s, "t_transit_s"));
    f.push_back(DF(source, src_halfwidth_m, "src_halfwidth_m"));

    f.push_back(Field{"sim", "seed",
                      [](ExperimentConfig& c, const std::string& v) {
                        try {
                          c.sim.seed = std::stoull(v);
                        } catch (const std::exception&) {
                          throw ConfigError("config: bad sim.seed '" + v + "'");
                        }
                      },
                      [](const ExperimentConfig& c) {
                        return std::to_string(c.sim.seed);
                      }});
    f.push_back(IF(sim, drops, "drops"));
    f.push_back(IF(sim, sweep_drops, "sweep_drops"));
    f.push_back(IF(sim, trials, "trials"));
    f.push_back(IF(sim, bins, "bins"));
    f.push_back(DF(sim, profile_span_s, "profile_span_s"));
    f.push_back(DF(sim, pol_error, "pol_error"));
    f.push_back(Field{"sim", "model",
                      [](ExperimentConfig& c, const std::string& v) {
                        if (v != "paper_empirical" && v != "saturating")
                          throw ConfigError("config: sim.model must be "
                                            "paper_empirical or saturating, got '" +
                                            v + "'");
                        c.sim.model = v;
                      },
                      [](const ExperimentConfig& c) { return c.sim.model; }});
    return f;
  }();
  return fields;
}

const Field* find_field(const std::string& section, const std::string& key) {
  for (const Field& f : registry())
    if (section == f.section && key == f.key) return &f;
  return nullptr;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

void apply_kv(ExperimentConfig& cfg, const std::string& section,
              const std::string& key, const std::string& value) {
  const Field* f = find_field(section, key);
  if (!f)
    throw ConfigError("config: unknown key " + section + "." + key);
  f->set(cfg, value);
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError("config: " + msg);
}

}  // namespace

double ExperimentConfig::delta_hz_effective() const {
  if (field.delta_hz >= 0.0) return field.delta_hz;
  return angular_to_hz(
      zeeman_shift(field.b_gauss, atom.g_f, atom.m_f));
}

ModelKind ExperimentConfig::model_kind() const {
  return sim.model == "saturating" ? ModelKind::kSaturating
                                   : ModelKind::kPaperEmpirical;
}

void ExperimentConfig::validate() const {
  require(atom.gamma_hz > 0, "atom.gamma_hz must be > 0");
  require(atom.lambda_m > 0, "atom.lambda_m must be > 0");
  require(atom.a_hz > atom.gamma_hz, "atom.a_hz must exceed atom.gamma_hz");
  require(std::abs(atom.m_f) <= 1.5, "atom.m_f must satisfy |m_f| <= 3/2");

  require(std::abs(cavity.r_m + cavity.t_m + cavity.l_m - 1.0) <= 1e-6,
          "cavity.r_m + cavity.t_m + cavity.l_m must equal 1 within 1e-6");
  require(cavity.kappa_hz > 0, "cavity.kappa_hz must be > 0");
  require(cavity.g_max_hz > 0, "cavity.g_max_hz must be > 0");
  require(cavity.w_c_m < cavity.l_c_m,
          "cavity.w_c_m must be smaller than cavity.l_c_m");

  require(drive.p_total_w >= 0, "drive.p_total_w must be >= 0");
  require(drive.p_ref_w > 0, "drive.p_ref_w must be > 0");
  require(drive.omega_ref_hz > 0, "drive.omega_ref_hz must be > 0");
  require(drive.w_l_m > 0, "drive.w_l_m must be > 0");

  require(field.b_gauss >= 0, "field.b_gauss must be >= 0");
  require(delta_hz_effective() >= 0, "field.delta_hz must be >= 0");

  require(detection.q > 0 && detection.q <= 1,
          "detection.q must be in (0, 1]");
  require(detection.n_det == 1 || detection.n_det == 2,
          "detection.n_det must be 1 or 2");
  require(detection.r_dark_per_s >= 0, "detection.r_dark_per_s must be >= 0");
  for (auto [v, name] : {std::pair<double, const char*>{detection.tau_dead_s, "detection.tau_dead_s"},
                         {detection.t_coin_s, "detection.t_coin_s"},
                         {detection.t_win_s, "detection.t_win_s"},
                         {detection.t_gap_s, "detection.t_gap_s"},
                         {detection.t_pulse_s, "detection.t_pulse_s"},
                         {detection.t_meas_s, "detection.t_meas_s"},
                         {detection.t_hold_s, "detection.t_hold_s"}})
    require(v > 0, std::string(name) + " must be > 0");
  require(detection.t_gap_s + detection.t_meas_s <= detection.t_win_s,
          "detection.t_gap_s + detection.t_meas_s must not exceed "
          "detection.t_win_s");
  require(detection.zeta > 0 && detection.zeta <= 1,
          "detection.zeta must be in (0, 1]");

  require(source.h_m > 0, "source.h_m must be > 0");
  require(source.f_per_s > 0, "source.f_per_s must be > 0");
  require(source.v_f_m_s > 0, "source.v_f_m_s must be > 0");
  require(source.v_a_m_s >= 0, "source.v_a_m_s must be >= 0");
  require(source.t_transit_s > 0, "source.t_transit_s must be > 0");
  require(source.src_halfwidth_m >= 0, "source.src_halfwidth_m must be >= 0");
  require(source.f_per_s * source.t_transit_s < 1.0,
          "source.f_per_s * source.t_transit_s must be < 1 (dilute regime)");

  require(sim.drops >= 1, "sim.drops must be >= 1");
  require(sim.sweep_drops >= 1, "sim.sweep_drops must be >= 1");
  require(sim.trials >= 1, "sim.trials must be >= 1");
  require(sim.bins >= 5, "sim.bins must be >= 5");
  require(sim.profile_span_s > 0, "sim.profile_span_s must be > 0");
  require(sim.pol_error >= 0 && sim.pol_error <= 1,
          "sim.pol_error must be in [0, 1]");
}

ExperimentConfig parse_config_text(const std::string& text,
                                   const std::vector<std::string>& overrides) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config: malformed section header at line " +
                          std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: expected key=value at line " +
                        std::to_string(lineno));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty())
      throw ConfigError("config: key '" + key + "' outside any [section]");
    apply_kv(cfg, section, key, value);
  }

  for (const std::string& ov : overrides) {
    const std::size_t eq = ov.find('=');
    const std::size_t dot = ov.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
      throw ConfigError("config: override must be section.key=value, got '" +
                        ov + "'");
    apply_kv(cfg, trim(ov.substr(0, dot)), trim(ov.substr(dot + 1, eq - dot - 1)),
             trim(ov.substr(eq + 1)));
  }

  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides) {
  std::string text;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in)
      throw ConfigError("config: cannot open file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  return parse_config_text(text, overrides);
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  std::string section;
  for (const Field& f : registry()) {
    if (section != f.section) {
      section = f.section;
      out << "[" << section << "]\n";
    }
    out << f.key << " = " << f.get(cfg) << "\n";
  }
  return out.str();
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string s = serialize_config(cfg);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace spinsim
