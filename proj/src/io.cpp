#include "spinsim/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "spinsim/errors.hpp"

namespace spinsim {

std::string format_g9(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

void JsonObject::set_number(const std::string& key, double v) {
  fields_[key] = format_g9(v);
}

void JsonObject::set_int(const std::string& key, long long v) {
  fields_[key] = std::to_string(v);
}

void JsonObject::set_u64(const std::string& key, std::uint64_t v) {
  fields_[key] = std::to_string(v);
}

void JsonObject::set_bool(const std::string& key, bool v) {
  fields_[key] = v ? "true" : "false";
}

void JsonObject::set_string(const std::string& key, const std::string& v) {
  fields_[key] = "\"" + json_escape(v) + "\"";
}

void JsonObject::set_raw(const std::string& key, const std::string& rendered) {
  fields_[key] = rendered;
}

void JsonObject::set_object(const std::string& key, const JsonObject& obj) {
  std::string d = obj.dump();
  if (!d.empty() && d.back() == '\n') d.pop_back();
  fields_[key] = d;
}

void JsonObject::set_number_array(const std::string& key,
                                  std::span<const double> v) {
  std::vector<std::string> rendered;
  rendered.reserve(v.size());
  for (double x : v) rendered.push_back(format_g9(x));
  fields_[key] = json_array(rendered);
}

std::string JsonObject::dump() const {
  std::string out = "{";
  bool first = true;
  for (const auto& [key, value] : fields_) {
    if (!first) out += ",";
    first = false;
    out += "\"" + json_escape(key) + "\":" + value;
  }
  out += "}\n";
  return out;
}

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

std::string json_array(const std::vector<std::string>& rendered) {
  std::string out = "[";
  for (std::size_t i = 0; i < rendered.size(); ++i) {
    if (i) out += ",";
    out += rendered[i];
  }
  out += "]";
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open for writing: " + path);
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!f) throw IoError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  if (f.bad()) throw IoError("read failed: " + path);
  return ss.str();
}

std::string events_to_csv(const Timeline& events) {
  std::string out = "t_ns,detector,origin\n";
  for (const PhotonEvent& ev : events) {
    out += std::to_string(ev.t_ns);
    out += ',';
    out += std::to_string(static_cast<int>(ev.detector));
    out += ',';
    out += ev.origin == Origin::kAtomic ? "atomic" : "dark";
    out += '\n';
  }
  return out;
}

Timeline events_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw IoError("event csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t_ns,detector,origin")
    throw IoError("event csv: bad header '" + line + "'");
  Timeline out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t c1 = line.find(',');
    const std::size_t c2 = c1 == std::string::npos
                               ? std::string::npos
                               : line.find(',', c1 + 1);
    if (c2 == std::string::npos)
      throw IoError("event csv: malformed line " + std::to_string(lineno));
    PhotonEvent ev;
    try {
      ev.t_ns = std::stoll(line.substr(0, c1));
      const int det = std::stoi(line.substr(c1 + 1, c2 - c1 - 1));
      if (det < 0 || det > 255)
        throw IoError("event csv: detector out of range at line " +
                      std::to_string(lineno));
      ev.detector = static_cast<std::uint8_t>(det);
    } catch (const IoError&) {
      throw;
    } catch (const std::exception&) {
      throw IoError("event csv: malformed number at line " +
                    std::to_string(lineno));
    }
    const std::string origin = line.substr(c2 + 1);
    if (origin == "atomic")
      ev.origin = Origin::kAtomic;
    else if (origin == "dark")
      ev.origin = Origin::kDark;
    else
      throw IoError("event csv: unknown origin '" + origin + "' at line " +
                    std::to_string(lineno));
    out.push_back(ev);
  }
  return out;
}

std::string windows_to_csv(std::span<const CoincidenceEvent> windows,
                           const Timeline& events) {
  std::string out = "t0_ns,window_end_ns,n_events_in_window\n";
  for (const CoincidenceEvent& w : windows) {
    const auto lo = std::lower_bound(
        events.begin(), events.end(), w.t0_ns,
        [](const PhotonEvent& ev, std::int64_t t) { return ev.t_ns < t; });
    const auto hi = std::lower_bound(
        events.begin(), events.end(), w.window_end_ns,
        [](const PhotonEvent& ev, std::int64_t t) { return ev.t_ns < t; });
    out += std::to_string(w.t0_ns);
    out += ',';
    out += std::to_string(w.window_end_ns);
    out += ',';
    out += std::to_string(static_cast<long long>(hi - lo));
    out += '\n';
  }
  return out;
}

std::string table_to_csv(const std::string& header,
                         std::span<const std::vector<double>> rows) {
  std::string out = header + "\n";
  for (const std::vector<double>& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_g9(row[i]);
    }
    out += '\n';
  }
  return out;
}

std::string manifest_to_json(const RunManifest& m) {
  JsonObject j;
  j.set_string("config_hash", m.config_hash);
  j.set_u64("seed", m.seed);
  j.set_string("version", m.version);
  j.set_string("subcommand", m.subcommand);
  std::vector<std::string> outs;
  for (const std::string& o : m.outputs)
    outs.push_back("\"" + json_escape(o) + "\"");
  j.set_raw("outputs", json_array(outs));
  j.set_int("wall_ms", m.wall_ms);
  return j.dump();
}

}  // namespace spinsim
