#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "spinsim/readout.hpp"
#include "spinsim/stream_sim.hpp"

// Byte-stable serialization: fixed 9-significant-digit formatting, sorted
// JSON keys, documented CSV schemas.  Equal inputs produce equal bytes.

namespace spinsim {

// %.9g with non-finite values mapped to JSON null.
std::string format_g9(double v);

// Minimal JSON object builder; values are stored pre-rendered and dumped
// with keys in lexicographic order.
class JsonObject {
 public:
  void set_number(const std::string& key, double v);
  void set_int(const std::string& key, long long v);
  void set_u64(const std::string& key, std::uint64_t v);
  void set_bool(const std::string& key, bool v);
  void set_string(const std::string& key, const std::string& v);
  void set_raw(const std::string& key, const std::string& rendered);
  void set_object(const std::string& key, const JsonObject& obj);
  void set_number_array(const std::string& key, std::span<const double> v);

  std::string dump() const;  // compact, sorted keys, trailing newline

 private:
  std::map<std::string, std::string> fields_;
};

std::string json_escape(const std::string& s);

// Renders an array of pre-rendered JSON values.
std::string json_array(const std::vector<std::string>& rendered);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// Event CSV, header `t_ns,detector,origin`; origin is "atomic" or "dark".
std::string events_to_csv(const Timeline& events);
Timeline events_from_csv(const std::string& text);

// Window CSV, header `t0_ns,window_end_ns,n_events_in_window`.
std::string windows_to_csv(std::span<const CoincidenceEvent> windows,
                           const Timeline& events);

// Generic numeric table with a fixed header row.
std::string table_to_csv(const std::string& header,
                         std::span<const std::vector<double>> rows);

struct RunManifest {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string version;
  std::string subcommand;
  std::vector<std::string> outputs;
  std::int64_t wall_ms = 0;
};

std::string manifest_to_json(const RunManifest& m);

}  // namespace spinsim
