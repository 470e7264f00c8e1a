#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "nsf/solver.hpp"

namespace nsf {

/// Flat key=value configuration. Later assignments of a key override earlier ones.
class RawConfig {
 public:
  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::string& get(const std::string& key) const;
  const std::map<std::string, std::string>& values() const { return values_; }

  /// Sorted "key=value" lines; the hashing input.
  std::string canonical() const;

 private:
  std::map<std::string, std::string> values_;
};

/// Parses UTF-8 text: one key=value per line, '#' starts a comment, blank lines ignored.
/// Unknown keys and malformed lines raise ConfigError with the line number.
RawConfig parse_config(const std::string& text, const std::string& source = "<config>");
RawConfig load_config(const std::string& path);

/// Applies one "key=value" override.
void apply_override(RawConfig& cfg, const std::string& assignment);

/// All recognised keys.
const std::vector<std::string>& known_keys();

/// Parameters of `study`, read from the study.* keys.
struct StudySpec {
  std::string refine = "space";  // space | time | both
  std::string metric = "mms";    // mms | entropy | truncated
  double phi_cx = 0.5, phi_cy = 0.5, phi_width = 0.35;
  double phi_t_center = 0.0, phi_t_width = 0.5;  // time bump of the entropy test function
  double M = 0.0, delta = 0.0;                   // truncated identity; 0 means diag.M / diag.delta
  double min_order = 0.0;                        // 0: no order requirement
};

SimulationConfig to_simulation_config(const RawConfig& raw);
StudySpec to_study_spec(const RawConfig& raw);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view data);

}  // namespace nsf
