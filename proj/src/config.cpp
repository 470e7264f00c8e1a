#include "nsf/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "nsf/error.hpp"

namespace nsf {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const RawConfig& raw, const std::string& key) {
  const std::string& v = raw.get(key);
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(d))
    throw ConfigError(key + ": expected a finite number, got '" + v + "'");
  return d;
}

long to_long(const RawConfig& raw, const std::string& key) {
  const std::string& v = raw.get(key);
  char* end = nullptr;
  const long d = std::strtol(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size()) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return d;
}

bool to_bool(const RawConfig& raw, const std::string& key) {
  const std::string& v = raw.get(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

std::vector<double> to_list(const RawConfig& raw, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(raw.get(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    char* end = nullptr;
    const double d = std::strtod(item.c_str(), &end);
    if (item.empty() || end != item.c_str() + item.size() || !std::isfinite(d))
      throw ConfigError(key + ": expected a comma-separated list of numbers");
    out.push_back(d);
  }
  return out;
}

template <class T>
void read(const RawConfig& raw, const std::string& key, T& target) {
  if (!raw.has(key)) return;
  if constexpr (std::is_same_v<T, double>)
    target = to_double(raw, key);
  else if constexpr (std::is_same_v<T, int>)
    target = static_cast<int>(to_long(raw, key));
  else if constexpr (std::is_same_v<T, bool>)
    target = to_bool(raw, key);
  else if constexpr (std::is_same_v<T, std::string>)
    target = raw.get(key);
  else
    static_assert(sizeof(T) == 0, "unsupported config type");
}

}  // namespace

void RawConfig::set(const std::string& key, const std::string& value) {
  const auto& keys = known_keys();
  if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw ConfigError("unknown config key '" + key + "'");
  values_[key] = value;
}

const std::string& RawConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing config key '" + key + "'");
  return it->second;
}

std::string RawConfig::canonical() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
  return out;
}

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "grid.nx", "grid.ny", "grid.Lx", "grid.Ly", "quad.order", "basis.n_modes",
      "stress.p", "stress.profile", "stress.nu", "stress.nu_lo", "stress.nu_hi", "stress.eps_d",
      "kappa.profile", "kappa.value", "kappa.lo", "kappa.hi",
      "theta_b.left", "theta_b.right", "theta_b.top", "theta_b.bottom", "eq.tol",
      "run.dt", "run.t_end", "run.record_every", "run.out_dir", "run.seed", "run.coupling_sweeps",
      "run.snapshots",
      "picard.max_iters", "picard.tol", "picard.damping",
      "face_flux", "face_conductivity",
      "v0.kind", "v0.coeffs", "v0.mode", "v0.amplitude", "v0.random_energy",
      "theta0.kind", "theta0.value", "theta0.bump_amplitude", "theta0.bump_cx", "theta0.bump_cy",
      "theta0.bump_width", "theta0.file", "theta0.floor",
      "mms.enabled", "mms.base", "mms.amplitude", "mms.decay",
      "diag.r", "diag.s", "diag.alpha", "diag.M", "diag.delta",
      "study.refine", "study.metric", "study.phi_cx", "study.phi_cy", "study.phi_width",
      "study.phi_t_center", "study.phi_t_width", "study.M", "study.delta", "study.min_order"};
  return keys;
}

RawConfig parse_config(const std::string& text, const std::string& source) {
  RawConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(source + ":" + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      cfg.set(key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

RawConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

void apply_override(RawConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
  cfg.set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

SimulationConfig to_simulation_config(const RawConfig& raw) {
  SimulationConfig c;
  read(raw, "grid.nx", c.nx);
  read(raw, "grid.ny", c.ny);
  read(raw, "grid.Lx", c.lx);
  read(raw, "grid.Ly", c.ly);
  read(raw, "quad.order", c.quad_order);
  read(raw, "basis.n_modes", c.n_modes);
  read(raw, "stress.p", c.p);
  read(raw, "stress.profile", c.stress_profile);
  read(raw, "stress.nu", c.nu);
  read(raw, "stress.nu_lo", c.nu_lo);
  read(raw, "stress.nu_hi", c.nu_hi);
  read(raw, "stress.eps_d", c.eps_d);
  read(raw, "kappa.profile", c.kappa_profile);
  read(raw, "kappa.value", c.kappa_value);
  read(raw, "kappa.lo", c.kappa_lo);
  read(raw, "kappa.hi", c.kappa_hi);
  read(raw, "eq.tol", c.eq_tol);
  read(raw, "run.dt", c.dt);
  read(raw, "run.t_end", c.t_end);
  read(raw, "run.record_every", c.record_every);
  read(raw, "run.out_dir", c.out_dir);
  if (raw.has("run.seed")) {
    const long s = to_long(raw, "run.seed");
    if (s < 0) throw ConfigError("run.seed must be nonnegative");
    c.seed = static_cast<std::uint64_t>(s);
  }
  read(raw, "run.coupling_sweeps", c.coupling_sweeps);
  read(raw, "run.snapshots", c.write_snapshots);
  read(raw, "picard.max_iters", c.picard_max_iters);
  read(raw, "picard.tol", c.picard_tol);
  read(raw, "picard.damping", c.picard_damping);
  read(raw, "diag.r", c.diag_r);
  read(raw, "diag.s", c.diag_s);
  read(raw, "diag.alpha", c.diag_alpha);
  read(raw, "diag.M", c.diag_M);
  read(raw, "diag.delta", c.diag_delta);

  if (raw.has("face_flux")) {
    const auto& v = raw.get("face_flux");
    if (v == "stream") c.face_flux = FaceFlux::Stream;
    else if (v == "point") c.face_flux = FaceFlux::Point;
    else throw ConfigError("face_flux must be stream or point");
  }
  if (raw.has("face_conductivity")) {
    const auto& v = raw.get("face_conductivity");
    if (v == "kirchhoff") c.face_conductivity = FaceConductivity::Kirchhoff;
    else if (v == "harmonic") c.face_conductivity = FaceConductivity::Harmonic;
    else throw ConfigError("face_conductivity must be kirchhoff or harmonic");
  }

  read(raw, "mms.enabled", c.mms);
  read(raw, "mms.base", c.mms_solution.base);
  read(raw, "mms.amplitude", c.mms_solution.amplitude);
  read(raw, "mms.decay", c.mms_solution.decay);
  c.mms_solution.lx = c.lx;
  c.mms_solution.ly = c.ly;

  // Boundary data; with a manufactured solution the default is its boundary value.
  c.theta_b = BoundaryData::uniform(c.mms ? c.mms_solution.base : 1.0);
  if (raw.has("theta_b.left")) c.theta_b.left = SideData::parse(raw.get("theta_b.left"));
  if (raw.has("theta_b.right")) c.theta_b.right = SideData::parse(raw.get("theta_b.right"));
  if (raw.has("theta_b.top")) c.theta_b.top = SideData::parse(raw.get("theta_b.top"));
  if (raw.has("theta_b.bottom")) c.theta_b.bottom = SideData::parse(raw.get("theta_b.bottom"));

  auto& v0 = c.v0;
  std::string kind;
  read(raw, "v0.kind", kind);
  if (kind.empty()) {
    if (raw.has("v0.coeffs")) kind = "coeffs";
    else if (raw.has("v0.mode")) kind = "mode";
    else if (raw.has("v0.random_energy")) kind = "random";
    else kind = "zero";
  }
  read(raw, "v0.mode", v0.mode);
  read(raw, "v0.amplitude", v0.amplitude);
  read(raw, "v0.random_energy", v0.energy);
  if (raw.has("v0.coeffs")) v0.coeffs = to_list(raw, "v0.coeffs");
  v0.seed = c.seed;
  if (kind == "zero") v0.kind = VelocitySpec::Kind::Zero;
  else if (kind == "coeffs") v0.kind = VelocitySpec::Kind::Coeffs;
  else if (kind == "mode") v0.kind = VelocitySpec::Kind::Mode;
  else if (kind == "random") v0.kind = VelocitySpec::Kind::Random;
  else if (kind == "vortex") {
    v0.kind = VelocitySpec::Kind::Field;
    v0.field = polynomial_vortex(v0.amplitude, c.lx, c.ly);
  } else
    throw ConfigError("v0.kind must be zero, coeffs, mode, random or vortex");

  auto& t0 = c.theta0;
  std::string tkind = c.mms ? "mms" : "equilibrium";
  read(raw, "theta0.kind", tkind);
  read(raw, "theta0.value", t0.value);
  read(raw, "theta0.bump_amplitude", t0.bump_amplitude);
  read(raw, "theta0.bump_cx", t0.bump_cx);
  read(raw, "theta0.bump_cy", t0.bump_cy);
  read(raw, "theta0.bump_width", t0.bump_width);
  read(raw, "theta0.file", t0.file);
  read(raw, "theta0.floor", t0.floor);
  if (tkind == "equilibrium") t0.kind = TemperatureSpec::Kind::Equilibrium;
  else if (tkind == "constant") t0.kind = TemperatureSpec::Kind::Constant;
  else if (tkind == "bump") t0.kind = TemperatureSpec::Kind::Bump;
  else if (tkind == "file") t0.kind = TemperatureSpec::Kind::File;
  else if (tkind == "mms") t0.kind = TemperatureSpec::Kind::Manufactured;
  else throw ConfigError("theta0.kind must be equilibrium, constant, bump, file or mms");
  if (t0.kind == TemperatureSpec::Kind::File && t0.file.empty())
    throw ConfigError("theta0.kind = file needs theta0.file");

  c.validate();
  return c;
}

StudySpec to_study_spec(const RawConfig& raw) {
  StudySpec s;
  read(raw, "study.refine", s.refine);
  read(raw, "study.metric", s.metric);
  read(raw, "study.phi_cx", s.phi_cx);
  read(raw, "study.phi_cy", s.phi_cy);
  read(raw, "study.phi_width", s.phi_width);
  read(raw, "study.phi_t_center", s.phi_t_center);
  read(raw, "study.phi_t_width", s.phi_t_width);
  read(raw, "study.M", s.M);
  read(raw, "study.delta", s.delta);
  read(raw, "study.min_order", s.min_order);
  if (s.refine != "space" && s.refine != "time" && s.refine != "both")
    throw ConfigError("study.refine must be space, time or both");
  if (s.metric != "mms" && s.metric != "entropy" && s.metric != "truncated")
    throw ConfigError("study.metric must be mms, entropy or truncated");
  return s;
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace nsf
