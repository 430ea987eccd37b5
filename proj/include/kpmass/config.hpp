// Experiment configuration: a flat dotted-key text format that round-trips
// losslessly (shortest round-trip float rendering on write, exact binary
// parse on read), schema validation that reports field paths, and the FNV-1a
// hash of the canonical serialization that every artifact embeds.
#pragma once

#include <charconv>
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "kpmass/kernels.hpp"

namespace kpmass::config {

struct EquationConfig {
  std::string family = "kp";  // "kp" or "kp_bbm"
  double alpha = 2.0;
  int epsilon = +1;
  int transverse_dim = 1;
  double weight_order = 0.0;
};

struct GridConfig {
  double x_min = -16.0, x_max = 16.0;
  std::size_t nx = 128;
  double y_min = -16.0, y_max = 16.0;
  std::size_t ny = 64;
  // the z block is only consulted by the spatial (3D) kernel runs
  double z_min = 0.0, z_max = 0.0;
  std::size_t nz = 0;
};

struct DatumConfig {
  std::string kind = "gaussian";  // "gaussian" or "dipole"
  double amplitude = 1.0;
  double width_x = 1.0, width_y = 1.0;
  double center_x = 0.0, center_y = 0.0;
};

struct ToleranceConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double picard_tol = 1e-8;
};

struct OutputConfig {
  std::string directory = ".";
  std::string formats = "csv";  // comma list drawn from {csv, grid}
};

struct ExperimentConfig {
  EquationConfig equation;
  GridConfig grid;
  DatumConfig datum;
  std::vector<double> times{1.0};
  ToleranceConfig tolerances;
  OutputConfig outputs;
};

namespace detail {

// Locale-independent shortest round-trip rendering.
inline std::string render(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string render(std::size_t v) { return std::to_string(v); }
inline std::string render(int v) { return std::to_string(v); }

inline double parse_double(std::string_view s, const std::string& path) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw std::invalid_argument("config: field '" + path + "': not a number: '" +
                                std::string(s) + "'");
  return v;
}

inline long long parse_int(std::string_view s, const std::string& path) {
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw std::invalid_argument("config: field '" + path + "': not an integer: '" +
                                std::string(s) + "'");
  return v;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

}  // namespace detail

// Canonical serialization: fixed key order, one "key = value" per line,
// floats in shortest round-trip form. parse(serialize(c)) reproduces c
// exactly, bit for bit.
inline std::string serialize(const ExperimentConfig& c) {
  using detail::render;
  std::ostringstream os;
  os << "equation.family = " << c.equation.family << '\n';
  os << "equation.alpha = " << render(c.equation.alpha) << '\n';
  os << "equation.epsilon = " << render(c.equation.epsilon) << '\n';
  os << "equation.transverse_dim = " << render(c.equation.transverse_dim) << '\n';
  os << "equation.weight_order = " << render(c.equation.weight_order) << '\n';
  os << "grid.x_min = " << render(c.grid.x_min) << '\n';
  os << "grid.x_max = " << render(c.grid.x_max) << '\n';
  os << "grid.nx = " << render(c.grid.nx) << '\n';
  os << "grid.y_min = " << render(c.grid.y_min) << '\n';
  os << "grid.y_max = " << render(c.grid.y_max) << '\n';
  os << "grid.ny = " << render(c.grid.ny) << '\n';
  os << "grid.z_min = " << render(c.grid.z_min) << '\n';
  os << "grid.z_max = " << render(c.grid.z_max) << '\n';
  os << "grid.nz = " << render(c.grid.nz) << '\n';
  os << "datum.kind = " << c.datum.kind << '\n';
  os << "datum.amplitude = " << render(c.datum.amplitude) << '\n';
  os << "datum.width_x = " << render(c.datum.width_x) << '\n';
  os << "datum.width_y = " << render(c.datum.width_y) << '\n';
  os << "datum.center_x = " << render(c.datum.center_x) << '\n';
  os << "datum.center_y = " << render(c.datum.center_y) << '\n';
  os << "times =";
  for (double t : c.times) os << ' ' << render(t);
  os << '\n';
  os << "tolerances.rel_tol = " << render(c.tolerances.rel_tol) << '\n';
  os << "tolerances.abs_tol = " << render(c.tolerances.abs_tol) << '\n';
  os << "tolerances.picard_tol = " << render(c.tolerances.picard_tol) << '\n';
  os << "outputs.directory = " << c.outputs.directory << '\n';
  os << "outputs.formats = " << c.outputs.formats << '\n';
  return os.str();
}

// Parses the flat dotted-key format: one "key = value" per line, '#' starts
// a comment, blank lines ignored. Unknown keys and malformed values are
// rejected with their field path; duplicate keys are rejected.
inline ExperimentConfig parse(std::string_view text) {
  ExperimentConfig c;
  c.times.clear();
  std::map<std::string, bool> seen;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = detail::trim(text.substr(pos, eol - pos));
    pos = eol + 1;
    if (const std::size_t hash = line.find('#'); hash != std::string_view::npos)
      line = detail::trim(line.substr(0, hash));
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      throw std::invalid_argument("config: malformed line (expected 'key = value'): '" +
                                  std::string(line) + "'");
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string_view val = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument("config: missing key before '='");
    if (seen[key]) throw std::invalid_argument("config: field '" + key + "': duplicate key");
    seen[key] = true;

    if (key == "equation.family")
      c.equation.family = std::string(val);
    else if (key == "equation.alpha")
      c.equation.alpha = detail::parse_double(val, key);
    else if (key == "equation.epsilon")
      c.equation.epsilon = static_cast<int>(detail::parse_int(val, key));
    else if (key == "equation.transverse_dim")
      c.equation.transverse_dim = static_cast<int>(detail::parse_int(val, key));
    else if (key == "equation.weight_order")
      c.equation.weight_order = detail::parse_double(val, key);
    else if (key == "grid.x_min")
      c.grid.x_min = detail::parse_double(val, key);
    else if (key == "grid.x_max")
      c.grid.x_max = detail::parse_double(val, key);
    else if (key == "grid.nx")
      c.grid.nx = static_cast<std::size_t>(detail::parse_int(val, key));
    else if (key == "grid.y_min")
      c.grid.y_min = detail::parse_double(val, key);
    else if (key == "grid.y_max")
      c.grid.y_max = detail::parse_double(val, key);
    else if (key == "grid.ny")
      c.grid.ny = static_cast<std::size_t>(detail::parse_int(val, key));
    else if (key == "grid.z_min")
      c.grid.z_min = detail::parse_double(val, key);
    else if (key == "grid.z_max")
      c.grid.z_max = detail::parse_double(val, key);
    else if (key == "grid.nz")
      c.grid.nz = static_cast<std::size_t>(detail::parse_int(val, key));
    else if (key == "datum.kind")
      c.datum.kind = std::string(val);
    else if (key == "datum.amplitude")
      c.datum.amplitude = detail::parse_double(val, key);
    else if (key == "datum.width_x")
      c.datum.width_x = detail::parse_double(val, key);
    else if (key == "datum.width_y")
      c.datum.width_y = detail::parse_double(val, key);
    else if (key == "datum.center_x")
      c.datum.center_x = detail::parse_double(val, key);
    else if (key == "datum.center_y")
      c.datum.center_y = detail::parse_double(val, key);
    else if (key == "times") {
      std::size_t p = 0;
      while (p < val.size()) {
        while (p < val.size() && (val[p] == ' ' || val[p] == '\t' || val[p] == ',')) ++p;
        std::size_t q = p;
        while (q < val.size() && val[q] != ' ' && val[q] != '\t' && val[q] != ',') ++q;
        if (q > p) c.times.push_back(detail::parse_double(val.substr(p, q - p), key));
        p = q;
      }
      if (c.times.empty())
        throw std::invalid_argument("config: field 'times': needs at least one value");
    } else if (key == "tolerances.rel_tol")
      c.tolerances.rel_tol = detail::parse_double(val, key);
    else if (key == "tolerances.abs_tol")
      c.tolerances.abs_tol = detail::parse_double(val, key);
    else if (key == "tolerances.picard_tol")
      c.tolerances.picard_tol = detail::parse_double(val, key);
    else if (key == "outputs.directory")
      c.outputs.directory = std::string(val);
    else if (key == "outputs.formats")
      c.outputs.formats = std::string(val);
    else
      throw std::invalid_argument("config: unknown field '" + key + "'");
  }
  if (c.times.empty()) c.times.push_back(1.0);
  return c;
}

// Translates the equation block into the kernels spec, rejecting unknown
// names with their field path.
inline kernels::DispersionSpec to_spec(const ExperimentConfig& c) {
  kernels::DispersionSpec s;
  if (c.equation.family == "kp")
    s.family = kernels::Family::kp;
  else if (c.equation.family == "kp_bbm")
    s.family = kernels::Family::kp_bbm;
  else
    throw std::invalid_argument("config: field 'equation.family': unknown family '" +
                                c.equation.family + "' (expected kp or kp_bbm)");
  s.alpha = c.equation.alpha;
  s.epsilon = c.equation.epsilon;
  s.transverse_dim = c.equation.transverse_dim;
  s.weight_order = c.equation.weight_order;
  return s;
}

// Schema validation with field paths. The dispersion constraints themselves
// (alpha floors, weight-order admissibility) are delegated to the kernels
// module so the rules live in one place.
inline void validate(const ExperimentConfig& c) {
  try {
    kernels::validate(to_spec(c));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument("config: field 'equation': " + std::string(e.what()));
  }
  auto axis = [](double lo, double hi, std::size_t n, const char* path) {
    if (!(hi > lo))
      throw std::invalid_argument(std::string("config: field 'grid.") + path +
                                  "': need max > min");
    if (n < 4)
      throw std::invalid_argument(std::string("config: field 'grid.") + path +
                                  "': need at least 4 points");
  };
  axis(c.grid.x_min, c.grid.x_max, c.grid.nx, "x");
  axis(c.grid.y_min, c.grid.y_max, c.grid.ny, "y");
  if (c.grid.nz > 0) axis(c.grid.z_min, c.grid.z_max, c.grid.nz, "z");
  if (c.datum.kind != "gaussian" && c.datum.kind != "dipole")
    throw std::invalid_argument("config: field 'datum.kind': unknown kind '" + c.datum.kind +
                                "' (expected gaussian or dipole)");
  if (!(c.datum.width_x > 0.0) || !(c.datum.width_y > 0.0))
    throw std::invalid_argument("config: field 'datum.width': widths must be positive");
  if (!(c.tolerances.rel_tol > 0.0) || !(c.tolerances.abs_tol > 0.0) ||
      !(c.tolerances.picard_tol > 0.0))
    throw std::invalid_argument("config: field 'tolerances': all tolerances must be positive");
  for (double t : c.times)
    if (!std::isfinite(t) || t < 0.0)
      throw std::invalid_argument("config: field 'times': times must be finite and >= 0");
  if (c.outputs.directory.empty())
    throw std::invalid_argument("config: field 'outputs.directory': must not be empty");
  for (std::size_t p = 0, q = 0; p <= c.outputs.formats.size(); p = q + 1) {
    q = std::min(c.outputs.formats.find(',', p), c.outputs.formats.size());
    const std::string f = c.outputs.formats.substr(p, q - p);
    if (f != "csv" && f != "grid")
      throw std::invalid_argument("config: field 'outputs.formats': unknown format '" + f +
                                  "' (expected csv or grid)");
    if (q == c.outputs.formats.size()) break;
  }
}

// The spectral torus stepper requires power-of-two sample counts; the
// convolution path has no such restriction, so the gate is separate from
// validate().
inline void require_pow2_grid(const GridConfig& g) {
  auto pow2 = [](std::size_t n) { return n >= 8 && (n & (n - 1)) == 0; };
  if (!pow2(g.nx))
    throw std::invalid_argument(
        "config: field 'grid.nx': spectral runs need a power-of-two count >= 8");
  if (!pow2(g.ny))
    throw std::invalid_argument(
        "config: field 'grid.ny': spectral runs need a power-of-two count >= 8");
}

// 64-bit FNV-1a of the canonical serialization; embedded in every artifact.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string config_hash_hex(const ExperimentConfig& c) {
  std::uint64_t h = fnv1a64(serialize(c));
  char buf[17];
  for (int i = 15; i >= 0; --i) {
    buf[i] = "0123456789abcdef"[h & 0xf];
    h >>= 4;
  }
  buf[16] = '\0';
  return std::string(buf, 16);
}

}  // namespace kpmass::config
