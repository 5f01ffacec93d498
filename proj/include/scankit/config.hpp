#pragma once

// Tool configuration file: flat `key = value` entries under [scanner],
// [simulation] and [paths] section headers. Unknown sections or keys are
// rejected, scanner keys are mandatory (q_aod_c excepted), simulation and
// paths have defaults. All values are SI base units.

#include <scankit/geometry.hpp>
#include <scankit/hologram.hpp>

#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

namespace scankit::config {

/// Configuration or usage problem; maps to exit code 2 in the CLI.
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ToolConfig {
  geometry::ScannerParams scanner;

  // [simulation]
  std::size_t grid = std::size_t{1} << 12;
  int sim_per_slm = 4;
  int bits = 10;
  optics::TargetShape shape = optics::TargetShape::gaussian;
  int patch_pixels = 66;
  int array_dim = 4;
  double slm_pixel_pitch = 8e-6;

  // [paths]
  std::string out_dir = ".";

  bool operator==(const ToolConfig&) const = default;
};

inline optics::Protocol to_protocol(const ToolConfig& c) {
  optics::Protocol p;
  p.grid = c.grid;
  p.sim_per_slm = c.sim_per_slm;
  p.bits = c.bits;
  p.q_slm = c.scanner.q_slm;
  p.q_a = c.scanner.q_a;
  p.lens = {c.scanner.focal_length, c.scanner.wavelength};
  p.slm_pixel_pitch = c.slm_pixel_pitch;
  p.array_dim = c.array_dim;
  p.shape = c.shape;
  return p;
}

namespace detail {

inline double parse_double(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(value, &pos);
  } catch (const std::exception&) {
    throw config_error("bad value for key: " + key);
  }
  while (pos < value.size() && std::isspace(static_cast<unsigned char>(value[pos]))) ++pos;
  if (pos != value.size() || !std::isfinite(v)) throw config_error("bad value for key: " + key);
  return v;
}

inline long parse_int(const std::string& key, const std::string& value) {
  const double v = parse_double(key, value);
  if (v != std::floor(v)) throw config_error("bad value for key: " + key);
  return static_cast<long>(v);
}

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace detail

/// Applies one `section.key = value` entry; used both by the parser and by
/// command-line overrides.
inline void apply_entry(ToolConfig& c, const std::string& section, const std::string& key,
                        const std::string& value) {
  using detail::parse_double;
  using detail::parse_int;
  auto& s = c.scanner;
  if (section == "scanner") {
    if (key == "q_slm") s.q_slm = parse_double(key, value);
    else if (key == "q_a") s.q_a = parse_double(key, value);
    else if (key == "q_aod_a") s.q_aod_a = parse_double(key, value);
    else if (key == "q_aod_c") s.q_aod_c = parse_double(key, value);
    else if (key == "tbw") s.tbw = parse_double(key, value);
    else if (key == "t_aod") s.t_aod = parse_double(key, value);
    else if (key == "r_slm") s.r_slm = parse_double(key, value);
    else if (key == "wavelength") s.wavelength = parse_double(key, value);
    else if (key == "focal_length") s.focal_length = parse_double(key, value);
    else if (key == "slm_pixels_x") s.slm_pixels_x = static_cast<int>(parse_int(key, value));
    else if (key == "slm_pixels_y") s.slm_pixels_y = static_cast<int>(parse_int(key, value));
    else if (key == "partitions_x") s.partitions_x = static_cast<int>(parse_int(key, value));
    else if (key == "partitions_y") s.partitions_y = static_cast<int>(parse_int(key, value));
    else throw config_error("unknown key: scanner." + key);
  } else if (section == "simulation") {
    if (key == "grid") {
      const long g = parse_int(key, value);
      if (g < 4) throw config_error("bad value for key: grid");
      c.grid = static_cast<std::size_t>(g);
    } else if (key == "sim_per_slm") c.sim_per_slm = static_cast<int>(parse_int(key, value));
    else if (key == "bits") c.bits = static_cast<int>(parse_int(key, value));
    else if (key == "patch_pixels") c.patch_pixels = static_cast<int>(parse_int(key, value));
    else if (key == "array_dim") c.array_dim = static_cast<int>(parse_int(key, value));
    else if (key == "slm_pixel_pitch") c.slm_pixel_pitch = parse_double(key, value);
    else if (key == "shape") {
      if (value == "gaussian") c.shape = optics::TargetShape::gaussian;
      else if (value == "flattop") c.shape = optics::TargetShape::flattop;
      else throw config_error("bad value for key: shape");
    } else throw config_error("unknown key: simulation." + key);
  } else if (section == "paths") {
    if (key == "out_dir") c.out_dir = value;
    else throw config_error("unknown key: paths." + key);
  } else {
    throw config_error("unknown section: " + section);
  }
}

/// Parses a configuration document. Requires every scanner key except
/// q_aod_c; rejects unknown keys, sections and duplicates.
inline ToolConfig parse(std::istream& is) {
  ToolConfig c;
  std::string section;
  std::string line;
  std::size_t line_no = 0;
  std::map<std::string, int> seen;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw config_error("malformed section on line " + std::to_string(line_no));
      section = t.substr(1, t.size() - 2);
      continue;
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw config_error("expected 'key = value' on line " + std::to_string(line_no));
    if (section.empty()) throw config_error("entry before any [section] on line " + std::to_string(line_no));
    const std::string key = detail::trim(t.substr(0, eq));
    const std::string value = detail::trim(t.substr(eq + 1));
    if (key.empty() || value.empty())
      throw config_error("expected 'key = value' on line " + std::to_string(line_no));
    if (++seen[section + "." + key] > 1) throw config_error("duplicate key: " + section + "." + key);
    apply_entry(c, section, key, value);
  }
  static const char* required[] = {"q_slm", "q_a", "q_aod_a", "tbw", "t_aod", "r_slm",
                                   "wavelength", "focal_length", "slm_pixels_x", "slm_pixels_y",
                                   "partitions_x", "partitions_y"};
  for (const char* key : required)
    if (!seen.count(std::string("scanner.") + key))
      throw config_error(std::string("missing key: ") + key);
  try {
    geometry::validate(c.scanner);
  } catch (const std::invalid_argument& e) {
    throw config_error(e.what());
  }
  if (c.sim_per_slm < 1) throw config_error("bad value for key: sim_per_slm");
  if (c.bits < 1 || c.bits > 30) throw config_error("bad value for key: bits");
  if (c.patch_pixels < 1) throw config_error("bad value for key: patch_pixels");
  if (c.array_dim < 1) throw config_error("bad value for key: array_dim");
  if (!(c.slm_pixel_pitch > 0)) throw config_error("bad value for key: slm_pixel_pitch");
  if (static_cast<std::size_t>(c.patch_pixels) * c.sim_per_slm > c.grid)
    throw config_error("bad value for key: grid (patch does not fit)");
  return c;
}

/// Canonical serialization; parse(serialize(c)) == c.
inline void serialize(std::ostream& os, const ToolConfig& c) {
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  const auto& s = c.scanner;
  os << "[scanner]\n";
  os << "q_slm = " << num(s.q_slm) << '\n';
  os << "q_a = " << num(s.q_a) << '\n';
  os << "q_aod_a = " << num(s.q_aod_a) << '\n';
  if (s.has_q_aod_c()) os << "q_aod_c = " << num(s.q_aod_c) << '\n';
  os << "tbw = " << num(s.tbw) << '\n';
  os << "t_aod = " << num(s.t_aod) << '\n';
  os << "r_slm = " << num(s.r_slm) << '\n';
  os << "wavelength = " << num(s.wavelength) << '\n';
  os << "focal_length = " << num(s.focal_length) << '\n';
  os << "slm_pixels_x = " << s.slm_pixels_x << '\n';
  os << "slm_pixels_y = " << s.slm_pixels_y << '\n';
  os << "partitions_x = " << s.partitions_x << '\n';
  os << "partitions_y = " << s.partitions_y << '\n';
  os << "\n[simulation]\n";
  os << "grid = " << c.grid << '\n';
  os << "sim_per_slm = " << c.sim_per_slm << '\n';
  os << "bits = " << c.bits << '\n';
  os << "shape = " << optics::to_string(c.shape) << '\n';
  os << "patch_pixels = " << c.patch_pixels << '\n';
  os << "array_dim = " << c.array_dim << '\n';
  os << "slm_pixel_pitch = " << num(c.slm_pixel_pitch) << '\n';
  os << "\n[paths]\n";
  os << "out_dir = " << c.out_dir << '\n';
}

}  // namespace scankit::config
