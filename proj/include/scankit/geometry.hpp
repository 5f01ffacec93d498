#pragma once

// Closed-form design equations for hybrid deflector + SLM beam scanners.
//
// Two layouts are covered. In configuration 1 a fast 2D deflector (AOD A)
// selects one of N_x x N_y hologram patches on the SLM and a second
// deflector (AOD B) undoes the momentum kick; every patch addresses the
// full site array. In configuration 2 each patch addresses a small
// sub-array and a third deflector (AOD C) positions that sub-array on the
// full array. All quantities are expressed through dimensionless q-ratios
// (aperture or spacing length divided by the local beam waist) and the
// deflector time-bandwidth product, so the formulas below are unit-safe as
// long as times are seconds and lengths are meters.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

namespace scankit::geometry {

/// Which deflector bounds the configuration-2 transition time.
enum class Deflector { aod_b, aod_c };

/// Scanner hardware description. Ratios and counts follow the q-ratio
/// convention above; q_aod_c is only meaningful for configuration 2 and
/// is <= 0 when unset.
struct ScannerParams {
  double q_slm = 0;    // SLM patch length / beam waist on the SLM
  double q_a = 0;      // array site spacing / addressing waist
  double q_aod_a = 0;  // AOD A aperture / waist in AOD A
  double q_aod_c = 0;  // AOD C aperture / waist in AOD C (config 2; <=0 = unset)
  double tbw = 0;      // deflector time-bandwidth product
  double t_aod = 0;    // acoustic traversal time of the AOD aperture [s]
  double r_slm = 0;    // SLM full-frame refresh rate [Hz]
  double wavelength = 0;    // [m]
  double focal_length = 0;  // high-NA lens focal length [m]
  int slm_pixels_x = 0;
  int slm_pixels_y = 0;
  int partitions_x = 1;
  int partitions_y = 1;

  bool has_q_aod_c() const { return q_aod_c > 0; }
  bool operator==(const ScannerParams&) const = default;
};

/// Throws std::invalid_argument naming the offending field.
inline void validate(const ScannerParams& p) {
  auto positive = [](double v, const char* key) {
    if (!(v > 0)) throw std::invalid_argument(std::string("invalid value for key: ") + key);
  };
  positive(p.q_slm, "q_slm");
  positive(p.q_a, "q_a");
  positive(p.q_aod_a, "q_aod_a");
  positive(p.tbw, "tbw");
  positive(p.t_aod, "t_aod");
  positive(p.r_slm, "r_slm");
  positive(p.wavelength, "wavelength");
  positive(p.focal_length, "focal_length");
  if (p.slm_pixels_x < 1) throw std::invalid_argument("invalid value for key: slm_pixels_x");
  if (p.slm_pixels_y < 1) throw std::invalid_argument("invalid value for key: slm_pixels_y");
  if (p.partitions_x < 1) throw std::invalid_argument("invalid value for key: partitions_x");
  if (p.partitions_y < 1) throw std::invalid_argument("invalid value for key: partitions_y");
  if (p.slm_pixels_x < p.partitions_x) throw std::invalid_argument("invalid value for key: partitions_x");
  if (p.slm_pixels_y < p.partitions_y) throw std::invalid_argument("invalid value for key: partitions_y");
}

namespace detail {
inline void require_positive(double v, const char* what) {
  if (!(v > 0)) throw std::domain_error(std::string(what) + " must be > 0");
}
inline void require_non_negative(double v, const char* what) {
  if (!(v >= 0)) throw std::domain_error(std::string(what) + " must be >= 0");
}
}  // namespace detail

/// Integer count supported by a real-valued capacity. Tables in the design
/// space treat e.g. 6.948 resolvable spots as supporting 7 partitions, so a
/// 0.1 slack is added before flooring.
inline int usable_count(double value) {
  return static_cast<int>(std::floor(value + 0.1));
}

/// Number of resolvable spots of the patch-selecting deflector,
/// pi * TBW / (q_aod_a * q_slm). Bounds the SLM partition count per axis.
inline double resolvable_spots(double q_aod_a, double q_slm, double tbw) {
  detail::require_positive(q_aod_a, "q_aod_a");
  detail::require_positive(q_slm, "q_slm");
  detail::require_non_negative(tbw, "tbw");
  return std::numbers::pi * tbw / (q_aod_a * q_slm);
}

/// Beam waist at the high-NA lens needed to focus to waist w_a,
/// f * lambda / (pi * w_a), in the far-field limit f >> z_R.
inline double lens_waist(double focal_length, double wavelength, double w_a) {
  detail::require_positive(focal_length, "focal_length");
  detail::require_positive(wavelength, "wavelength");
  detail::require_positive(w_a, "w_a");
  return focal_length * wavelength / (std::numbers::pi * w_a);
}

/// Worst-case beam displacement at the high-NA lens when the momentum kick
/// of the patch-selecting deflector is left uncorrected.
inline double max_displacement(double q_slm, double w_lens, int n_x, int n_y) {
  detail::require_positive(q_slm, "q_slm");
  detail::require_non_negative(w_lens, "w_lens");
  if (n_x < 1 || n_y < 1) throw std::domain_error("partition counts must be >= 1");
  return q_slm * w_lens *
         std::sqrt(double(n_x) * n_x + double(n_y) * n_y) / 2.0;
}

/// Full 2*pi fringes a patch must apply to move the focus by one site,
/// q_a * q_slm / pi. Two pixels per fringe, so one site costs about twice
/// this many pixels along an axis.
inline double fringes_per_site(double q_a, double q_slm) {
  detail::require_positive(q_a, "q_a");
  detail::require_positive(q_slm, "q_slm");
  return q_a * q_slm / std::numbers::pi;
}

/// Sites addressable along one axis by a patch of n_pixels_axis pixels at
/// the two-pixel-per-fringe limit: pi * n / (2 * q_a * q_slm).
inline double max_addressable_sites(double n_pixels_axis, double q_a, double q_slm) {
  detail::require_non_negative(n_pixels_axis, "n_pixels_axis");
  detail::require_positive(q_a, "q_a");
  detail::require_positive(q_slm, "q_slm");
  return std::numbers::pi * n_pixels_axis / (2.0 * q_a * q_slm);
}

/// Conservative pixel budget per array site along one axis: double the
/// two-pixel-per-fringe estimate, rounded up to whole pixels. For
/// q_a = 3, q_slm = 5 this is the familiar 20 px/site rule.
inline int conservative_pixels_per_site(double q_a, double q_slm) {
  return 2 * static_cast<int>(std::ceil(2.0 * fringes_per_site(q_a, q_slm)));
}

/// Addressing waist in the array plane for a patch of length l_slm,
/// f * lambda * q_slm / (pi * l_slm).
inline double waist_at_atoms(double focal_length, double wavelength,
                             double q_slm, double l_slm) {
  detail::require_positive(focal_length, "focal_length");
  detail::require_positive(wavelength, "wavelength");
  detail::require_positive(q_slm, "q_slm");
  detail::require_positive(l_slm, "l_slm");
  return focal_length * wavelength * q_slm / (std::numbers::pi * l_slm);
}

/// True when an n_q x n_q addressing image fits through the corrector
/// deflector aperture with a two-waist buffer on each side:
/// 4 + q_a * (n_q - 1) <= q_aod_a.
inline bool aod_b_aperture_ok(double q_aod_a, double q_a, int n_q) {
  detail::require_positive(q_aod_a, "q_aod_a");
  detail::require_positive(q_a, "q_a");
  if (n_q < 1) throw std::domain_error("n_q must be >= 1");
  return 4.0 + q_a * (n_q - 1) <= q_aod_a;
}

/// Patch-to-patch transition time in configuration 1: the acoustic wave
/// must cross the whole (possibly multi-spot) image in the corrector
/// deflector, t_aod * (4 + q_a * n_q) / q_aod_a.
inline double burst_time_c1(double t_aod, double q_a, int n_q, double q_aod_a) {
  detail::require_positive(t_aod, "t_aod");
  detail::require_positive(q_a, "q_a");
  detail::require_positive(q_aod_a, "q_aod_a");
  if (n_q < 1) throw std::domain_error("n_q must be >= 1");
  return t_aod * (4.0 + q_a * n_q) / q_aod_a;
}

/// Average transition time in configuration 1, amortizing one SLM frame
/// reset over all its patches: 1 / (N_x * N_y * r_slm) + T_burst.
inline double average_time_c1(int partitions_x, int partitions_y, double r_slm,
                              double burst_time) {
  if (partitions_x < 1 || partitions_y < 1)
    throw std::domain_error("partition counts must be >= 1");
  detail::require_positive(r_slm, "r_slm");
  detail::require_non_negative(burst_time, "burst_time");
  return 1.0 / (double(partitions_x) * partitions_y * r_slm) + burst_time;
}

/// Array dimension addressable by the positioning deflector in
/// configuration 2, pi * TBW / (q_aod_c * q_a).
inline double addressable_array_c2(double q_aod_c, double q_a, double tbw) {
  detail::require_positive(q_aod_c, "q_aod_c");
  detail::require_positive(q_a, "q_a");
  detail::require_non_negative(tbw, "tbw");
  return std::numbers::pi * tbw / (q_aod_c * q_a);
}

/// Configuration-2 transition time: the slower of (a) the corrector
/// deflector crossing a sub_m-wide sub-array image and (b) the positioning
/// deflector settling. The sub-array image spans (sub_m - 1) site spacings,
/// hence the (sub_m - 1) in the first term. Ties report the positioning
/// deflector as limiting.
inline std::pair<double, Deflector> transition_time_c2(double t_aod_b, double q_a,
                                                       int sub_m, double q_aod_a,
                                                       double t_aod_c, double q_aod_c) {
  detail::require_positive(t_aod_b, "t_aod_b");
  detail::require_positive(q_a, "q_a");
  detail::require_positive(q_aod_a, "q_aod_a");
  detail::require_positive(t_aod_c, "t_aod_c");
  detail::require_positive(q_aod_c, "q_aod_c");
  if (sub_m < 1) throw std::domain_error("sub_m must be >= 1");
  const double t_b = t_aod_b * (4.0 + q_a * (sub_m - 1)) / q_aod_a;
  const double t_c = 4.0 * t_aod_c / q_aod_c;
  if (t_b > t_c) return {t_b, Deflector::aod_b};
  return {t_c, Deflector::aod_c};
}

/// Configuration-1 performance summary.
struct Config1Report {
  double n_resolvable = 0;        // resolvable spots of AOD A
  int max_partitions_per_axis = 0;
  int n_q_max = 0;                // array dimension at the conservative pixel budget
  double burst_time = 0;          // [s]
  double burst_rate = 0;          // [Hz]
  double average_time = 0;        // [s]
  double average_rate = 0;        // [Hz]
  bool aperture_ok = false;
};

/// Configuration-2 performance summary.
struct Config2Report {
  int n_q = 0;                  // addressable array dimension
  double transition_time = 0;   // [s]
  double transition_rate = 0;   // [Hz]
  Deflector limiting_deflector = Deflector::aod_c;
};

/// Pixels per patch along the tighter axis. Partition counts that do not
/// divide the pixel count evenly simply waste the remainder.
inline int pixels_per_patch(const ScannerParams& p) {
  const int px = p.slm_pixels_x / p.partitions_x;
  const int py = p.slm_pixels_y / p.partitions_y;
  return px < py ? px : py;
}

inline Config1Report config1_report(const ScannerParams& p) {
  validate(p);
  Config1Report r;
  r.n_resolvable = resolvable_spots(p.q_aod_a, p.q_slm, p.tbw);
  r.max_partitions_per_axis = usable_count(r.n_resolvable);
  const int per_site = conservative_pixels_per_site(p.q_a, p.q_slm);
  r.n_q_max = pixels_per_patch(p) / per_site;
  if (r.n_q_max < 1) r.n_q_max = 1;
  r.burst_time = burst_time_c1(p.t_aod, p.q_a, r.n_q_max, p.q_aod_a);
  r.burst_rate = 1.0 / r.burst_time;
  r.average_time = average_time_c1(p.partitions_x, p.partitions_y, p.r_slm, r.burst_time);
  r.average_rate = 1.0 / r.average_time;
  r.aperture_ok = aod_b_aperture_ok(p.q_aod_a, p.q_a, r.n_q_max);
  return r;
}

inline Config2Report config2_report(const ScannerParams& p, int sub_m, int sub_n) {
  validate(p);
  if (!p.has_q_aod_c()) throw std::invalid_argument("invalid value for key: q_aod_c");
  if (sub_m < 1 || sub_n < 1) throw std::domain_error("sub-array dimensions must be >= 1");
  Config2Report r;
  r.n_q = usable_count(addressable_array_c2(p.q_aod_c, p.q_a, p.tbw));
  const int sub_max = sub_m > sub_n ? sub_m : sub_n;
  auto [t, lim] = transition_time_c2(p.t_aod, p.q_a, sub_max, p.q_aod_a, p.t_aod, p.q_aod_c);
  r.transition_time = t;
  r.transition_rate = 1.0 / t;
  r.limiting_deflector = lim;
  return r;
}

}  // namespace scankit::geometry
