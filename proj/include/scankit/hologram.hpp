#pragma once

// Phase hologram synthesis and evaluation. A hologram patch of
// slm_pixels x slm_pixels SLM pixels sits centered on the simulation grid,
// each SLM pixel covering sim_per_slm x sim_per_slm samples so that the
// pixel staircase (and hence the higher diffraction orders it creates) is
// represented. Masks are built by the back-propagation phase-difference
// method: the desired array-plane field is carried back to the SLM plane
// and the pixel phase is the circular mean of arg(back) - arg(input) over
// the pixel block, quantized to the SLM phase resolution.
//
// Performance is measured by the diffraction efficiency eta (power inside
// disks around the targeted sites over input power), the accuracy epsilon
// (RMS relative intensity deviation over the target region, per-site power
// normalized, omitting points below 1/100 of the peak target intensity)
// and the crosstalk fraction (power on untargeted sites of the array).

#include <scankit/field.hpp>
#include <scankit/geometry.hpp>
#include <scankit/partitions.hpp>
#include <scankit/tones.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace scankit::optics {

using partitions::AddressPattern;
using partitions::Site;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Quantized SLM phase pattern for one hologram patch. Values lie on the
/// 2^bits-level grid in [0, 2*pi).
class PhaseMask {
 public:
  PhaseMask(std::vector<double> phases, int slm_pixels, int sim_per_slm, int bits)
      : phases_(std::move(phases)),
        slm_pixels_(slm_pixels),
        sim_per_slm_(sim_per_slm),
        bits_(bits) {
    if (slm_pixels_ < 1 || sim_per_slm_ < 1)
      throw std::invalid_argument("PhaseMask: pixel counts must be >= 1");
    if (bits_ < 1 || bits_ > 30) throw std::invalid_argument("PhaseMask: bits must be in [1,30]");
    if (phases_.size() != static_cast<std::size_t>(slm_pixels_) * slm_pixels_)
      throw std::invalid_argument("PhaseMask: phase array size mismatch");
    const double step = two_pi / double(1 << bits_);
    for (double v : phases_) {
      if (!(v >= 0.0 && v < two_pi)) throw std::invalid_argument("PhaseMask: phase out of range");
      const double levels = v / step;
      if (std::abs(levels - std::round(levels)) > 1e-6)
        throw std::invalid_argument("PhaseMask: phase off the quantization grid");
    }
  }

  int slm_pixels() const { return slm_pixels_; }
  int sim_per_slm() const { return sim_per_slm_; }
  int bits() const { return bits_; }
  int expanded_side() const { return slm_pixels_ * sim_per_slm_; }
  double phase(int pixel_row, int pixel_col) const {
    return phases_[static_cast<std::size_t>(pixel_row) * slm_pixels_ + pixel_col];
  }
  const std::vector<double>& phases() const { return phases_; }

 private:
  std::vector<double> phases_;
  int slm_pixels_;
  int sim_per_slm_;
  int bits_;
};

/// Nearest-level rounding onto 2*pi*j/2^bits. Inputs may be any real
/// phases; they are wrapped into [0, 2*pi) first.
inline PhaseMask quantize_phase(std::vector<double> raw_phases, int slm_pixels,
                                int sim_per_slm, int bits) {
  if (bits < 1) throw std::domain_error("quantize_phase: bits must be >= 1");
  const int levels = 1 << bits;
  const double step = two_pi / levels;
  for (double& v : raw_phases) {
    double w = std::fmod(v, two_pi);
    if (w < 0) w += two_pi;
    long j = std::lround(w / step);
    if (j >= levels) j = 0;
    v = j * step;
  }
  return PhaseMask(std::move(raw_phases), slm_pixels, sim_per_slm, bits);
}

namespace detail {

inline std::size_t patch_start(std::size_t grid_n, int expanded_side) {
  if (static_cast<std::size_t>(expanded_side) > grid_n)
    throw std::invalid_argument("hologram patch exceeds simulation grid");
  return grid_n / 2 - static_cast<std::size_t>(expanded_side) / 2;
}

// Per-pixel circular mean of arg(num) - arg(den) over the patch. Samples
// where either amplitude is below 1e-12 of its patch peak contribute zero
// phase (arg of a vanishing field is undefined).
inline std::vector<double> block_phase_difference(const FieldGrid& num, const FieldGrid& den,
                                                  int slm_pixels, int sim_per_slm) {
  const int side = slm_pixels * sim_per_slm;
  const std::size_t s0 = patch_start(num.n(), side);
  double peak_num = 0, peak_den = 0;
  for (int i = 0; i < side; ++i)
    for (int j = 0; j < side; ++j) {
      peak_num = std::max(peak_num, std::abs(num.at(s0 + i, s0 + j)));
      peak_den = std::max(peak_den, std::abs(den.at(s0 + i, s0 + j)));
    }
  const double tol_num = 1e-12 * peak_num;
  const double tol_den = 1e-12 * peak_den;
  std::vector<double> phases(static_cast<std::size_t>(slm_pixels) * slm_pixels, 0.0);
  for (int pr = 0; pr < slm_pixels; ++pr)
    for (int pc = 0; pc < slm_pixels; ++pc) {
      Complex acc{0, 0};
      for (int i = 0; i < sim_per_slm; ++i)
        for (int j = 0; j < sim_per_slm; ++j) {
          const Complex a = num.at(s0 + pr * sim_per_slm + i, s0 + pc * sim_per_slm + j);
          const Complex b = den.at(s0 + pr * sim_per_slm + i, s0 + pc * sim_per_slm + j);
          const double ma = std::abs(a), mb = std::abs(b);
          if (ma <= tol_num || mb <= tol_den) {
            acc += 1.0;  // phase defined as 0 where the field vanishes
          } else {
            acc += (a / ma) * std::conj(b / mb);
          }
        }
      double phi = (acc == Complex{0, 0}) ? 0.0 : std::arg(acc);
      if (phi < 0) phi += two_pi;
      phases[static_cast<std::size_t>(pr) * slm_pixels + pc] = phi;
    }
  return phases;
}

inline void apply_phases(FieldGrid& f, std::span<const double> phases, int slm_pixels,
                         int sim_per_slm) {
  const int side = slm_pixels * sim_per_slm;
  const std::size_t s0 = patch_start(f.n(), side);
  std::vector<Complex> factors(phases.size());
  for (std::size_t k = 0; k < phases.size(); ++k)
    factors[k] = std::polar(1.0, phases[k]);
  for (int pr = 0; pr < slm_pixels; ++pr)
    for (int pc = 0; pc < slm_pixels; ++pc) {
      const Complex f_pix = factors[static_cast<std::size_t>(pr) * slm_pixels + pc];
      for (int i = 0; i < sim_per_slm; ++i)
        for (int j = 0; j < sim_per_slm; ++j)
          f.at(s0 + pr * sim_per_slm + i, s0 + pc * sim_per_slm + j) *= f_pix;
    }
}

}  // namespace detail

/// Imprints the mask on the patch region of an SLM-plane field. Samples
/// outside the patch pass unmodified.
inline void apply_mask(FieldGrid& field, const PhaseMask& mask) {
  detail::apply_phases(field, mask.phases(), mask.slm_pixels(), mask.sim_per_slm());
}

/// Builds the patch hologram that maps `input` onto `target`:
/// phi = mod(arg(backpropagate(target)) - arg(input), 2*pi), averaged per
/// SLM pixel and quantized to 2^bits levels. When target equals the
/// focused input the mask comes out flat.
inline PhaseMask make_hologram(const FieldGrid& input, FieldGrid target, const LensSpec& lens,
                               int slm_pixels, int sim_per_slm, int bits) {
  if (input.plane() != Plane::slm) throw std::invalid_argument("make_hologram: input must be an SLM-plane field");
  if (target.plane() != Plane::array) throw std::invalid_argument("make_hologram: target must be an array-plane field");
  if (input.n() != target.n()) throw std::invalid_argument("make_hologram: grid size mismatch");
  const double back_pitch =
      lens.wavelength * lens.focal_length / (static_cast<double>(target.n()) * target.pitch());
  if (std::abs(back_pitch - input.pitch()) > 1e-9 * input.pitch())
    throw std::invalid_argument("make_hologram: grids are not lens conjugates");
  FieldGrid back = backpropagate(std::move(target), lens);
  auto raw = detail::block_phase_difference(back, input, slm_pixels, sim_per_slm);
  return quantize_phase(std::move(raw), slm_pixels, sim_per_slm, bits);
}

enum class TargetShape { gaussian, flattop };

/// Desired illumination pattern: `sites` of an array_dim x array_dim site
/// lattice, spaced spacing_ratio effective waists apart. The lattice is
/// offset from the optical axis by origin_sites spacings so that the
/// undiffracted (zeroth-order) light does not sit on a site.
struct TargetSpec {
  int array_dim = 4;
  double spacing_ratio = 3.0;  // q_a
  AddressPattern sites;
  TargetShape shape = TargetShape::gaussian;
  double size = 0;                  // gaussian: waist; flattop: full side [m]
  double origin_sites = 1.0;        // offset of site (0,0) from the axis, in spacings
  double site_radius_waists = 1.5;  // power integration radius / effective waist
};

inline double effective_waist(const TargetSpec& s) {
  return s.shape == TargetShape::gaussian ? s.size : s.size / 2.0;
}
inline double site_pitch(const TargetSpec& s) { return s.spacing_ratio * effective_waist(s); }

inline Vec2 site_center(const TargetSpec& s, Site site) {
  const double pitch = site_pitch(s);
  return {(site.col + s.origin_sites) * pitch, (site.row + s.origin_sites) * pitch};
}

namespace detail {

inline void validate_target_spec(const TargetSpec& s) {
  if (s.array_dim < 1) throw std::domain_error("target array_dim must be >= 1");
  if (!(s.spacing_ratio > 0)) throw std::domain_error("target spacing_ratio must be > 0");
  if (!(s.size > 0)) throw std::domain_error("target size must be > 0");
  if (s.sites.sites.empty()) throw std::domain_error("target pattern must be non-empty");
  for (const Site& site : s.sites.sites)
    if (site.row < 0 || site.col < 0 || site.row >= s.array_dim || site.col >= s.array_dim)
      throw std::domain_error("target site outside the array");
}

// Unnormalized coherent target amplitude at a point (unit peak per site).
inline double target_amplitude(const TargetSpec& s, double x, double y, double sample_pitch) {
  double acc = 0;
  for (const Site& site : s.sites.sites) {
    const Vec2 c = site_center(s, site);
    if (s.shape == TargetShape::gaussian) {
      const double w = s.size;
      const double r2 = (x - c.x) * (x - c.x) + (y - c.y) * (y - c.y);
      acc += std::exp(-r2 / (w * w));
    } else {
      acc += flattop_edge(x, c.x, s.size, sample_pitch) *
             flattop_edge(y, c.y, s.size, sample_pitch);
    }
  }
  return acc;
}

}  // namespace detail

/// Samples the target pattern onto an array-plane grid, normalized to unit
/// power.
inline FieldGrid build_target_field(const TargetSpec& spec, std::size_t n, double pitch) {
  detail::validate_target_spec(spec);
  const double w = effective_waist(spec);
  if (!(w >= 2.0 * pitch)) throw std::domain_error("target sites undersampled on this grid");
  FieldGrid f(n, pitch, Plane::array);
  const double reach = spec.shape == TargetShape::gaussian ? 8.0 * w : spec.size / 2.0 + 2.0 * pitch;
  const double half = static_cast<double>(n) / 2.0 * pitch;
  double norm2 = 0;
  for (const Site& site : spec.sites.sites) {
    const Vec2 c = site_center(spec, site);
    if (std::abs(c.x) + reach > half || std::abs(c.y) + reach > half)
      throw std::domain_error("target sites outside field of view");
  }
  for (const Site& site : spec.sites.sites) {
    const Vec2 c = site_center(spec, site);
    const auto lo_row = static_cast<std::size_t>(std::floor((c.y - reach) / pitch + n / 2.0));
    const auto hi_row = static_cast<std::size_t>(std::ceil((c.y + reach) / pitch + n / 2.0));
    const auto lo_col = static_cast<std::size_t>(std::floor((c.x - reach) / pitch + n / 2.0));
    const auto hi_col = static_cast<std::size_t>(std::ceil((c.x + reach) / pitch + n / 2.0));
    for (std::size_t i = lo_row; i <= hi_row && i < n; ++i)
      for (std::size_t j = lo_col; j <= hi_col && j < n; ++j) {
        const double x = f.coord(j), y = f.coord(i);
        double a;
        if (spec.shape == TargetShape::gaussian) {
          const double r2 = (x - c.x) * (x - c.x) + (y - c.y) * (y - c.y);
          a = std::exp(-r2 / (w * w));
        } else {
          a = detail::flattop_edge(x, c.x, spec.size, pitch) *
              detail::flattop_edge(y, c.y, spec.size, pitch);
        }
        f.at(i, j) += a;
      }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) norm2 += std::norm(f.at(i, j));
  if (!(norm2 > 0)) throw std::domain_error("target field is empty");
  f.scale(1.0 / std::sqrt(norm2 * pitch * pitch));
  return f;
}

struct HologramMetrics {
  double efficiency = 0;            // eta, power on targeted sites / input power
  double accuracy = 0;              // epsilon, RMS relative intensity deviation
  double crosstalk_fraction = 0;    // power on untargeted sites / input power
  double out_of_array_fraction = 0; // remaining power / input power
};

/// Applies the mask, focuses through the lens and scores the output
/// against the target pattern.
inline HologramMetrics propagate_and_measure(FieldGrid input, const PhaseMask& mask,
                                             const TargetSpec& spec, const LensSpec& lens) {
  detail::validate_target_spec(spec);
  const double input_power = input.power();
  apply_mask(input, mask);
  FieldGrid out = lens_fourier(std::move(input), lens);

  const std::size_t n = out.n();
  const double pitch = out.pitch();
  const double pw = pitch * pitch;
  const double la = site_pitch(spec);
  const double radius = spec.site_radius_waists * effective_waist(spec);
  const double half = static_cast<double>(n) / 2.0 * pitch;
  for (const Site& site : spec.sites.sites) {
    const Vec2 c = site_center(spec, site);
    if (std::abs(c.x) + radius > half || std::abs(c.y) + radius > half)
      throw std::domain_error("target sites outside field of view");
  }

  std::vector<char> targeted(static_cast<std::size_t>(spec.array_dim) * spec.array_dim, 0);
  for (const Site& site : spec.sites.sites)
    targeted[static_cast<std::size_t>(site.row) * spec.array_dim + site.col] = 1;

  // Partition the whole output power into targeted disks, untargeted disks
  // and the remainder. Each sample belongs to the nearest lattice site.
  double p_target = 0, p_cross = 0, p_total = 0;
  const double r2max = radius * radius;
  for (std::size_t i = 0; i < n; ++i) {
    const double y = out.coord(i);
    const double ky = std::round(y / la - spec.origin_sites);
    for (std::size_t j = 0; j < n; ++j) {
      const double p = std::norm(out.at(i, j)) * pw;
      p_total += p;
      const double x = out.coord(j);
      const double kx = std::round(x / la - spec.origin_sites);
      if (ky < 0 || kx < 0 || ky >= spec.array_dim || kx >= spec.array_dim) continue;
      const double cy = (ky + spec.origin_sites) * la;
      const double cx = (kx + spec.origin_sites) * la;
      const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
      if (d2 > r2max) continue;
      if (targeted[static_cast<std::size_t>(ky) * spec.array_dim + static_cast<std::size_t>(kx)])
        p_target += p;
      else
        p_cross += p;
    }
  }

  // Accuracy over the target region: per-site power normalization inside
  // the integration disks, then RMS relative deviation at every sample
  // whose target intensity clears 1/100 of the peak.
  const auto n_sites = spec.sites.sites.size();
  std::vector<Vec2> centers(n_sites);
  std::vector<double> pt_site(n_sites, 0), pout_site(n_sites, 0);
  for (std::size_t s = 0; s < n_sites; ++s) centers[s] = site_center(spec, spec.sites.sites[s]);

  const double chi_lo = (spec.origin_sites - 0.5) * la;
  const double chi_hi = (spec.origin_sites + spec.array_dim - 0.5) * la;
  auto clamp_index = [&](double coord) {
    double idx = coord / pitch + static_cast<double>(n) / 2.0;
    if (idx < 0) idx = 0;
    if (idx > static_cast<double>(n - 1)) idx = static_cast<double>(n - 1);
    return static_cast<std::size_t>(idx);
  };
  const std::size_t lo = clamp_index(std::floor(chi_lo / pitch) * pitch);
  const std::size_t hi = clamp_index(std::ceil(chi_hi / pitch) * pitch);

  double it_max = 0;
  for (std::size_t i = lo; i <= hi; ++i) {
    const double y = out.coord(i);
    for (std::size_t j = lo; j <= hi; ++j) {
      const double x = out.coord(j);
      const double amp = detail::target_amplitude(spec, x, y, pitch);
      const double it = amp * amp;
      it_max = std::max(it_max, it);
      for (std::size_t s = 0; s < n_sites; ++s) {
        const double d2 = (x - centers[s].x) * (x - centers[s].x) +
                          (y - centers[s].y) * (y - centers[s].y);
        if (d2 <= r2max) {
          pt_site[s] += it;
          pout_site[s] += std::norm(out.at(i, j));
          break;
        }
      }
    }
  }
  std::vector<double> site_scale(n_sites, 1.0);
  for (std::size_t s = 0; s < n_sites; ++s)
    if (pout_site[s] > 0) site_scale[s] = pt_site[s] / pout_site[s];

  const double threshold = it_max / 100.0;
  double sum_sq = 0;
  std::size_t n_chi = 0;
  for (std::size_t i = lo; i <= hi; ++i) {
    const double y = out.coord(i);
    for (std::size_t j = lo; j <= hi; ++j) {
      const double x = out.coord(j);
      const double amp = detail::target_amplitude(spec, x, y, pitch);
      const double it = amp * amp;
      if (it < threshold) continue;
      std::size_t nearest = 0;
      double best = std::numeric_limits<double>::max();
      for (std::size_t s = 0; s < n_sites; ++s) {
        const double d2 = (x - centers[s].x) * (x - centers[s].x) +
                          (y - centers[s].y) * (y - centers[s].y);
        if (d2 < best) {
          best = d2;
          nearest = s;
        }
      }
      const double iout = std::norm(out.at(i, j)) * site_scale[nearest];
      const double rel = (iout - it) / it;
      sum_sq += rel * rel;
      ++n_chi;
    }
  }

  HologramMetrics m;
  m.efficiency = p_target / input_power;
  m.crosstalk_fraction = p_cross / input_power;
  m.out_of_array_fraction = (p_total - p_target - p_cross) / input_power;
  m.accuracy = n_chi ? std::sqrt(sum_sq / static_cast<double>(n_chi)) : 0.0;
  return m;
}

/// Alternating-projection refinement of a mask: impose the target
/// amplitude in the array plane and the input amplitude in the SLM plane,
/// re-extracting pixel phases each round. The phase of each target site is
/// a free parameter of the projection, re-read from the propagated field
/// every iteration; constraining the phase to the clean per-site profile
/// keeps optical vortices out of the target region, where a free-phase
/// projection stagnates in speckle. iterations = 0 returns the initial
/// mask unchanged. Array-plane powers after each projection can be
/// collected through power_log.
inline PhaseMask gs_refine(const FieldGrid& input, const TargetSpec& spec, const LensSpec& lens,
                           const PhaseMask& initial_mask, int iterations,
                           std::vector<double>* power_log = nullptr) {
  if (iterations < 0) throw std::domain_error("gs_refine: iterations must be >= 0");
  if (iterations == 0) return initial_mask;
  detail::validate_target_spec(spec);
  const int px = initial_mask.slm_pixels();
  const int spp = initial_mask.sim_per_slm();
  const std::size_t n = input.n();
  const double pitch_out =
      lens.wavelength * lens.focal_length / (static_cast<double>(n) * input.pitch());

  const auto& sites = spec.sites.sites;
  std::vector<FieldGrid> components;
  components.reserve(sites.size());
  for (const Site& s : sites) {
    TargetSpec one = spec;
    one.sites = AddressPattern::from({s});
    components.push_back(build_target_field(one, n, pitch_out));
  }

  std::vector<double> raw = initial_mask.phases();
  FieldGrid imposed(n, pitch_out, Plane::array);
  for (int it = 0; it < iterations; ++it) {
    FieldGrid work = input;
    detail::apply_phases(work, raw, px, spp);
    work = lens_fourier(std::move(work), lens);
    std::vector<Complex> coef(sites.size());
    for (std::size_t s = 0; s < sites.size(); ++s) {
      const Vec2 c = site_center(spec, sites[s]);
      const auto ci = static_cast<std::size_t>(std::lround(c.y / pitch_out + n / 2.0));
      const auto cj = static_cast<std::size_t>(std::lround(c.x / pitch_out + n / 2.0));
      const Complex v = work.at(ci, cj);
      coef[s] = std::abs(v) > 0 ? v / std::abs(v) : Complex(1, 0);
    }
    double norm2 = 0;
    for (std::size_t k = 0; k < n * n; ++k) {
      Complex acc{0, 0};
      for (std::size_t s = 0; s < sites.size(); ++s) acc += coef[s] * components[s].data()[k];
      imposed.data()[k] = acc;
      norm2 += std::norm(acc);
    }
    imposed.scale(1.0 / std::sqrt(norm2 * pitch_out * pitch_out));
    if (power_log) power_log->push_back(imposed.power());
    FieldGrid back = backpropagate(imposed, lens);
    raw = detail::block_phase_difference(back, input, px, spp);
  }
  return quantize_phase(std::move(raw), px, spp, initial_mask.bits());
}

/// Mask dump as a binary 16-bit PGM (P5), row-major over SLM pixels,
/// scaled so phase 2*pi maps to 65536 (i.e. value = phi / 2*pi * 65535).
inline void write_phase_pgm(const PhaseMask& mask, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string());
  const int n = mask.slm_pixels();
  os << "P5\n" << n << ' ' << n << "\n65535\n";
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const auto q = static_cast<std::uint16_t>(std::lround(mask.phase(i, j) / two_pi * 65535.0));
      const unsigned char bytes[2] = {static_cast<unsigned char>(q >> 8),
                                      static_cast<unsigned char>(q & 0xff)};
      os.write(reinterpret_cast<const char*>(bytes), 2);
    }
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Benchmark protocol: one hologram patch of a 1000x1000-pixel-class SLM
// addressing a 4 x 4 site array at q_slm = 5, q_a = 3. The desk-scale
// protocol (2^12 grid, 4 samples per SLM pixel) runs in seconds; the
// full-fidelity protocol (2^13 grid, 5 samples per pixel) reproduces the
// reference simulation setup.

struct Protocol {
  std::size_t grid = std::size_t{1} << 12;
  int sim_per_slm = 4;
  int bits = 10;
  double q_slm = 5.0;
  double q_a = 3.0;
  LensSpec lens{};
  double slm_pixel_pitch = 8e-6;  // [m]
  int array_dim = 4;
  TargetShape shape = TargetShape::gaussian;
  double site_radius_waists = 1.5;
};

inline Protocol paper_protocol() {
  Protocol p;
  p.grid = std::size_t{1} << 13;
  p.sim_per_slm = 5;
  return p;
}

/// Fixed target sets used for the k-target benchmark curves. The spread
/// choices keep second-order intermodulation spots of the superposition
/// hologram off the untargeted sites where possible.
inline AddressPattern benchmark_sites(int n_targets) {
  switch (n_targets) {
    case 1: return AddressPattern::from({{3, 3}});
    case 2: return AddressPattern::from({{1, 1}, {3, 3}});
    case 3: return AddressPattern::from({{0, 2}, {2, 0}, {3, 3}});
    case 4: return AddressPattern::from({{0, 0}, {3, 1}, {1, 3}, {3, 3}});
    default: throw std::domain_error("benchmark_sites: 1..4 targets supported");
  }
}

/// A prepared benchmark run: input beam, target description and the raw
/// (unquantized) pixel phases, so different quantization depths can be
/// compared without rebuilding the fields.
struct Instance {
  FieldGrid input;
  TargetSpec spec;
  std::vector<double> raw_phases;
  int patch_pixels;
  int sim_per_slm;
};

inline TargetSpec make_target_spec(const Protocol& proto, int patch_pixels,
                                   const AddressPattern& sites) {
  const double patch_len = patch_pixels * proto.slm_pixel_pitch;
  const double w_a = geometry::waist_at_atoms(proto.lens.focal_length, proto.lens.wavelength,
                                              proto.q_slm, patch_len);
  TargetSpec spec;
  spec.array_dim = proto.array_dim;
  spec.spacing_ratio = proto.q_a;
  spec.sites = sites;
  spec.shape = proto.shape;
  spec.size = proto.shape == TargetShape::gaussian ? w_a : 2.0 * w_a;
  spec.site_radius_waists = proto.site_radius_waists;
  return spec;
}

inline Instance prepare_instance(const Protocol& proto, int patch_pixels,
                                 const AddressPattern& sites) {
  const double pitch_in = proto.slm_pixel_pitch / proto.sim_per_slm;
  const double patch_len = patch_pixels * proto.slm_pixel_pitch;
  const double w_slm = patch_len / proto.q_slm;
  FieldGrid input = gaussian_field(proto.grid, pitch_in, w_slm, {0, 0}, Plane::slm);
  TargetSpec spec = make_target_spec(proto, patch_pixels, sites);
  const double pitch_out = proto.lens.wavelength * proto.lens.focal_length /
                           (static_cast<double>(proto.grid) * pitch_in);
  FieldGrid target = build_target_field(spec, proto.grid, pitch_out);
  FieldGrid back = backpropagate(std::move(target), proto.lens);
  auto raw = detail::block_phase_difference(back, input, patch_pixels, proto.sim_per_slm);
  return Instance{std::move(input), std::move(spec), std::move(raw), patch_pixels,
                  proto.sim_per_slm};
}

inline HologramMetrics measure_with_bits(const Instance& inst, const Protocol& proto, int bits) {
  PhaseMask mask = quantize_phase(inst.raw_phases, inst.patch_pixels, inst.sim_per_slm, bits);
  return propagate_and_measure(inst.input, mask, inst.spec, proto.lens);
}

inline HologramMetrics run_instance(const Protocol& proto, int patch_pixels,
                                    const AddressPattern& sites) {
  Instance inst = prepare_instance(proto, patch_pixels, sites);
  return measure_with_bits(inst, proto, proto.bits);
}

struct SweepRow {
  int pixels;
  int n_targets;
  TargetShape shape;
  HologramMetrics metrics;
};

/// Runs the benchmark over every (pixel count, target count) combination,
/// in the given order.
inline std::vector<SweepRow> sweep_pixels(const Protocol& proto, std::span<const int> pixel_counts,
                                          std::span<const int> target_counts) {
  if (pixel_counts.empty() || target_counts.empty())
    throw std::domain_error("sweep_pixels: empty sweep lists");
  std::vector<SweepRow> rows;
  rows.reserve(pixel_counts.size() * target_counts.size());
  for (int px : pixel_counts)
    for (int k : target_counts)
      rows.push_back(SweepRow{px, k, proto.shape, run_instance(proto, px, benchmark_sites(k))});
  return rows;
}

inline const char* to_string(TargetShape s) {
  return s == TargetShape::gaussian ? "gaussian" : "flattop";
}

inline void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows) {
  os << "pixels_per_axis,n_targets,shape,efficiency,accuracy,crosstalk\n";
  char buf[128];
  for (const SweepRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%d,%s,%.9g,%.9g,%.9g\n", r.pixels, r.n_targets,
                  to_string(r.shape), r.metrics.efficiency, r.metrics.accuracy,
                  r.metrics.crosstalk_fraction);
    os << buf;
  }
}

}  // namespace scankit::optics
