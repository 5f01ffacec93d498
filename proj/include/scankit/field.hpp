#pragma once

// Sampled complex optical fields and the paraxial lens transform between
// the SLM plane and the array (focal) plane. Grids are square with a
// power-of-two side; the coordinate of sample (i, j) is
// ((j - n/2) * pitch, (i - n/2) * pitch), so the optical axis sits on the
// sample at (n/2, n/2).
//
// The lens maps a field of pitch p onto a field of pitch
// lambda * f / (n * p). With that scaling the discrete transform conserves
// power exactly (Parseval), matching an ideal lossless lens.

#include <scankit/fft.hpp>

#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

namespace scankit::optics {

using Complex = std::complex<double>;

enum class Plane { slm, array };

struct Vec2 {
  double x = 0;
  double y = 0;
};

/// Focal length and wavelength of the lens model, shared by every
/// propagation step of a simulation.
struct LensSpec {
  double focal_length = 23e-3;  // [m]
  double wavelength = 459e-9;   // [m]
};

class FieldGrid {
 public:
  FieldGrid(std::size_t n, double pitch, Plane plane)
      : n_(n), pitch_(pitch), plane_(plane), samples_(n * n) {
    if (n < 2 || (n & (n - 1)) != 0)
      throw std::invalid_argument("FieldGrid: side must be a power of two >= 2");
    if (!(pitch > 0)) throw std::invalid_argument("FieldGrid: pitch must be > 0");
  }

  std::size_t n() const { return n_; }
  double pitch() const { return pitch_; }
  Plane plane() const { return plane_; }
  void set_plane(Plane p) { plane_ = p; }
  void set_pitch(double p) { pitch_ = p; }

  Complex& at(std::size_t row, std::size_t col) { return samples_[row * n_ + col]; }
  const Complex& at(std::size_t row, std::size_t col) const { return samples_[row * n_ + col]; }
  Complex* data() { return samples_.data(); }
  const Complex* data() const { return samples_.data(); }

  /// Physical coordinate of a sample index along either axis.
  double coord(std::size_t index) const {
    return (static_cast<double>(index) - static_cast<double>(n_) / 2.0) * pitch_;
  }

  /// Total power, sum |E|^2 * pitch^2.
  double power() const {
    double acc = 0;
    for (const auto& v : samples_) acc += std::norm(v);
    return acc * pitch_ * pitch_;
  }

  void scale(double factor) {
    for (auto& v : samples_) v *= factor;
  }

 private:
  std::size_t n_;
  double pitch_;
  Plane plane_;
  std::vector<Complex> samples_;
};

namespace detail {

// Centered DFT via the (-1)^(i+j) checkerboard identity; phase = +1 selects
// the forward (focusing) kernel exp(-i...), -1 the back-propagating one.
inline void centered_transform(FieldGrid& f, bool inverse) {
  const std::size_t n = f.n();
  Complex* d = f.data();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = (i & 1) ? 0 : 1; j < n; j += 2) d[i * n + j] = -d[i * n + j];
  fft::dft2d_inplace(d, n, inverse);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = (i & 1) ? 0 : 1; j < n; j += 2) d[i * n + j] = -d[i * n + j];
}

inline double output_pitch(const FieldGrid& f, const LensSpec& lens) {
  return lens.wavelength * lens.focal_length / (static_cast<double>(f.n()) * f.pitch());
}

}  // namespace detail

/// Propagates a field through an ideal lens to the conjugate plane
/// (scaled Fourier transform). Output pitch is lambda*f/(n*pitch); the
/// plane tag flips. Power is conserved.
inline FieldGrid lens_fourier(FieldGrid field, const LensSpec& lens) {
  const double out_pitch = detail::output_pitch(field, lens);
  const double scale = field.pitch() * field.pitch() / (lens.wavelength * lens.focal_length);
  detail::centered_transform(field, false);
  field.scale(scale);
  field.set_pitch(out_pitch);
  field.set_plane(field.plane() == Plane::slm ? Plane::array : Plane::slm);
  return field;
}

/// Inverse of lens_fourier: carries an array-plane field back to the SLM
/// plane (conjugate kernel). lens_fourier followed by backpropagate is the
/// identity up to rounding.
inline FieldGrid backpropagate(FieldGrid field, const LensSpec& lens) {
  const double out_pitch = detail::output_pitch(field, lens);
  const double scale = field.pitch() * field.pitch() / (lens.wavelength * lens.focal_length);
  detail::centered_transform(field, true);
  field.scale(scale);
  field.set_pitch(out_pitch);
  field.set_plane(field.plane() == Plane::slm ? Plane::array : Plane::slm);
  return field;
}

/// Unit-power Gaussian amplitude exp(-r^2 / waist^2) centered at `center`
/// (meters). The waist must span at least two samples.
inline FieldGrid gaussian_field(std::size_t n, double pitch, double waist, Vec2 center,
                                Plane plane = Plane::slm) {
  FieldGrid f(n, pitch, plane);
  if (!(waist >= 2.0 * pitch))
    throw std::domain_error("gaussian_field: waist below 2*pitch is undersampled");
  const double half = static_cast<double>(n) / 2.0 * pitch;
  if (std::abs(center.x) > half || std::abs(center.y) > half)
    throw std::domain_error("gaussian_field: center outside grid");
  std::vector<double> gx(n), gy(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = f.coord(i) - center.x;
    const double y = f.coord(i) - center.y;
    gx[i] = std::exp(-x * x / (waist * waist));
    gy[i] = std::exp(-y * y / (waist * waist));
  }
  double norm2 = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double a = gy[i] * gx[j];
      f.at(i, j) = a;
      norm2 += a * a;
    }
  f.scale(1.0 / std::sqrt(norm2 * pitch * pitch));
  return f;
}

namespace detail {

// One-sample raised-cosine weight across the edge of a flattop of full
// width `side` centered at c; 1 well inside, 0 well outside.
inline double flattop_edge(double coord, double c, double side, double pitch) {
  const double d = side / 2.0 - std::abs(coord - c);  // distance inside the edge
  if (d >= 0.5 * pitch) return 1.0;
  if (d <= -0.5 * pitch) return 0.0;
  return 0.5 * (1.0 + std::sin(std::numbers::pi * d / pitch));
}

}  // namespace detail

/// Unit-power square flattop of the given full side length, with a
/// one-sample raised-cosine edge to tame Gibbs ringing of the sampled
/// model.
inline FieldGrid flattop_field(std::size_t n, double pitch, double side, Vec2 center,
                               Plane plane = Plane::slm) {
  FieldGrid f(n, pitch, plane);
  if (!(side >= 4.0 * pitch)) throw std::domain_error("flattop_field: side below 4*pitch");
  if (side > static_cast<double>(n) * pitch)
    throw std::domain_error("flattop_field: side exceeds grid");
  std::vector<double> wx(n), wy(n);
  for (std::size_t i = 0; i < n; ++i) {
    wx[i] = detail::flattop_edge(f.coord(i), center.x, side, pitch);
    wy[i] = detail::flattop_edge(f.coord(i), center.y, side, pitch);
  }
  double norm2 = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double a = wy[i] * wx[j];
      f.at(i, j) = a;
      norm2 += a * a;
    }
  f.scale(1.0 / std::sqrt(norm2 * pitch * pitch));
  return f;
}

/// Intensity dump as a binary 16-bit PGM (P5), row-major, scaled so the
/// brightest sample maps to 65535.
inline void write_intensity_pgm(const FieldGrid& f, const std::filesystem::path& path) {
  const std::size_t n = f.n();
  double peak = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) peak = std::max(peak, std::norm(f.at(i, j)));
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string());
  os << "P5\n" << n << ' ' << n << "\n65535\n";
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double v = peak > 0 ? std::norm(f.at(i, j)) / peak : 0.0;
      const auto q = static_cast<std::uint16_t>(std::lround(v * 65535.0));
      const unsigned char bytes[2] = {static_cast<unsigned char>(q >> 8),
                                      static_cast<unsigned char>(q & 0xff)};
      os.write(reinterpret_cast<const char*>(bytes), 2);
    }
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace scankit::optics
