#include <scankit/field.hpp>

#include <doctest.h>

#include <cmath>
#include <random>

using namespace scankit::optics;
using doctest::Approx;

namespace {

const LensSpec kLens{23e-3, 459e-9};

// 1/e^2 intensity radius from the second moment of a focused spot.
double measured_waist(const FieldGrid& f) {
  double m0 = 0, m2 = 0;
  for (std::size_t i = 0; i < f.n(); ++i)
    for (std::size_t j = 0; j < f.n(); ++j) {
      const double p = std::norm(f.at(i, j));
      const double x = f.coord(j), y = f.coord(i);
      m0 += p;
      m2 += p * (x * x + y * y);
    }
  return std::sqrt(2.0 * m2 / m0);
}

}  // namespace

TEST_CASE("gaussian fields are unit power and hit 1/e at the waist") {
  const double pitch = 2e-6;
  const FieldGrid f = gaussian_field(256, pitch, 24e-6, {0, 0});
  CHECK(f.power() == Approx(1.0).epsilon(1e-9));

  const double peak = std::abs(f.at(128, 128));
  const double at_waist = std::abs(f.at(128, 128 + 12));  // radius = waist = 12 samples
  CHECK(at_waist / peak == Approx(std::exp(-1.0)).epsilon(0.01));

  CHECK_THROWS_AS(gaussian_field(256, pitch, 1.9 * pitch, {0, 0}), std::domain_error);
  CHECK_THROWS_AS(gaussian_field(256, pitch, 24e-6, {1.0, 0}), std::domain_error);
  CHECK_THROWS_AS(FieldGrid(100, pitch, Plane::slm), std::invalid_argument);
}

TEST_CASE("cross-correlation of displaced gaussians peaks at the displacement") {
  const double pitch = 1e-6;
  const int n = 128;
  const int dx = 5, dy = 3;
  const FieldGrid a = gaussian_field(n, pitch, 8e-6, {0, 0});
  const FieldGrid b = gaussian_field(n, pitch, 8e-6, {dx * pitch, dy * pitch});
  double best = -1;
  int best_sx = 99, best_sy = 99;
  for (int sy = -16; sy <= 16; ++sy)
    for (int sx = -16; sx <= 16; ++sx) {
      double acc = 0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const int i2 = i + sy, j2 = j + sx;
          if (i2 < 0 || j2 < 0 || i2 >= n || j2 >= n) continue;
          acc += (std::conj(a.at(i, j)) * b.at(i2, j2)).real();
        }
      if (acc > best) {
        best = acc;
        best_sx = sx;
        best_sy = sy;
      }
    }
  CHECK(best_sx == dx);
  CHECK(best_sy == dy);
}

TEST_CASE("flattop fields") {
  const double pitch = 1e-6;
  const double side = 40e-6;
  const FieldGrid f = flattop_field(256, pitch, side, {0, 0});
  CHECK(f.power() == Approx(1.0).epsilon(1e-9));

  // uniform away from the one-sample roll-off band
  const double center = std::norm(f.at(128, 128));
  const double corner = std::norm(f.at(128 + 17, 128 + 17));
  CHECK(corner / center == Approx(1.0).epsilon(1e-9));

  // first sinc zero of the transform at N*pitch/side = 6.4 bins, within one
  const FieldGrid far = lens_fourier(f, kLens);
  int min_j = 0;
  for (int j = 129; j <= 140; ++j) {
    if (std::abs(far.at(128, j)) < std::abs(far.at(128, j - 1)) &&
        std::abs(far.at(128, j)) < std::abs(far.at(128, j + 1))) {
      min_j = j;
      break;
    }
  }
  CHECK(std::abs(min_j - (128 + 6.4)) <= 1.0);

  CHECK_THROWS_AS(flattop_field(256, pitch, 3e-6, {0, 0}), std::domain_error);
  CHECK_THROWS_AS(flattop_field(256, pitch, 300e-6, {0, 0}), std::domain_error);
}

TEST_CASE("lens transform conserves power on random fields") {
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    FieldGrid f(64, 1e-6, Plane::slm);
    for (std::size_t i = 0; i < 64; ++i)
      for (std::size_t j = 0; j < 64; ++j) f.at(i, j) = {uni(rng), uni(rng)};
    const double before = f.power();
    const FieldGrid out = lens_fourier(f, kLens);
    CHECK(out.plane() == Plane::array);
    CHECK(out.power() == Approx(before).epsilon(1e-10));
  }
}

TEST_CASE("gaussian transforms to the conjugate gaussian waist") {
  const double pitch = 2e-6;
  const double w_in = 10 * pitch;
  const FieldGrid f = gaussian_field(256, pitch, w_in, {0, 0});
  const FieldGrid out = lens_fourier(f, kLens);
  const double expected = kLens.wavelength * kLens.focal_length / (std::numbers::pi * w_in);
  CHECK(measured_waist(out) == Approx(expected).epsilon(0.01));
  CHECK(out.pitch() == Approx(kLens.wavelength * kLens.focal_length / (256 * pitch)));
}

TEST_CASE("linear phase ramps shift the focus by whole output pixels") {
  const double pitch = 2e-6;
  const std::size_t n = 256;
  for (int v = 1; v <= 10; ++v) {
    FieldGrid f = gaussian_field(n, pitch, 24e-6, {0, 0});
    const double length = static_cast<double>(n) * pitch;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        f.at(i, j) *= std::polar(1.0, 2.0 * std::numbers::pi * v * f.coord(j) / length);
    const FieldGrid out = lens_fourier(std::move(f), kLens);
    std::size_t bi = 0, bj = 0;
    double best = -1;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (std::norm(out.at(i, j)) > best) {
          best = std::norm(out.at(i, j));
          bi = i;
          bj = j;
        }
    CHECK(bi == n / 2);
    CHECK(std::abs(static_cast<int>(bj) - static_cast<int>(n / 2 + v)) <= 1);
  }
}

TEST_CASE("backpropagate undoes the lens transform") {
  const FieldGrid f = gaussian_field(128, 1e-6, 10e-6, {3e-6, -2e-6});
  const FieldGrid round = backpropagate(lens_fourier(f, kLens), kLens);
  CHECK(round.plane() == Plane::slm);
  CHECK(round.pitch() == Approx(f.pitch()));
  double worst = 0, peak = 0;
  for (std::size_t i = 0; i < f.n(); ++i)
    for (std::size_t j = 0; j < f.n(); ++j) {
      worst = std::max(worst, std::abs(round.at(i, j) - f.at(i, j)));
      peak = std::max(peak, std::abs(f.at(i, j)));
    }
  CHECK(worst < 1e-12 * peak);
}
