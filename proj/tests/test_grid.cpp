#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "tomo/grid.hpp"
#include "tomo/io.hpp"

using namespace tomo;
namespace fs = std::filesystem;

namespace {

Image random_image(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Image img(n);
  for (auto& x : img.v) x = d(rng);
  return img;
}

// Direct O(N^4) unitary DFT, the independent oracle for fft2.
Spectrum dft2_direct(const Image& img) {
  const int n = img.n;
  Spectrum out(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      std::complex<double> s = 0.0;
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
          const double ph = -2.0 * std::numbers::pi * (double(a) * r + double(b) * c) / n;
          s += img.at(r, c) * std::complex<double>(std::cos(ph), std::sin(ph));
        }
      out.at(a, b) = s / static_cast<double>(n);
    }
  return out;
}

double rel_err(const Spectrum& a, const Spectrum& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.v.size(); ++i) {
    num += std::norm(a.v[i] - b.v[i]);
    den += std::norm(b.v[i]);
  }
  return std::sqrt(num / den);
}

fs::path temp_file(const std::string& name) {
  auto dir = fs::temp_directory_path() / "tomo_grid_test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("fft2 matches the direct DFT oracle and is unitary") {
  const Image zero(8);
  const Spectrum sz = fft2(zero);
  for (const auto& z : sz.v) CHECK(std::abs(z) == 0.0);

  Image delta(4);
  delta.at(0, 0) = 1.0;
  const Spectrum sd = fft2(delta);
  for (const auto& z : sd.v) {
    CHECK(z.real() == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(z.imag() == doctest::Approx(0.0).epsilon(1e-14));
  }

  const Image img = random_image(32, 42);
  const Spectrum fast = fft2(img);
  const Spectrum slow = dft2_direct(img);
  CHECK(rel_err(fast, slow) <= 1e-11);

  double nu = 0.0, ns = 0.0;
  for (std::size_t i = 0; i < img.v.size(); ++i) {
    nu += img.v[i] * img.v[i];
    ns += std::norm(fast.v[i]);
  }
  CHECK(std::fabs(std::sqrt(nu) - std::sqrt(ns)) / std::sqrt(nu) <= 1e-12);
}

TEST_CASE("fft roundtrip and Parseval hold on random inputs") {
  std::mt19937_64 seed_gen(7);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 16 << (trial % 3);
    const Image img = random_image(n, static_cast<unsigned>(seed_gen()));
    const Spectrum s = fft2(img);
    double max_imag = -1.0;
    const Image back = ifft2(s, &max_imag);
    double err = 0.0, nrm = 0.0, ps = 0.0;
    for (std::size_t i = 0; i < img.v.size(); ++i) {
      err += (back.v[i] - img.v[i]) * (back.v[i] - img.v[i]);
      nrm += img.v[i] * img.v[i];
      ps += std::norm(s.v[i]);
    }
    CHECK(std::sqrt(err / nrm) <= 1e-12);
    CHECK(std::fabs(std::sqrt(nrm) - std::sqrt(ps)) / std::sqrt(nrm) <= 1e-12);
    CHECK(max_imag < 1e-10);
  }
}

TEST_CASE("ifft2 of a Hermitian-symmetrized spectrum is real") {
  const Image img = random_image(64, 99);
  Spectrum s = fft2(img);
  // scramble, then symmetrize s(k) := (s(k) + conj(s(-k)))/2
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (auto& z : s.v) z = {d(rng), d(rng)};
  Spectrum sym(s.n);
  const int n = s.n;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const auto mirror = std::conj(s.at((n - a) % n, (n - b) % n));
      sym.at(a, b) = 0.5 * (s.at(a, b) + mirror);
    }
  double max_imag = -1.0;
  (void)ifft2(sym, &max_imag);
  CHECK(max_imag < 1e-10);

  SUBCASE("a grossly non-Hermitian spectrum raises") {
    CHECK_THROWS_AS((void)ifft2(s), std::runtime_error);
  }

  SUBCASE("all-zero spectrum maps to the zero image") {
    const Image z = ifft2(Spectrum(16));
    for (double x : z.v) CHECK(x == 0.0);
  }
}

TEST_CASE("GRD1 roundtrip is bitwise exact") {
  Image img = random_image(16, 1234);
  img.v[0] = -0.0;
  img.v[1] = 1e-308;      // subnormal-range value
  img.v[2] = -1.7e308;    // near the double limits
  const auto path = temp_file("roundtrip.grd");
  write_raster(path, img);
  const Image back = read_raster(path);
  REQUIRE(back.n == img.n);
  for (std::size_t i = 0; i < img.v.size(); ++i) {
    const std::uint64_t* a = reinterpret_cast<const std::uint64_t*>(&img.v[i]);
    const std::uint64_t* b = reinterpret_cast<const std::uint64_t*>(&back.v[i]);
    CHECK(*a == *b);
  }
}

TEST_CASE("GRD1 rejects malformed files") {
  SUBCASE("bad magic") {
    const auto path = temp_file("bad_magic.grd");
    std::ofstream f(path, std::ios::binary);
    f << "GRDXxxxxxxxxxxxxxxxx";
    f.close();
    CHECK_THROWS_AS((void)read_grd(path), std::runtime_error);
  }
  SUBCASE("truncated payload") {
    Image img(8);
    const auto path = temp_file("trunc.grd");
    write_raster(path, img);
    fs::resize_file(path, fs::file_size(path) - 8);  // drop one float64
    CHECK_THROWS_AS((void)read_grd(path), std::runtime_error);
  }
  SUBCASE("non-square raster rejected as Image") {
    const auto path = temp_file("rect.grd");
    std::vector<double> data(6, 1.0);
    write_grd(path, 2, 3, data.data());
    CHECK_THROWS_AS((void)read_raster(path), std::runtime_error);
    const Raster r = read_grd(path);
    CHECK(r.rows == 2);
    CHECK(r.cols == 3);
  }
}

TEST_CASE("PNG writer maps the window to 8-bit gray") {
  auto read_all = [](const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(f)),
                       std::istreambuf_iterator<char>());
  };
  auto gray_of_constant = [&](double v) {
    Image img(16);
    for (auto& x : img.v) x = v;
    const auto path = temp_file("c.png");
    write_png(path, img, 0.0, 1.0);
    const std::string bytes = read_all(path);
    REQUIRE(bytes.size() > 8);
    CHECK(bytes.substr(1, 3) == "PNG");
    return bytes;
  };
  // black, white, and the half-up rounding of the midpoint
  (void)gray_of_constant(0.0);
  (void)gray_of_constant(1.0);
  // Verify actual pixel values by decoding the IDAT with zlib via a
  // pixel-probe: rather than a full PNG decoder, check the pre-compression
  // scanline bytes through a second encode of known data.
  Image img(16);
  for (auto& x : img.v) x = 0.5;
  const auto p1 = temp_file("mid.png");
  write_png(p1, img, 0.0, 1.0);
  Image img2(16);
  for (auto& x : img2.v) x = 128.0 / 255.0;  // exactly gray level 128
  const auto p2 = temp_file("mid2.png");
  write_png(p2, img2, 0.0, 1.0);
  CHECK(read_all(p1) == read_all(p2));  // 0.5*255 = 127.5 rounds half-up to 128

  CHECK_THROWS_AS(write_png(temp_file("bad.png"), img, 1.0, 1.0), std::invalid_argument);
}
