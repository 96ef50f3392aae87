#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "tomo/sim.hpp"

using namespace tomo;

TEST_CASE("rasterizer") {
  SUBCASE("empty phantom is the zero image") {
    const Image z = rasterize(EllipsePhantom{}, 32);
    for (double x : z.v) CHECK(x == 0.0);
  }
  SUBCASE("centered disk fills interior pixels exactly") {
    EllipsePhantom ph;
    ph.ellipses.push_back({0, 0, 0.25, 0.25, 0, 1.0});
    const int n = 64;
    const Image img = rasterize(ph, n);
    const double h = 1.0 / n;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double x = -0.5 + (j + 0.5) * h;
        const double y = 0.5 - (i + 0.5) * h;
        const double r = std::sqrt(x * x + y * y);
        if (r < 0.25 - 1.5 * h) CHECK(img.at(i, j) == 1.0);
        if (r > 0.25 + 1.5 * h) CHECK(img.at(i, j) == 0.0);
      }
  }
  SUBCASE("thorax preset stays within [0,1] and never clamps") {
    const Image img = rasterize(thorax_phantom(), 256);
    double lo = 1e9, hi = -1e9;
    for (double x : img.v) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    CHECK(lo >= 0.0);
    CHECK(hi <= 1.0);
    CHECK(hi > 0.5);  // structures present
    // no active clamping: analytic intensity sums stay inside [0,1], so the
    // raster and the analytic sinogram describe the same object
  }
}

TEST_CASE("analytic sinogram") {
  SUBCASE("circle chord closed form") {
    EllipsePhantom ph;
    ph.ellipses.push_back({0, 0, 0.3, 0.3, 0, 2.0});
    const Geometry geo = make_half_turn_geometry(64, 16);
    const Sinogram s = analytic_sinogram(ph, geo);
    for (int a = 0; a < geo.n_angles(); ++a)
      for (int k = 0; k < geo.n_bins; ++k) {
        const double off = geo.bin_pos(k);
        const double expect =
            off * off < 0.09 ? 2.0 * 2.0 * std::sqrt(0.09 - off * off) : 0.0;
        CHECK(s.at(a, k) == doctest::Approx(expect).epsilon(1e-12).scale(1.0));
      }
  }
  SUBCASE("empty phantom gives the zero sinogram") {
    const Sinogram s = analytic_sinogram(EllipsePhantom{}, make_half_turn_geometry(32, 8));
    for (double x : s.v) CHECK(x == 0.0);
  }
  SUBCASE("linearity in the intensities") {
    EllipsePhantom ph;
    ph.ellipses.push_back({-0.1, 0.2, 0.2, 0.1, 0.4, 0.7});
    ph.ellipses.push_back({0.15, -0.1, 0.15, 0.25, -0.9, 0.5});
    EllipsePhantom scaled = ph;
    for (auto& e : scaled.ellipses) e.intensity *= 3.0;
    const Geometry geo = make_half_turn_geometry(32, 12);
    const Sinogram a = analytic_sinogram(ph, geo);
    const Sinogram b = analytic_sinogram(scaled, geo);
    for (std::size_t i = 0; i < a.v.size(); ++i)
      CHECK(b.v[i] == doctest::Approx(3.0 * a.v[i]).epsilon(1e-12));
  }
  SUBCASE("discrete forward projection of the raster is consistent") {
    const int n = 256;
    const EllipsePhantom ph = thorax_phantom();
    const Geometry geo = make_half_turn_geometry(n, 90);
    const Sinogram exact = analytic_sinogram(ph, geo);
    const Sinogram approx = radon_forward(rasterize(ph, n), geo);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < exact.v.size(); ++i) {
      num += (approx.v[i] - exact.v[i]) * (approx.v[i] - exact.v[i]);
      den += exact.v[i] * exact.v[i];
    }
    CHECK(std::sqrt(num / den) <= 3.0 / n);
  }
}

TEST_CASE("phantom text files roundtrip") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "tomo_sim_test";
  fs::create_directories(dir);
  const EllipsePhantom ph = thorax_phantom();
  save_phantom(dir / "thorax.txt", ph);
  const EllipsePhantom back = load_phantom(dir / "thorax.txt");
  REQUIRE(back.ellipses.size() == ph.ellipses.size());
  for (std::size_t i = 0; i < ph.ellipses.size(); ++i) {
    CHECK(back.ellipses[i].cx == doctest::Approx(ph.ellipses[i].cx).epsilon(1e-10));
    CHECK(back.ellipses[i].intensity ==
          doctest::Approx(ph.ellipses[i].intensity).epsilon(1e-10));
  }
}

TEST_CASE("poisson photon noise") {
  const int n = 128;
  const EllipsePhantom ph = thorax_phantom();
  const Geometry geo = make_half_turn_geometry(n, 60);
  const Sinogram clean = analytic_sinogram(ph, geo);

  SUBCASE("same seed reproduces the draw; different seeds differ") {
    NoiseConfig nc;
    nc.photons = 1e4;
    nc.seed = 42;
    const NoiseResult a = apply_poisson_noise(clean, nc);
    const NoiseResult b = apply_poisson_noise(clean, nc);
    for (std::size_t i = 0; i < a.sino.v.size(); ++i) CHECK(a.sino.v[i] == b.sino.v[i]);
    nc.seed = 43;
    const NoiseResult c = apply_poisson_noise(clean, nc);
    double diff = 0.0;
    for (std::size_t i = 0; i < a.sino.v.size(); ++i)
      diff += std::fabs(a.sino.v[i] - c.sino.v[i]);
    CHECK(diff > 0.0);
  }

  SUBCASE("masked-out rows stay zero") {
    Sinogram masked = clean;
    for (int a = 0; a < geo.n_angles(); ++a)
      if (a % 2) {
        masked.mask[a] = 0;
        for (int k = 0; k < geo.n_bins; ++k) masked.at(a, k) = 0.0;
      }
    NoiseConfig nc;
    nc.photons = 1e3;
    nc.seed = 7;
    const NoiseResult r = apply_poisson_noise(masked, nc);
    for (int a = 1; a < geo.n_angles(); a += 2)
      for (int k = 0; k < geo.n_bins; ++k) CHECK(r.sino.at(a, k) == 0.0);
  }

  SUBCASE("large photon counts approach the identity") {
    NoiseConfig nc;
    nc.photons = 1e8;
    nc.seed = 11;
    const NoiseResult r = apply_poisson_noise(clean, nc);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < clean.v.size(); ++i) {
      num += (r.sino.v[i] - clean.v[i]) * (r.sino.v[i] - clean.v[i]);
      den += clean.v[i] * clean.v[i];
    }
    CHECK(std::sqrt(num / den) <= 1e-2);
  }

  SUBCASE("zero sinogram: mean stays within three standard errors") {
    Geometry big;
    big.n_bins = 1000;
    for (int a = 0; a < 100; ++a)
      big.angles.push_back(-std::numbers::pi / 2 + a * std::numbers::pi / 100);
    Sinogram zero(big);  // 1e5 bins
    NoiseConfig nc;
    nc.photons = 1e4;
    nc.seed = 3;
    nc.attenuation_scale = 1.0;
    const NoiseResult r = apply_poisson_noise(zero, nc);
    double mean = 0.0;
    for (double x : r.sino.v) mean += x;
    mean /= static_cast<double>(r.sino.v.size());
    // sd of -log(c/N0) ~ 1/sqrt(N0); the log bias ~ 1/(2 N0) sits inside
    const double se = (1.0 / std::sqrt(nc.photons)) / std::sqrt(double(r.sino.v.size()));
    CHECK(std::fabs(mean) <= 3.0 * se);
  }

  SUBCASE("noise variance shrinks as the photon count grows") {
    double prev = 1e30;
    for (double photons : {1e3, 1e4, 1e5}) {
      NoiseConfig nc;
      nc.photons = photons;
      nc.seed = 123;
      const NoiseResult r = apply_poisson_noise(clean, nc);
      double var = 0.0;
      for (std::size_t i = 0; i < clean.v.size(); ++i) {
        const double d = r.sino.v[i] - clean.v[i];
        var += d * d;
      }
      CHECK(var < prev);
      prev = var;
    }
  }

  SUBCASE("config validation") {
    NoiseConfig nc;
    nc.photons = 0.5;
    CHECK_THROWS_AS((void)apply_poisson_noise(clean, nc), std::invalid_argument);
  }
}
