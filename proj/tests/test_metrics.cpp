#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "tomo/metrics.hpp"

using namespace tomo;

namespace {

Image constant_image(int n, double v) {
  Image img(n);
  for (auto& x : img.v) x = v;
  return img;
}

Image random_image(int n, unsigned seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  Image img(n);
  for (auto& x : img.v) x = d(rng);
  return img;
}

}  // namespace

TEST_CASE("relative l2 error") {
  const Image truth = random_image(32, 1, 0.1, 1.0);
  CHECK(rel_l2(truth, truth) == 0.0);

  Image twice = truth;
  for (auto& x : twice.v) x *= 2.0;
  CHECK(rel_l2(twice, truth) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rel_l2(Image(32), truth) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS((void)rel_l2(truth, Image(32)), std::invalid_argument);

  SUBCASE("triangle-style bound") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 20; ++t) {
      const Image a = random_image(16, 10 + t);
      const Image b = random_image(16, 50 + t);
      const Image c = random_image(16, 90 + t, 0.2, 1.0);
      double ab = 0.0, bc = 0.0, nc = 0.0;
      for (std::size_t i = 0; i < a.v.size(); ++i) {
        ab += (a.v[i] - b.v[i]) * (a.v[i] - b.v[i]);
        bc += (b.v[i] - c.v[i]) * (b.v[i] - c.v[i]);
        nc += c.v[i] * c.v[i];
      }
      CHECK(rel_l2(a, c) <= (std::sqrt(ab) + std::sqrt(bc)) / std::sqrt(nc) + 1e-12);
    }
  }
}

TEST_CASE("psnr") {
  const int n = 32;
  Image truth = constant_image(n, 0.5);
  Image rec = truth;
  rec.v[0] += 1.0;  // MSE = 1/n^2... construct exact MSEs instead below

  // MSE = 0.01 -> 20 dB
  Image a = truth;
  for (auto& x : a.v) x += 0.1;
  CHECK(psnr(a, truth) == doctest::Approx(20.0).epsilon(1e-12));
  // MSE = 1 -> 0 dB
  Image b = truth;
  for (auto& x : b.v) x += 1.0;
  CHECK(psnr(b, truth) == doctest::Approx(0.0).epsilon(1e-10));
  // doubling the peak adds 20*log10(2)
  CHECK(psnr(a, truth, 2.0) - psnr(a, truth, 1.0) ==
        doctest::Approx(20.0 * std::log10(2.0)).epsilon(1e-12));
  CHECK(std::isinf(psnr(truth, truth)));

  SUBCASE("monotone in the noise amplitude") {
    const Image base = random_image(n, 3);
    const Image noise = random_image(n, 4, -1.0, 1.0);
    double prev = std::numeric_limits<double>::infinity();
    for (double amp : {0.01, 0.03, 0.1, 0.3, 1.0}) {
      Image noisy = base;
      for (std::size_t i = 0; i < noisy.v.size(); ++i) noisy.v[i] += amp * noise.v[i];
      const double p = psnr(noisy, base);
      CHECK(p < prev);
      prev = p;
    }
  }
}

TEST_CASE("ssim") {
  const int n = 32;
  SUBCASE("identical images score one") {
    const Image u = random_image(n, 8);
    CHECK(ssim(u, u) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("constant offset reduces to the closed-form luminance term") {
    const Image truth = constant_image(n, 0.5);
    Image rec = constant_image(n, 0.6);
    const double c1 = 1e-4;
    const double expect = (2.0 * 0.5 * 0.6 + c1) / (0.25 + 0.36 + c1);
    CHECK(ssim(rec, truth) == doctest::Approx(expect).epsilon(1e-10));
  }
  SUBCASE("symmetry and range") {
    const Image a = random_image(n, 21);
    const Image b = random_image(n, 22);
    CHECK(ssim(a, b) == doctest::Approx(ssim(b, a)).epsilon(1e-12));
    const double s = ssim(a, b);
    CHECK(s >= -1.0);
    CHECK(s < 1.0);
  }
  SUBCASE("window requires at least 11 pixels") {
    CHECK_THROWS_AS((void)ssim(Image(8), Image(8)), std::invalid_argument);
  }
}
