#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "tomo/frames.hpp"

using namespace tomo;

namespace {

constexpr double kPi = std::numbers::pi;

Image random_image(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Image img(n);
  for (auto& x : img.v) x = d(rng);
  return img;
}

double partition_worst(const WindowBank& bank) {
  double worst = 0.0;
  for (std::size_t i = 0; i < bank.plane_size(); ++i) {
    double s = 0.0;
    for (std::size_t p = 0; p < bank.planes(); ++p) {
      const double w = bank.plane(p)[i];
      s += w * w;
    }
    worst = std::max(worst, std::fabs(s - 1.0));
  }
  return worst;
}

double rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("transition function variants") {
  for (NuKind kind : {NuKind::smooth, NuKind::poly3, NuKind::poly5, NuKind::poly7}) {
    CHECK(nu_eval(0.0, kind) == 0.0);
    CHECK(nu_eval(1.0, kind) == 1.0);
    CHECK(nu_eval(-2.0, kind) == 0.0);
    CHECK(nu_eval(3.0, kind) == 1.0);
    CHECK(nu_eval(0.5, kind) == doctest::Approx(0.5).epsilon(1e-14));
    for (double x : {0.1, 0.25, 0.4, 0.45, 0.7, 0.93})
      CHECK(nu_eval(x, kind) + nu_eval(1.0 - x, kind) ==
            doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("meyer base windows take the stated values") {
  const NuKind k = NuKind::smooth;
  CHECK(meyer_radial(2.0 / 3.0, k) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(meyer_radial(5.0 / 6.0, k) == doctest::Approx(1.0));
  CHECK(meyer_radial(1.0, k) == 1.0);
  CHECK(meyer_radial(4.0 / 3.0, k) == doctest::Approx(1.0));
  CHECK(meyer_radial(5.0 / 3.0, k) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(meyer_radial(0.5, k) == 0.0);
  CHECK(meyer_radial(2.0, k) == 0.0);

  CHECK(meyer_angular(0.0, k) == 1.0);
  CHECK(meyer_angular(1.0 / 3.0, k) == 1.0);
  CHECK(meyer_angular(2.0 / 3.0, k) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(meyer_angular(-2.0 / 3.0, k) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(meyer_angular(0.5, k) ==
        doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-12));  // nu(1/2) = 1/2
  // radial squares telescope: W(r)^2 + W(r/2)^2 = 1 on the overlap
  for (double r : {1.40, 1.5, 1.65}) {
    const double a = meyer_radial(r, k);
    const double b = meyer_radial(r / 2.0, k);
    CHECK(a * a + b * b == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("standard bank tiles the frequency plane") {
  WindowSpec spec;
  spec.scales = 3;
  spec.wedges_per_scale = {8, 16, 16};
  const WindowBank bank = build_window_bank(64, spec);
  // 8/2 + 16/2 + 16/2 wedge windows plus lowpass and highpass
  CHECK(bank.planes() == 4 + 8 + 8 + 2);
  CHECK(partition_worst(bank) <= 1e-10);

  SUBCASE("every window is nonnegative and even on the grid") {
    const int n = bank.n;
    for (std::size_t p = 0; p < bank.planes(); ++p) {
      const double* w = bank.plane(p);
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          CHECK(w[a * n + b] >= 0.0);
          CHECK(w[a * n + b] == w[((n - a) % n) * n + (n - b) % n]);
        }
    }
  }

  SUBCASE("the lowpass window owns DC") {
    for (std::size_t p = 0; p < bank.planes(); ++p) {
      const double expect = bank.entries[p].label == WindowLabel::lowpass ? 1.0 : 0.0;
      CHECK(bank.plane(p)[0] == doctest::Approx(expect).epsilon(1e-12));
    }
  }

  SUBCASE("same-scale windows are rotations of one another in angle index") {
    // The angular profiles are circular shifts, so window value distributions
    // per scale must match; check via sorted sums of squares.
    for (int scale = 0; scale < 3; ++scale) {
      double first_mass = -1.0;
      for (std::size_t p = 0; p < bank.planes(); ++p) {
        if (bank.entries[p].scale != scale) continue;
        double mass = 0.0;
        for (std::size_t i = 0; i < bank.plane_size(); ++i)
          mass += bank.plane(p)[i] * bank.plane(p)[i];
        if (first_mass < 0)
          first_mass = mass;
        else
          CHECK(mass == doctest::Approx(first_mass).epsilon(0.02));
      }
    }
  }

  SUBCASE("too many scales for the grid raises") {
    WindowSpec bad;
    bad.scales = 6;
    CHECK_THROWS_AS((void)build_window_bank(32, bad), std::invalid_argument);
  }
}

TEST_CASE("analysis/synthesis form a tight pair") {
  WindowSpec spec;
  spec.scales = 3;
  const WindowBank bank = build_window_bank(64, spec);

  SUBCASE("zero maps to zero both ways") {
    const FrameCoeffs zc = analysis(Image(64), bank);
    for (double x : zc.v) CHECK(x == 0.0);
    const Image zi = synthesis(FrameCoeffs(64, bank.planes()), bank);
    for (double x : zi.v) CHECK(x == 0.0);
  }

  SUBCASE("Parseval and perfect reconstruction on random images") {
    for (int trial = 0; trial < 50; ++trial) {
      const Image u = random_image(64, 700 + trial);
      const FrameCoeffs c = analysis(u, bank);
      double nu = 0.0, nc = 0.0;
      for (double x : u.v) nu += x * x;
      for (double x : c.v) nc += x * x;
      CHECK(std::fabs(std::sqrt(nc) - std::sqrt(nu)) / std::sqrt(nu) <= 1e-10);

      const Image back = synthesis(c, bank);
      CHECK(rel_diff(back.v, u.v) <= 1e-10);
    }
  }

  SUBCASE("analysis and synthesis are adjoint") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
      const Image u = random_image(64, 900 + trial);
      FrameCoeffs t(64, bank.planes());
      for (auto& x : t.v) x = d(rng);
      const FrameCoeffs au = analysis(u, bank);
      const Image st = synthesis(t, bank);
      double lhs = 0.0, rhs = 0.0, den = 0.0;
      for (std::size_t i = 0; i < au.v.size(); ++i) lhs += au.v[i] * t.v[i];
      for (std::size_t i = 0; i < u.v.size(); ++i) {
        rhs += u.v[i] * st.v[i];
        den += u.v[i] * u.v[i];
      }
      CHECK(std::fabs(lhs - rhs) / std::sqrt(den) <= 1e-10);
    }
  }

  SUBCASE("fast path agrees with the fft2 reference path") {
    const Image u = random_image(64, 1111);
    const FrameCoeffs fast = analysis(u, bank);
    const FrameCoeffs ref = analysis_reference(u, bank);
    CHECK(rel_diff(fast.v, ref.v) <= 1e-12);
    const Image sfast = synthesis(fast, bank);
    const Image sref = synthesis_reference(ref, bank);
    CHECK(rel_diff(sfast.v, sref.v) <= 1e-12);
  }

  SUBCASE("spectrum inside one wedge excites only that window family") {
    // Build an image from a single window: all its coefficients live in that
    // window and its Meyer-overlap neighbours.
    const std::size_t pick = 6;
    FrameCoeffs t(64, bank.planes());
    std::mt19937_64 rng(64);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    // random coefficients filtered to window `pick`'s support
    Image seed = random_image(64, 4242);
    const Spectrum ss = fft2(seed);
    Spectrum filtered(64);
    for (std::size_t i = 0; i < ss.v.size(); ++i)
      filtered.v[i] = ss.v[i] * bank.plane(pick)[i] * bank.plane(pick)[i];
    const Image u = ifft2(filtered);
    const FrameCoeffs c = analysis(u, bank);
    double mass_near = 0.0, mass_far = 0.0;
    for (std::size_t p = 0; p < bank.planes(); ++p) {
      // windows overlap iff their products are nonzero somewhere
      double overlap = 0.0;
      for (std::size_t i = 0; i < bank.plane_size(); ++i)
        overlap = std::max(overlap, bank.plane(p)[i] * bank.plane(pick)[i]);
      double mass = 0.0;
      for (std::size_t i = 0; i < bank.plane_size(); ++i)
        mass += c.plane(p)[i] * c.plane(p)[i];
      if (overlap > 0)
        mass_near += mass;
      else
        mass_far += mass;
    }
    CHECK(mass_far <= 1e-20 * std::max(1.0, mass_near));
  }
}

TEST_CASE("wedge-adapted bank") {
  const double phi = 65.0 * kPi / 180.0;
  WindowSpec spec;
  spec.scales = 3;
  spec.wedge_half_angle = phi;
  const WindowBank bank = build_wedge_adapted_bank(64, spec);
  const int n = bank.n;

  SUBCASE("partition of unity is preserved") {
    CHECK(partition_worst(bank) <= 1e-10);
  }

  SUBCASE("labels partition the ring windows") {
    for (const auto& e : bank.entries) {
      if (e.scale < 0) {
        CHECK((e.label == WindowLabel::lowpass || e.label == WindowLabel::highpass));
      } else {
        CHECK((e.label == WindowLabel::visible || e.label == WindowLabel::invisible));
      }
    }
  }

  SUBCASE("invisible windows carry >= 99 percent of their mass outside the wedge") {
    // Grid indicator of the visible wavenumber set (orientation within phi
    // of the x-axis, mod pi).
    for (std::size_t p = 0; p < bank.planes(); ++p) {
      if (bank.entries[p].label != WindowLabel::invisible) continue;
      double inside = 0.0, total = 0.0;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          const int ky = -freq_wrap(a, n);
          const int kx = freq_wrap(b, n);
          if (kx == 0 && ky == 0) continue;
          double o = std::atan2(static_cast<double>(ky), static_cast<double>(kx));
          if (o >= kPi / 2.0) o -= kPi;
          if (o < -kPi / 2.0) o += kPi;
          const double w = bank.plane(p)[a * n + b];
          total += w * w;
          if (std::fabs(o) < phi) inside += w * w;
        }
      REQUIRE(total > 0.0);
      CHECK(inside / total <= 0.01);
    }
  }

  SUBCASE("boundary pairs keep the partition across the wedge edge") {
    // Already implied by the global partition check; verify explicitly on a
    // thin band around the boundary orientation.
    double worst = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        const int ky = -freq_wrap(a, n);
        const int kx = freq_wrap(b, n);
        double o = std::atan2(static_cast<double>(ky), static_cast<double>(kx));
        if (o >= kPi / 2.0) o -= kPi;
        if (o < -kPi / 2.0) o += kPi;
        if (std::fabs(std::fabs(o) - phi) > 0.1) continue;
        double s = 0.0;
        for (std::size_t p = 0; p < bank.planes(); ++p) {
          const double w = bank.plane(p)[a * n + b];
          s += w * w;
        }
        worst = std::max(worst, std::fabs(s - 1.0));
      }
    CHECK(worst <= 1e-10);
  }

  SUBCASE("tight pair survives the adaptation") {
    const Image u = random_image(64, 77);
    const Image back = synthesis(analysis(u, bank), bank);
    CHECK(rel_diff(back.v, u.v) <= 1e-10);
  }

  SUBCASE("nearly full view leaves the invisible family nearly empty") {
    WindowSpec wide;
    wide.scales = 3;
    wide.wedge_half_angle = 89.9 * kPi / 180.0;
    const WindowBank wb = build_wedge_adapted_bank(64, wide);
    std::size_t n_vis = 0, n_inv = 0;
    double inv_mass = 0.0, vis_mass = 0.0;
    for (std::size_t p = 0; p < wb.planes(); ++p) {
      double mass = 0.0;
      for (std::size_t i = 0; i < wb.plane_size(); ++i)
        mass += wb.plane(p)[i] * wb.plane(p)[i];
      if (wb.entries[p].label == WindowLabel::invisible) {
        ++n_inv;
        inv_mass += mass;
      } else if (wb.entries[p].label == WindowLabel::visible) {
        ++n_vis;
        vis_mass += mass;
      }
    }
    CHECK(n_vis > 3 * n_inv);
    CHECK(inv_mass <= 0.02 * vis_mass);
    CHECK(partition_worst(wb) <= 1e-10);
  }

  SUBCASE("invalid half angles raise") {
    WindowSpec bad;
    bad.scales = 3;
    bad.wedge_half_angle = 0.0;
    CHECK_THROWS_AS((void)build_wedge_adapted_bank(64, bad), std::invalid_argument);
    bad.wedge_half_angle = kPi / 2.0;
    CHECK_THROWS_AS((void)build_wedge_adapted_bank(64, bad), std::invalid_argument);
  }
}
