#include "tomo/frames.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "tomo/io.hpp"
#include "tomo/kernels.hpp"

namespace tomo {
namespace {

constexpr double kPi = std::numbers::pi;

double nu_smooth(double x) {
  auto s = [](double t) {
    const double a = 1.0 + t;
    const double b = 1.0 - t;
    return std::exp(-1.0 / (a * a) - 1.0 / (b * b));
  };
  const double num = s(x - 1.0);
  const double den = num + s(x);
  return num / den;
}

// Angular window profile on the pi-periodic orientation circle: rises across
// the crossover at lo_c (half-width lo_h), plateaus, falls across hi_c. The
// rise of one window and the fall of its neighbour share the crossover and
// use complementary sin/cos branches, so squares tile exactly.
struct AngProfile {
  double lo_c, lo_h, hi_c, hi_h;

  double operator()(double o, NuKind nu) const {
    const double start = lo_c - lo_h;
    double len = (hi_c + hi_h) - start;
    if (len <= 0.0) len += kPi;  // window wraps around the orientation circle
    double u = std::fmod(o - start, kPi);
    if (u < 0.0) u += kPi;
    if (u >= len) return 0.0;
    if (u < 2.0 * lo_h) return std::sin(0.5 * kPi * nu_eval(u / (2.0 * lo_h), nu));
    const double fall_start = len - 2.0 * hi_h;
    if (u > fall_start)
      return std::cos(0.5 * kPi * nu_eval((u - fall_start) / (2.0 * hi_h), nu));
    return 1.0;
  }
};

struct RingTiling {
  std::vector<AngProfile> profiles;
  std::vector<WindowLabel> labels;
  std::vector<int> wedge_index;
};

RingTiling standard_ring(int n_half) {
  RingTiling ring;
  const double delta = kPi / n_half;
  const double h = delta / 6.0;
  std::vector<double> xs(n_half);
  for (int i = 0; i < n_half; ++i) xs[i] = (i + 0.5) * delta - kPi / 2.0;
  for (int i = 0; i < n_half; ++i) {
    const double lo = xs[(i + n_half - 1) % n_half];
    const double hi = xs[i];
    ring.profiles.push_back({lo, h, hi, h});
    ring.labels.push_back(WindowLabel::standard);
    ring.wedge_index.push_back(i);
  }
  return ring;
}

RingTiling adapted_ring(int n_wedges, double phi) {
  const int n_half = n_wedges / 2;
  if (n_wedges < 4)
    throw std::invalid_argument("wedge-adapted bank: needs at least 4 wedges per scale");
  // Boundary transition sits just outside the visible wedge: the invisible
  // neighbour rises from exactly +-phi, so none of its squared mass lies in
  // the visible set.
  const double h_b =
      std::min({kPi / (2.0 * n_wedges), (kPi - 2.0 * phi) / 4.0, phi / 2.0});
  const double bound = phi + h_b;
  int n_vis = static_cast<int>(std::lround(n_half * (2.0 * phi) / kPi));
  n_vis = std::clamp(n_vis, 1, n_half - 1);
  const int n_inv = n_half - n_vis;

  struct Crossover {
    double x, h;
  };
  std::vector<Crossover> xs;
  xs.push_back({-bound, h_b});
  const double dv = 2.0 * bound / n_vis;
  for (int m = 1; m < n_vis; ++m) xs.push_back({-bound + m * dv, dv / 6.0});
  xs.push_back({bound, h_b});
  const double di = (kPi - 2.0 * bound) / n_inv;
  for (int m = 1; m < n_inv; ++m) xs.push_back({bound + m * di, di / 6.0});

  for (std::size_t i = 0; i < xs.size(); ++i) {
    const Crossover& cur = xs[i];
    const bool wrap = i + 1 == xs.size();
    const Crossover& nxt = xs[wrap ? 0 : i + 1];
    const double gap = (wrap ? nxt.x + kPi : nxt.x) - cur.x;
    if (gap < cur.h + nxt.h)
      throw std::invalid_argument(
          "wedge-adapted bank: wedge count too small to align edges with the "
          "visible boundary");
  }

  RingTiling ring;
  const int total = static_cast<int>(xs.size());
  for (int i = 0; i + 1 <= total; ++i) {
    const Crossover lo = xs[i];
    const Crossover hi = xs[(i + 1) % total];
    ring.profiles.push_back({lo.x, lo.h, hi.x, hi.h});
    const bool visible = i < n_vis;  // windows 0..n_vis-1 lie between -bound..bound
    ring.labels.push_back(visible ? WindowLabel::visible : WindowLabel::invisible);
    ring.wedge_index.push_back(visible ? i : i - n_vis);
  }
  return ring;
}

WindowBank build_bank(int n, const WindowSpec& spec, bool adapted) {
  if (n < 16) throw std::invalid_argument("window bank: grid size must be >= 16");
  const int scales = spec.resolved_scales(n);
  const std::vector<int> wedges = spec.resolved_wedges(n);
  if (n < (1 << (scales + 1)))
    throw std::invalid_argument("window bank: too many scales for this grid size "
                                "(coarsest ring falls below the frequency grid)");
  double phi = 0.0;
  if (adapted) {
    if (!spec.wedge_half_angle)
      throw std::invalid_argument("wedge-adapted bank: wedge_half_angle required");
    phi = *spec.wedge_half_angle;
    if (!(phi > 0.0 && phi < kPi / 2.0))
      throw std::invalid_argument("wedge-adapted bank: half angle must be in (0, pi/2)");
  }

  const std::size_t npix = static_cast<std::size_t>(n) * n;
  const double r_nyquist = kPi * n;

  // Per-gridpoint radius and orientation. The orientation is computed from a
  // canonical antipodal representative so that the sampled windows are even
  // on the grid bit for bit (real filters).
  std::vector<double> rad(npix), orient(npix);
  for (int a = 0; a < n; ++a) {
    const int ky = -freq_wrap(a, n);
    for (int b = 0; b < n; ++b) {
      const int kx = freq_wrap(b, n);
      int cx = kx, cy = ky;
      if (cy < 0 || (cy == 0 && cx < 0)) {
        cx = -cx;
        cy = -cy;
      }
      const std::size_t idx = static_cast<std::size_t>(a) * n + b;
      rad[idx] = 2.0 * kPi * std::hypot(static_cast<double>(kx), static_cast<double>(ky));
      double o = std::atan2(static_cast<double>(cy), static_cast<double>(cx));
      if (o >= kPi / 2.0) o -= kPi;
      orient[idx] = o;
    }
  }

  WindowBank bank;
  bank.n = n;
  bank.spec = spec;

  std::vector<double> sumsq(npix, 0.0);
  std::vector<double> radial(npix);
  for (int j = 0; j < scales; ++j) {
    const double sigma = (5.0 / 3.0) * std::pow(2.0, scales - 1 - j) / r_nyquist;
    bool ring_nonempty = false;
    for (std::size_t i = 0; i < npix; ++i) {
      radial[i] = meyer_radial(sigma * rad[i], spec.nu);
      ring_nonempty |= radial[i] != 0.0;
    }
    if (!ring_nonempty)
      throw std::invalid_argument("window bank: empty ring at scale " + std::to_string(j));

    RingTiling ring = adapted ? adapted_ring(wedges[j], phi) : standard_ring(wedges[j] / 2);
    for (std::size_t w = 0; w < ring.profiles.size(); ++w) {
      bank.entries.push_back({j, ring.wedge_index[w], ring.labels[w]});
      const std::size_t base = bank.win.size();
      bank.win.resize(base + npix);
      double* plane = &bank.win[base];
      const AngProfile& prof = ring.profiles[w];
      for (std::size_t i = 0; i < npix; ++i) {
        if (radial[i] == 0.0) {
          plane[i] = 0.0;
          continue;
        }
        const double val = radial[i] * prof(orient[i], spec.nu);
        plane[i] = val;
        sumsq[i] += val * val;
      }
    }
  }

  // Completion windows make the squared partition exact on the finite grid.
  const double r_split = std::sqrt((r_nyquist / std::pow(2.0, scales)) * 0.8 * r_nyquist);
  for (int pass = 0; pass < 2; ++pass) {
    const bool low = pass == 0;
    bank.entries.push_back({-1, -1, low ? WindowLabel::lowpass : WindowLabel::highpass});
    const std::size_t base = bank.win.size();
    bank.win.resize(base + npix);
    double* plane = &bank.win[base];
    for (std::size_t i = 0; i < npix; ++i) {
      const bool in_side = low ? rad[i] < r_split : rad[i] >= r_split;
      plane[i] = in_side ? std::sqrt(std::max(0.0, 1.0 - sumsq[i])) : 0.0;
    }
  }

  // Half-spectrum copies for the r2c fast path.
  const int hc = n / 2 + 1;
  bank.win_half.resize(bank.planes() * bank.half_size());
  for (std::size_t p = 0; p < bank.planes(); ++p) {
    const double* full = bank.plane(p);
    double* half = &bank.win_half[p * bank.half_size()];
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < hc; ++b)
        half[static_cast<std::size_t>(a) * hc + b] = full[static_cast<std::size_t>(a) * n + b];
  }
  return bank;
}

}  // namespace

int WindowSpec::resolved_scales(int n) const {
  if (scales > 0) return scales;
  int lg = 0;
  while ((1 << (lg + 1)) <= n) ++lg;
  return std::clamp(lg - 4, 2, 6);
}

std::vector<int> WindowSpec::resolved_wedges(int n) const {
  const int j_count = resolved_scales(n);
  std::vector<int> out;
  if (!wedges_per_scale.empty()) {
    if (static_cast<int>(wedges_per_scale.size()) != j_count)
      throw std::invalid_argument("window spec: wedges_per_scale length != scales");
    out = wedges_per_scale;
  } else {
    for (int j = 0; j < j_count; ++j)
      out.push_back(8 * (1 << ((j + 1) / 2)));
  }
  for (int w : out)
    if (w < 4 || w % 2 != 0)
      throw std::invalid_argument("window spec: wedge counts must be even and >= 4");
  return out;
}

const char* to_string(WindowLabel label) {
  switch (label) {
    case WindowLabel::standard: return "standard";
    case WindowLabel::visible: return "visible";
    case WindowLabel::invisible: return "invisible";
    case WindowLabel::lowpass: return "lowpass";
    case WindowLabel::highpass: return "highpass";
  }
  return "?";
}

double nu_eval(double x, NuKind kind) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  switch (kind) {
    case NuKind::poly3: return x * x * (3.0 - 2.0 * x);
    case NuKind::poly5: return x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
    case NuKind::poly7:
      return x * x * x * x * (35.0 + x * (-84.0 + x * (70.0 - 20.0 * x)));
    case NuKind::smooth: return nu_smooth(x);
  }
  return 0.0;
}

double meyer_radial(double r, NuKind kind) {
  if (r < 2.0 / 3.0 || r > 5.0 / 3.0) return 0.0;
  if (r <= 5.0 / 6.0) return std::cos(0.5 * kPi * nu_eval(5.0 - 6.0 * r, kind));
  if (r < 4.0 / 3.0) return 1.0;
  return std::cos(0.5 * kPi * nu_eval(3.0 * r - 4.0, kind));
}

double meyer_angular(double phi, NuKind kind) {
  const double a = std::fabs(phi);
  if (a <= 1.0 / 3.0) return 1.0;
  if (a >= 2.0 / 3.0) return 0.0;
  return std::cos(0.5 * kPi * nu_eval(3.0 * a - 1.0, kind));
}

WindowBank build_window_bank(int n, const WindowSpec& spec) {
  if (spec.wedge_half_angle)
    throw std::invalid_argument("build_window_bank: spec carries a wedge angle; "
                                "use build_wedge_adapted_bank");
  return build_bank(n, spec, false);
}

WindowBank build_wedge_adapted_bank(int n, const WindowSpec& spec) {
  return build_bank(n, spec, true);
}

void analysis_into(const double* img, const WindowBank& bank, double* coeffs) {
  const int n = bank.n;
  const std::size_t hs = bank.half_size();
  const std::size_t ps = bank.plane_size();
  std::vector<std::complex<double>> spec(hs), tmp(hs);
  fft::forward_r2c(n, img, spec.data());
  const double inv = 1.0 / (static_cast<double>(n) * n);
  const auto& K = kernels::active();
  for (std::size_t p = 0; p < bank.planes(); ++p) {
    tmp = spec;
    K.cmul_real(hs, &bank.win_half[p * hs], reinterpret_cast<double*>(tmp.data()));
    fft::inverse_c2r(n, tmp.data(), coeffs + p * ps);
    K.scale(ps, inv, coeffs + p * ps);
  }
}

void synthesis_into(const double* coeffs, const WindowBank& bank, double* img) {
  const int n = bank.n;
  const std::size_t hs = bank.half_size();
  const std::size_t ps = bank.plane_size();
  std::vector<std::complex<double>> acc(hs, {0.0, 0.0}), tmp(hs);
  const auto& K = kernels::active();
  for (std::size_t p = 0; p < bank.planes(); ++p) {
    fft::forward_r2c(n, coeffs + p * ps, tmp.data());
    K.cmul_real(hs, &bank.win_half[p * hs], reinterpret_cast<double*>(tmp.data()));
    K.axpy(2 * hs, 1.0, reinterpret_cast<const double*>(tmp.data()),
           reinterpret_cast<double*>(acc.data()));
  }
  fft::inverse_c2r(n, acc.data(), img);
  K.scale(ps, 1.0 / (static_cast<double>(n) * n), img);
}

FrameCoeffs analysis(const Image& img, const WindowBank& bank) {
  if (img.n != bank.n) throw std::invalid_argument("analysis: size mismatch");
  FrameCoeffs out(bank.n, bank.planes());
  analysis_into(img.v.data(), bank, out.v.data());
  return out;
}

Image synthesis(const FrameCoeffs& coeffs, const WindowBank& bank) {
  if (coeffs.n != bank.n || coeffs.n_planes != bank.planes())
    throw std::invalid_argument("synthesis: shape mismatch");
  Image out(bank.n);
  synthesis_into(coeffs.v.data(), bank, out.v.data());
  return out;
}

FrameCoeffs analysis_reference(const Image& img, const WindowBank& bank) {
  if (img.n != bank.n) throw std::invalid_argument("analysis: size mismatch");
  const Spectrum spec = fft2(img);
  FrameCoeffs out(bank.n, bank.planes());
  for (std::size_t p = 0; p < bank.planes(); ++p) {
    Spectrum s(bank.n);
    const double* w = bank.plane(p);
    for (std::size_t i = 0; i < s.v.size(); ++i) s.v[i] = spec.v[i] * w[i];
    Image plane = ifft2(s);
    std::copy(plane.v.begin(), plane.v.end(), out.plane(p));
  }
  return out;
}

Image synthesis_reference(const FrameCoeffs& coeffs, const WindowBank& bank) {
  if (coeffs.n != bank.n || coeffs.n_planes != bank.planes())
    throw std::invalid_argument("synthesis: shape mismatch");
  Spectrum acc(bank.n);
  for (std::size_t p = 0; p < bank.planes(); ++p) {
    Image plane(bank.n);
    std::copy(coeffs.plane(p), coeffs.plane(p) + bank.plane_size(), plane.v.begin());
    const Spectrum s = fft2(plane);
    const double* w = bank.plane(p);
    for (std::size_t i = 0; i < acc.v.size(); ++i) acc.v[i] += s.v[i] * w[i];
  }
  return ifft2(acc);
}

void export_window_bank(const WindowBank& bank, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream manifest(dir / "manifest.txt");
  if (!manifest)
    throw std::runtime_error("export_window_bank: cannot open manifest in " + dir.string());
  for (std::size_t p = 0; p < bank.planes(); ++p) {
    const auto& e = bank.entries[p];
    std::string name = "win_" + std::to_string(p) + "_s" + std::to_string(e.scale) +
                       "_w" + std::to_string(e.wedge) + "_" + to_string(e.label) + ".grd";
    write_grd(dir / name, static_cast<std::uint32_t>(bank.n),
              static_cast<std::uint32_t>(bank.n), bank.plane(p));
    manifest << e.scale << " " << e.wedge << " " << to_string(e.label) << " " << name
             << "\n";
  }
}

}  // namespace tomo
