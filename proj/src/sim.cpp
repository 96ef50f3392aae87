#include "tomo/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace tomo {
namespace {

double sq(double x) { return x * x; }

bool contains(const Ellipse& e, double x, double y) {
  const double c = std::cos(e.angle_rad), s = std::sin(e.angle_rad);
  const double dx = x - e.cx, dy = y - e.cy;
  const double px = c * dx + s * dy;
  const double py = -s * dx + c * dy;
  return sq(px / e.a) + sq(py / e.b) <= 1.0;
}

double intensity_sum(const EllipsePhantom& ph, double x, double y) {
  double v = 0.0;
  for (const auto& e : ph.ellipses)
    if (contains(e, x, y)) v += e.intensity;
  return v;
}

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

EllipsePhantom thorax_phantom() {
  EllipsePhantom ph;
  auto add = [&](double cx, double cy, double a, double b, double deg, double val) {
    ph.ellipses.push_back({cx, cy, a, b, deg * std::numbers::pi / 180.0, val});
  };
  // body
  add(0.00, -0.010, 0.440, 0.320, 0, 0.50);
  // rib cage shell (paired +/- gives a thin high-intensity band)
  add(0.00, -0.010, 0.400, 0.280, 0, 0.22);
  add(0.00, -0.010, 0.378, 0.259, 0, -0.22);
  // lungs
  add(-0.170, 0.030, 0.140, 0.190, 8, -0.30);
  add(0.170, 0.030, 0.140, 0.190, -8, -0.30);
  // spine with fine holes
  add(0.00, -0.220, 0.058, 0.055, 0, 0.45);
  add(-0.020, -0.208, 0.011, 0.011, 0, -0.35);
  add(0.020, -0.208, 0.011, 0.011, 0, -0.35);
  add(0.000, -0.243, 0.013, 0.011, 0, -0.35);
  // small mediastinum detail disks between the lungs
  add(0.000, 0.120, 0.024, 0.024, 0, 0.22);
  add(0.000, 0.020, 0.016, 0.016, 0, 0.22);
  add(0.000, -0.065, 0.011, 0.011, 0, 0.22);
  return ph;
}

EllipsePhantom load_phantom(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("load_phantom: cannot open " + path.string());
  EllipsePhantom ph;
  std::string line;
  while (std::getline(f, line)) {
    const auto pos = line.find_first_not_of(" \t");
    if (pos == std::string::npos || line[pos] == '#') continue;
    std::istringstream ss(line);
    double cx, cy, a, b, deg, val;
    if (!(ss >> cx >> cy >> a >> b >> deg >> val))
      throw std::runtime_error("load_phantom: malformed line: " + line);
    ph.ellipses.push_back({cx, cy, a, b, deg * std::numbers::pi / 180.0, val});
  }
  return ph;
}

void save_phantom(const std::filesystem::path& path, const EllipsePhantom& phantom) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("save_phantom: cannot open " + path.string());
  f.precision(12);
  for (const auto& e : phantom.ellipses)
    f << e.cx << " " << e.cy << " " << e.a << " " << e.b << " "
      << e.angle_rad * 180.0 / std::numbers::pi << " " << e.intensity << "\n";
}

Image rasterize(const EllipsePhantom& phantom, int n) {
  if (n < 16) throw std::invalid_argument("rasterize: n must be >= 16");
  Image img(n);
  const double h = 1.0 / n;
  for (int i = 0; i < n; ++i) {
    const double y = 0.5 - (i + 0.5) * h;
    for (int j = 0; j < n; ++j) {
      const double x = -0.5 + (j + 0.5) * h;
      // 2x2 subsample membership decides whether the pixel straddles an edge.
      const double ox = h / 4.0, oy = h / 4.0;
      double sub[4] = {
          intensity_sum(phantom, x - ox, y - oy),
          intensity_sum(phantom, x + ox, y - oy),
          intensity_sum(phantom, x - ox, y + oy),
          intensity_sum(phantom, x + ox, y + oy),
      };
      double val;
      if (sub[0] == sub[1] && sub[1] == sub[2] && sub[2] == sub[3])
        val = intensity_sum(phantom, x, y);
      else
        val = 0.25 * (sub[0] + sub[1] + sub[2] + sub[3]);
      img.at(i, j) = std::clamp(val, 0.0, 1.0);
    }
  }
  return img;
}

Sinogram analytic_sinogram(const EllipsePhantom& phantom, const Geometry& geo) {
  geo.validate();
  Sinogram out(geo);
  for (int ai = 0; ai < geo.n_angles(); ++ai) {
    const double c = std::cos(geo.angles[ai]);
    const double sn = std::sin(geo.angles[ai]);
    for (int k = 0; k < geo.n_bins; ++k) {
      const double s = geo.bin_pos(k);
      double total = 0.0;
      for (const auto& e : phantom.ellipses) {
        const double ce = std::cos(e.angle_rad), se = std::sin(e.angle_rad);
        // Line point p(t) = s*omega + t*omega_perp in the ellipse frame.
        const double rx = s * c - e.cx, ry = s * sn - e.cy;
        const double p0x = (ce * rx + se * ry) / e.a;
        const double p0y = (-se * rx + ce * ry) / e.b;
        const double dx = (ce * -sn + se * c) / e.a;
        const double dy = (-se * -sn + ce * c) / e.b;
        const double A = dx * dx + dy * dy;
        const double B = 2.0 * (p0x * dx + p0y * dy);
        const double C = p0x * p0x + p0y * p0y - 1.0;
        const double disc = B * B - 4.0 * A * C;
        if (disc > 0.0) total += e.intensity * std::sqrt(disc) / A;
      }
      out.at(ai, k) = total;
    }
  }
  return out;
}

NoiseResult apply_poisson_noise(const Sinogram& sino, const NoiseConfig& cfg) {
  if (cfg.photons < 1.0)
    throw std::invalid_argument("apply_poisson_noise: photons must be >= 1");
  for (double x : sino.v)
    if (!std::isfinite(x))
      throw std::invalid_argument("apply_poisson_noise: nonfinite sinogram");

  double scale = cfg.attenuation_scale;
  if (scale <= 0.0) {
    double vmax = 0.0;
    for (double x : sino.v) vmax = std::max(vmax, x);
    scale = vmax > 0.0 ? 4.0 / vmax : 1.0;
  }

  NoiseResult res;
  res.sino = sino;
  res.scale_used = scale;
  const int nb = sino.geo.n_bins;
  for (int a = 0; a < sino.geo.n_angles(); ++a) {
    if (!sino.mask[a]) continue;
    for (int k = 0; k < nb; ++k) {
      const double p = scale * sino.at(a, k);
      const double lambda = cfg.photons * std::exp(-p);
      // Counter-based seeding: the draw for bin (a,k) depends only on
      // (seed, a, k), so any evaluation order reproduces the same data.
      std::uint64_t key = splitmix64(cfg.seed ^ splitmix64(
          (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(k)));
      std::mt19937_64 gen(key);
      std::poisson_distribution<long long> pois(lambda);
      const long long counts = pois(gen);
      if (counts <= 0) ++res.clamp_count;
      const double c_eff = counts > 0 ? static_cast<double>(counts) : 0.5;
      res.sino.at(a, k) = -std::log(c_eff / cfg.photons) / scale;
    }
  }
  return res;
}

}  // namespace tomo
