#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "tomo/grid.hpp"
#include "tomo/radon.hpp"

// Ellipse phantoms with closed-form sinograms, and the Beer-Lambert Poisson
// photon-noise model used to perturb simulated data.

namespace tomo {

struct Ellipse {
  double cx = 0, cy = 0;      // center in [-0.5, 0.5]^2
  double a = 0, b = 0;        // semi-axes
  double angle_rad = 0;       // rotation
  double intensity = 0;       // additive
};

struct EllipsePhantom {
  std::vector<Ellipse> ellipses;
};

// Thorax-style preset standing in for an anthropomorphic phantom: body
// ellipse, two lungs of negative intensity, a spine disk with fine holes at
// the bottom, and rib shells realized as paired +- intensity ellipses.
// Intensity sums stay inside [0,1] everywhere, so the rasterizer clamp is
// inactive and the analytic sinogram matches the raster.
EllipsePhantom thorax_phantom();

// Text format: one ellipse per line "cx cy a b angle_deg intensity";
// '#' starts a comment.
EllipsePhantom load_phantom(const std::filesystem::path& path);
void save_phantom(const std::filesystem::path& path, const EllipsePhantom& phantom);

// Sum of intensities at each pixel center, clamped to [0,1]; boundary pixels
// are 2x2 supersampled to reduce aliasing.
Image rasterize(const EllipsePhantom& phantom, int n);

// Exact line integrals (chord lengths times intensities), no discretization.
Sinogram analytic_sinogram(const EllipsePhantom& phantom, const Geometry& geo);

struct NoiseConfig {
  double photons = 1e4;            // incident photons per detector bin
  double attenuation_scale = 0.0;  // 0 = auto: max optical depth ~ 4
  std::uint64_t seed = 0;
};

struct NoiseResult {
  Sinogram sino;
  std::int64_t clamp_count = 0;  // zero-count bins clamped to half a count
  double scale_used = 0.0;
};

// Beer-Lambert model: counts ~ Poisson(N0 * exp(-scale*v)) drawn with a
// per-bin counter-seeded generator (bin (a,k) depends only on seed, a, k),
// then v_noisy = -log(max(counts, 0.5)/N0)/scale. Masked-out rows stay zero.
NoiseResult apply_poisson_noise(const Sinogram& sino, const NoiseConfig& cfg);

}  // namespace tomo
