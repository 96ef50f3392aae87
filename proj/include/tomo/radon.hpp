#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "tomo/grid.hpp"

// Discrete parallel-beam Radon transform on the unit square, its exact
// adjoint, and filtered backprojection.
//
// Discretization: ray-driven with equispaced samples at step 1/n along each
// line and bilinear interpolation of the image; samples outside the unit
// square contribute zero; sinogram entries carry the step length, so they
// approximate the line integrals. The backprojector is the literal transpose
// (same samples, same weights), which the solvers rely on.

namespace tomo {

struct Geometry {
  std::vector<double> angles;  // radians, strictly increasing in [-pi/2, pi/2)
  int n_bins = 0;              // detector bins spanning [-sqrt(2)/2, sqrt(2)/2]

  int n_angles() const { return static_cast<int>(angles.size()); }
  double bin_step() const;
  double bin_pos(int k) const;  // offset s_k of bin k
  void validate() const;        // throws std::invalid_argument on bad geometry
};

// Measured angles over [-half_deg, half_deg - step_deg] in step_deg steps;
// the paper-replication default is half_deg=65, step_deg=1 (130 views).
Geometry make_limited_geometry(int n, double half_deg = 65.0, double step_deg = 1.0,
                               int n_bins = 0);
// views angles covering a half turn; 0 bins means the default ceil(sqrt(2)n)+1.
Geometry make_half_turn_geometry(int n, int views, int n_bins = 0);

struct Sinogram {
  Geometry geo;
  std::vector<std::uint8_t> mask;  // per angle; 1 = measured
  std::vector<double> v;           // n_angles x n_bins, row-major

  Sinogram() = default;
  explicit Sinogram(const Geometry& g)
      : geo(g),
        mask(g.angles.size(), 1),
        v(g.angles.size() * static_cast<std::size_t>(g.n_bins), 0.0) {}

  double& at(int a, int k) { return v[static_cast<std::size_t>(a) * geo.n_bins + k]; }
  double at(int a, int k) const {
    return v[static_cast<std::size_t>(a) * geo.n_bins + k];
  }
  int n_measured() const;
};

// Boolean masks over Geometry.angles realizing an angular range.
namespace angular_range {
std::vector<std::uint8_t> full(const Geometry& geo);
std::vector<std::uint8_t> interval(const Geometry& geo, double lo_rad, double hi_rad);
std::vector<std::uint8_t> subset(const Geometry& geo, const std::vector<int>& idx);
}  // namespace angular_range

Sinogram radon_forward(const Image& img, const Geometry& geo);
// Forward transform followed by zeroing of masked-out rows.
Sinogram radon_limited(const Image& img, const Geometry& geo,
                       const std::vector<std::uint8_t>& mask);
// Discrete adjoint; masked-out rows contribute nothing.
Image radon_adjoint(const Sinogram& sino, int n);

// Allocation-free variants for the solver inner loops. mask may be null
// (all angles measured); buffers must be presized (n_angles*n_bins / n*n).
void radon_forward_into(const double* img, int n, const Geometry& geo,
                        const std::vector<std::uint8_t>* mask, double* sino);
void radon_adjoint_into(const double* sino, const Geometry& geo,
                        const std::vector<std::uint8_t>* mask, int n, double* img);

// Scalar reference projector pair, bypassing the SIMD dispatch. The public
// entry points must agree with these (bit for bit for the forward transform);
// the equivalence tests call them directly.
namespace detail {
void radon_forward_scalar(const double* img, int n, const Geometry& geo,
                          const std::vector<std::uint8_t>* mask, double* sino);
void radon_adjoint_scalar(const double* sino, const Geometry& geo,
                          const std::vector<std::uint8_t>* mask, int n, double* img);
}  // namespace detail

// Ram-Lak filtered backprojection (optional cosine apodization, off for all
// replication runs); masked-out angles are skipped.
Image fbp(const Sinogram& sino, int n, bool cosine_apodization = false);

// Max over measured angles of the relative l2 deviation between the 1-D DFT
// of each sinogram row and the image spectrum interpolated along the Fourier
// slice. A test oracle, not used in reconstruction.
double fourier_slice_check(const Image& img, const Geometry& geo);

// Sinogram files: GRD1 raster (n_angles x n_bins) plus a text sidecar
// "<base>.angles" with one angle per line in degrees, '#'-prefixed when the
// angle is masked out.
void write_sinogram(const std::filesystem::path& base, const Sinogram& sino);
Sinogram read_sinogram(const std::filesystem::path& base);

}  // namespace tomo
