#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tomo/grid.hpp"

// Translation-invariant curvelet frame built from Meyer windows in the
// frequency plane, plus the wedge-adapted variant whose angular tiling is
// aligned with the visible wedge of a limited-view scan.
//
// Construction notes (fixed here, shared by all banks):
//  * Windows are stored unsquared, i.e. each window is W(scaled r) * V(angle),
//    so the squares tile: sum over all windows of window^2 == 1 at every grid
//    frequency. This is what makes the frame tight with constant one.
//  * Filters must be real in image space, so each directional window covers a
//    wedge together with its antipode; a ring with N_j configured wedges
//    therefore stores N_j/2 orientation windows (N_j must be even).
//  * Scale rings are dyadic; the finest ring's support ends at the Nyquist
//    radius pi*n. A DC lowpass and a Nyquist-corner highpass complete the
//    partition exactly: completion = sqrt(max(0, 1 - sum of ring squares)).
//  * No per-window amplitude factors: any such factor would break the
//    unit tightness of the translation-invariant system.

namespace tomo {

enum class NuKind {
  smooth,  // exp-based transition (default)
  poly3,   // 3x^2 - 2x^3
  poly5,   // 5x^3*... see nu_eval
  poly7,   // x^4 (35 - 84x + 70x^2 - 20x^3)
};

struct WindowSpec {
  NuKind nu = NuKind::smooth;
  int scales = 0;                        // 0 = auto from grid size
  std::vector<int> wedges_per_scale;     // empty = default 8 * 2^ceil(j/2)
  std::optional<double> wedge_half_angle;  // radians, for the adapted bank

  int resolved_scales(int n) const;
  std::vector<int> resolved_wedges(int n) const;
};

enum class WindowLabel { standard, visible, invisible, lowpass, highpass };

const char* to_string(WindowLabel label);

struct WindowBank {
  int n = 0;
  WindowSpec spec;
  struct Entry {
    int scale;   // -1 for lowpass/highpass
    int wedge;   // orientation index within the scale, -1 for lowpass/highpass
    WindowLabel label;
  };
  std::vector<Entry> entries;
  std::vector<double> win;       // entries * n*n, frequency domain, nonnegative
  std::vector<double> win_half;  // entries * n*(n/2+1): r2c layout fast path

  std::size_t planes() const { return entries.size(); }
  std::size_t plane_size() const { return static_cast<std::size_t>(n) * n; }
  const double* plane(std::size_t p) const { return &win[p * plane_size()]; }
  std::size_t half_size() const { return static_cast<std::size_t>(n) * (n / 2 + 1); }
};

struct FrameCoeffs {
  int n = 0;
  std::size_t n_planes = 0;
  std::vector<double> v;  // planes * n*n, contiguous

  FrameCoeffs() = default;
  FrameCoeffs(int n_, std::size_t planes)
      : n(n_), n_planes(planes), v(planes * static_cast<std::size_t>(n_) * n_, 0.0) {}

  double* plane(std::size_t p) { return &v[p * static_cast<std::size_t>(n) * n]; }
  const double* plane(std::size_t p) const {
    return &v[p * static_cast<std::size_t>(n) * n];
  }
};

// Auxiliary transition function: 0 for x <= 0, 1 for x >= 1,
// nu(x) + nu(1-x) = 1.
double nu_eval(double x, NuKind kind);
// Radial Meyer window, supported on [2/3, 5/3] with plateau [5/6, 4/3].
double meyer_radial(double r, NuKind kind);
// Angular Meyer window, 1 on |phi| <= 1/3, supported on |phi| < 2/3.
double meyer_angular(double phi, NuKind kind);

WindowBank build_window_bank(int n, const WindowSpec& spec);
// Same, with angular tiling split into visible/invisible families whose
// supports meet at the visible-wedge boundary. spec.wedge_half_angle required.
WindowBank build_wedge_adapted_bank(int n, const WindowSpec& spec);

FrameCoeffs analysis(const Image& img, const WindowBank& bank);
Image synthesis(const FrameCoeffs& coeffs, const WindowBank& bank);

// Allocation-light variants on presized flat buffers (img: n*n, coeffs:
// planes*n*n) for the solver inner loops.
void analysis_into(const double* img, const WindowBank& bank, double* coeffs);
void synthesis_into(const double* coeffs, const WindowBank& bank, double* img);

// Reference implementations through the public fft2/ifft2 path; used by the
// equivalence tests against the half-spectrum fast path above.
FrameCoeffs analysis_reference(const Image& img, const WindowBank& bank);
Image synthesis_reference(const FrameCoeffs& coeffs, const WindowBank& bank);

// Writes one GRD1 raster per window plus a manifest.txt (scale wedge label
// filename per line) for inspection and plotting.
void export_window_bank(const WindowBank& bank, const std::filesystem::path& dir);

}  // namespace tomo
