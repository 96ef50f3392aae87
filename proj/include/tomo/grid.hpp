#pragma once

#include <complex>
#include <vector>

// Square rasters on the unit square [-0.5, 0.5]^2 and the discrete Fourier
// transform all other modules build on.
//
// Conventions fixed here once for the whole toolkit:
//  * pixel (row i, col j) of an n x n image has physical center
//      x = -0.5 + (j + 0.5)/n,   y = 0.5 - (i + 0.5)/n
//    (row 0 is the top of the image),
//  * fft2/ifft2 are unitary (1/n scaling in each direction), so Parseval
//    holds without constants and the continuous 2*pi factors are absorbed,
//  * Spectrum index k along either axis carries integer wavenumber
//    wrap(k) = k for k < n/2 and k - n for k >= n/2; the physical angular
//    frequency is 2*pi*wrap(k) (unit-length domain).

namespace tomo {

struct Image {
  int n = 0;
  std::vector<double> v;  // row-major n*n

  Image() = default;
  explicit Image(int n_) : n(n_), v(static_cast<std::size_t>(n_) * n_, 0.0) {}

  double& at(int i, int j) { return v[static_cast<std::size_t>(i) * n + j]; }
  double at(int i, int j) const { return v[static_cast<std::size_t>(i) * n + j]; }
  std::size_t size() const { return v.size(); }
};

struct Spectrum {
  int n = 0;
  std::vector<std::complex<double>> v;  // row-major n*n

  Spectrum() = default;
  explicit Spectrum(int n_) : n(n_), v(static_cast<std::size_t>(n_) * n_) {}

  std::complex<double>& at(int i, int j) {
    return v[static_cast<std::size_t>(i) * n + j];
  }
  std::complex<double> at(int i, int j) const {
    return v[static_cast<std::size_t>(i) * n + j];
  }
};

// Integer wavenumber of grid index k (centered-wraparound layout).
inline int freq_wrap(int k, int n) { return k < n / 2 ? k : k - n; }

Spectrum fft2(const Image& img);

// Inverse transform; the (tiny) imaginary residue of a Hermitian spectrum is
// discarded and its maximum magnitude reported through max_imag when given.
// Throws std::runtime_error if the residue exceeds 1e-6 * ||spec||, which
// signals a non-Hermitian spectrum bug upstream.
Image ifft2(const Spectrum& spec, double* max_imag = nullptr);

// Low-level FFT backend (unnormalized, FFTW semantics). Exposed for the
// frame transforms, which run on real data and use the half-spectrum
// layout: rows * (n/2 + 1) complex values.
namespace fft {
void forward_c2c(int n, const std::complex<double>* in, std::complex<double>* out);
void inverse_c2c(int n, const std::complex<double>* in, std::complex<double>* out);
void forward_r2c(int n, const double* in, std::complex<double>* out);
void inverse_c2r(int n, const std::complex<double>* in, double* out);
// 1-D transforms used by the FBP filter and the Fourier-slice check.
void forward_c2c_1d(int m, const std::complex<double>* in, std::complex<double>* out);
void inverse_c2c_1d(int m, const std::complex<double>* in, std::complex<double>* out);
}  // namespace fft

}  // namespace tomo
