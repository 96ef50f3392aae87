#include "tomo/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <stdexcept>

namespace tomo {
namespace {

// FFTW plans are cached per (size, kind) with plan-owned buffers. Planning is
// not thread-safe, so creation and execution are serialized; all transforms
// use FFTW_ESTIMATE so the chosen algorithm (and hence rounding) is stable
// across runs.
struct PlanSlot {
  fftw_plan plan = nullptr;
  void* in = nullptr;
  void* out = nullptr;
};

std::mutex g_fft_mutex;

enum class Kind { c2c_fwd, c2c_inv, r2c, c2r, c2c_fwd_1d, c2c_inv_1d };

PlanSlot& slot_for(int n, Kind kind) {
  static std::map<std::pair<int, int>, PlanSlot> cache;
  auto key = std::make_pair(n, static_cast<int>(kind));
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  PlanSlot s;
  switch (kind) {
    case Kind::c2c_fwd:
    case Kind::c2c_inv: {
      auto* in = fftw_alloc_complex(static_cast<std::size_t>(n) * n);
      auto* out = fftw_alloc_complex(static_cast<std::size_t>(n) * n);
      s.in = in;
      s.out = out;
      s.plan = fftw_plan_dft_2d(n, n, in, out,
                                kind == Kind::c2c_fwd ? FFTW_FORWARD : FFTW_BACKWARD,
                                FFTW_ESTIMATE);
      break;
    }
    case Kind::r2c: {
      auto* in = fftw_alloc_real(static_cast<std::size_t>(n) * n);
      auto* out = fftw_alloc_complex(static_cast<std::size_t>(n) * (n / 2 + 1));
      s.in = in;
      s.out = out;
      s.plan = fftw_plan_dft_r2c_2d(n, n, in, out, FFTW_ESTIMATE);
      break;
    }
    case Kind::c2r: {
      auto* in = fftw_alloc_complex(static_cast<std::size_t>(n) * (n / 2 + 1));
      auto* out = fftw_alloc_real(static_cast<std::size_t>(n) * n);
      s.in = in;
      s.out = out;
      s.plan = fftw_plan_dft_c2r_2d(n, n, in, out, FFTW_ESTIMATE);
      break;
    }
    case Kind::c2c_fwd_1d:
    case Kind::c2c_inv_1d: {
      auto* in = fftw_alloc_complex(n);
      auto* out = fftw_alloc_complex(n);
      s.in = in;
      s.out = out;
      s.plan = fftw_plan_dft_1d(n, in, out,
                                kind == Kind::c2c_fwd_1d ? FFTW_FORWARD : FFTW_BACKWARD,
                                FFTW_ESTIMATE);
      break;
    }
  }
  return cache.emplace(key, s).first->second;
}

void run_c2c(int n, Kind kind, const std::complex<double>* in,
             std::complex<double>* out, std::size_t count) {
  std::lock_guard<std::mutex> lock(g_fft_mutex);
  PlanSlot& s = slot_for(n, kind);
  std::memcpy(s.in, in, count * sizeof(std::complex<double>));
  fftw_execute(s.plan);
  std::memcpy(out, s.out, count * sizeof(std::complex<double>));
}

}  // namespace

namespace fft {

void forward_c2c(int n, const std::complex<double>* in, std::complex<double>* out) {
  run_c2c(n, Kind::c2c_fwd, in, out, static_cast<std::size_t>(n) * n);
}

void inverse_c2c(int n, const std::complex<double>* in, std::complex<double>* out) {
  run_c2c(n, Kind::c2c_inv, in, out, static_cast<std::size_t>(n) * n);
}

void forward_r2c(int n, const double* in, std::complex<double>* out) {
  std::lock_guard<std::mutex> lock(g_fft_mutex);
  PlanSlot& s = slot_for(n, Kind::r2c);
  std::memcpy(s.in, in, static_cast<std::size_t>(n) * n * sizeof(double));
  fftw_execute(s.plan);
  std::memcpy(out, s.out,
              static_cast<std::size_t>(n) * (n / 2 + 1) * sizeof(std::complex<double>));
}

void inverse_c2r(int n, const std::complex<double>* in, double* out) {
  std::lock_guard<std::mutex> lock(g_fft_mutex);
  PlanSlot& s = slot_for(n, Kind::c2r);
  std::memcpy(s.in, in,
              static_cast<std::size_t>(n) * (n / 2 + 1) * sizeof(std::complex<double>));
  fftw_execute(s.plan);
  std::memcpy(out, s.out, static_cast<std::size_t>(n) * n * sizeof(double));
}

void forward_c2c_1d(int m, const std::complex<double>* in, std::complex<double>* out) {
  run_c2c(m, Kind::c2c_fwd_1d, in, out, static_cast<std::size_t>(m));
}

void inverse_c2c_1d(int m, const std::complex<double>* in, std::complex<double>* out) {
  run_c2c(m, Kind::c2c_inv_1d, in, out, static_cast<std::size_t>(m));
}

}  // namespace fft

Spectrum fft2(const Image& img) {
  if (img.n < 2) throw std::invalid_argument("fft2: image size must be >= 2");
  Spectrum spec(img.n);
  std::vector<std::complex<double>> tmp(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) tmp[i] = img.v[i];
  fft::forward_c2c(img.n, tmp.data(), spec.v.data());
  const double scale = 1.0 / img.n;
  for (auto& z : spec.v) z *= scale;
  return spec;
}

Image ifft2(const Spectrum& spec, double* max_imag) {
  if (spec.n < 2) throw std::invalid_argument("ifft2: spectrum size must be >= 2");
  std::vector<std::complex<double>> tmp(spec.v.size());
  fft::inverse_c2c(spec.n, spec.v.data(), tmp.data());
  const double scale = 1.0 / spec.n;
  double spec_norm = 0.0;
  for (const auto& z : spec.v) spec_norm += std::norm(z);
  spec_norm = std::sqrt(spec_norm);

  Image img(spec.n);
  double worst = 0.0;
  for (std::size_t i = 0; i < tmp.size(); ++i) {
    img.v[i] = tmp[i].real() * scale;
    worst = std::max(worst, std::fabs(tmp[i].imag() * scale));
  }
  if (max_imag) *max_imag = worst;
  if (worst > 1e-6 * spec_norm && worst > 0.0)
    throw std::runtime_error("ifft2: non-Hermitian spectrum (imaginary residue " +
                             std::to_string(worst) + ")");
  return img;
}

}  // namespace tomo
