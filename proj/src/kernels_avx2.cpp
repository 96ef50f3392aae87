// AVX2 variants of the kernel table. Compiled with -mavx2 only; FMA is
// deliberately not used so elementwise results match the scalar reference
// bit for bit.

#include "tomo/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define TOMO_HAVE_AVX2_BUILD 1
#include <immintrin.h>

#include <cmath>
#endif

namespace tomo::kernels {

#if TOMO_HAVE_AVX2_BUILD
namespace {

void axpy(std::size_t n, double a, const double* x, double* y) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    __m256d vx = _mm256_loadu_pd(x + i);
    vy = _mm256_add_pd(vy, _mm256_mul_pd(va, vx));
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void scale(std::size_t n, double a, double* x) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] *= a;
}

void extrapolate(std::size_t n, const double* x_new, const double* x_old,
                 double* out) {
  const __m256d two = _mm256_set1_pd(2.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vn = _mm256_mul_pd(two, _mm256_loadu_pd(x_new + i));
    _mm256_storeu_pd(out + i, _mm256_sub_pd(vn, _mm256_loadu_pd(x_old + i)));
  }
  for (; i < n; ++i) out[i] = 2.0 * x_new[i] - x_old[i];
}

void soft_threshold(std::size_t n, double t, const double* x, double* out) {
  const __m256d vt = _mm256_set1_pd(t);
  const __m256d signmask = _mm256_set1_pd(-0.0);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vx = _mm256_loadu_pd(x + i);
    __m256d ax = _mm256_andnot_pd(signmask, vx);
    __m256d m = _mm256_max_pd(_mm256_sub_pd(ax, vt), zero);
    __m256d sg = _mm256_and_pd(signmask, vx);
    _mm256_storeu_pd(out + i, _mm256_or_pd(m, sg));
  }
  for (; i < n; ++i) {
    double m = std::fabs(x[i]) - t;
    out[i] = m > 0.0 ? std::copysign(m, x[i]) : 0.0;
  }
}

void clamp_min0(std::size_t n, const double* x, double* out) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_max_pd(_mm256_loadu_pd(x + i), zero));
  for (; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void quad_dual_prox(std::size_t n, double shrink, double sigma, const double* b,
                    double* z) {
  const __m256d vs = _mm256_set1_pd(shrink);
  const __m256d vsig = _mm256_set1_pd(sigma);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vz = _mm256_loadu_pd(z + i);
    __m256d vb = _mm256_mul_pd(vsig, _mm256_loadu_pd(b + i));
    _mm256_storeu_pd(z + i, _mm256_mul_pd(vs, _mm256_sub_pd(vz, vb)));
  }
  for (; i < n; ++i) z[i] = shrink * (z[i] - sigma * b[i]);
}

void clamp_abs(std::size_t n, double a, double* z) {
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vma = _mm256_set1_pd(-a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(z + i,
                     _mm256_max_pd(_mm256_min_pd(_mm256_loadu_pd(z + i), va), vma));
  for (; i < n; ++i) {
    if (z[i] > a) z[i] = a;
    else if (z[i] < -a) z[i] = -a;
  }
}

void l21_project(std::size_t n_pix, double radius, double* px, double* py) {
  const __m256d vr = _mm256_set1_pd(radius);
  std::size_t i = 0;
  for (; i + 4 <= n_pix; i += 4) {
    __m256d vx = _mm256_loadu_pd(px + i);
    __m256d vy = _mm256_loadu_pd(py + i);
    __m256d m = _mm256_sqrt_pd(
        _mm256_add_pd(_mm256_mul_pd(vx, vx), _mm256_mul_pd(vy, vy)));
    __m256d over = _mm256_cmp_pd(m, vr, _CMP_GT_OQ);
    __m256d f = _mm256_div_pd(vr, m);
    __m256d sx = _mm256_mul_pd(vx, f);
    __m256d sy = _mm256_mul_pd(vy, f);
    _mm256_storeu_pd(px + i, _mm256_blendv_pd(vx, sx, over));
    _mm256_storeu_pd(py + i, _mm256_blendv_pd(vy, sy, over));
  }
  for (; i < n_pix; ++i) {
    double m = std::sqrt(px[i] * px[i] + py[i] * py[i]);
    if (m > radius) {
      double f = radius / m;
      px[i] *= f;
      py[i] *= f;
    }
  }
}

void cmul_real(std::size_t n_cplx, const double* w, double* z) {
  std::size_t i = 0;
  for (; i + 2 <= n_cplx; i += 2) {
    __m256d ww = _mm256_permute4x64_pd(
        _mm256_castpd128_pd256(_mm_loadu_pd(w + i)), 0x50);  // w0 w0 w1 w1
    __m256d vz = _mm256_loadu_pd(z + 2 * i);
    _mm256_storeu_pd(z + 2 * i, _mm256_mul_pd(vz, ww));
  }
  for (; i < n_cplx; ++i) {
    z[2 * i] *= w[i];
    z[2 * i + 1] *= w[i];
  }
}

double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(lo) + _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo));
}

double dot(std::size_t n, const double* x, const double* y) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_add_pd(
        acc, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

double nrm2sq(std::size_t n, const double* x) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(x + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(v, v));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i] * x[i];
  return s;
}

double asum(std::size_t n, const double* x) {
  const __m256d signmask = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_add_pd(acc, _mm256_andnot_pd(signmask, _mm256_loadu_pd(x + i)));
  double s = hsum(acc);
  for (; i < n; ++i) s += std::fabs(x[i]);
  return s;
}

}  // namespace

const Table* avx2_table() {
  static const Table t{axpy,      scale,       extrapolate, soft_threshold,
                       clamp_min0, quad_dual_prox, clamp_abs, l21_project,
                       cmul_real, dot,         nrm2sq,      asum};
  if (!__builtin_cpu_supports("avx2")) return nullptr;
  return &t;
}

#else

const Table* avx2_table() { return nullptr; }

#endif

}  // namespace tomo::kernels
