#include "tomo/radon.hpp"

#include "tomo/io.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#if defined(__x86_64__) || defined(_M_X64)
#define TOMO_RADON_AVX2 1
#include <immintrin.h>
#endif

namespace tomo {
namespace {

constexpr double kHalfDiag = std::numbers::sqrt2 / 2.0;

struct RayGrid {
  int n;        // image size
  int m_count;  // samples per ray
  double dt;    // step length 1/n
  double t0;    // first sample offset (range symmetric about 0)

  explicit RayGrid(int n_) : n(n_) {
    dt = 1.0 / n;
    m_count = static_cast<int>(std::floor(std::numbers::sqrt2 * n)) + 1;
    t0 = -0.5 * (m_count - 1) * dt;
  }
};

// Conservative sample-index range of the intersection of the ray
// p(t) = s*omega + t*omega_perp with the open unit square.
bool clip_ray(double s, double c, double sn, const RayGrid& rg, int& m_lo,
              int& m_hi) {
  double tmin = -1e30, tmax = 1e30;
  const double p0[2] = {s * c, s * sn};   // x(t) = p0x - t*sn, y(t) = p0y + t*c
  const double d[2] = {-sn, c};
  for (int axis = 0; axis < 2; ++axis) {
    if (std::fabs(d[axis]) < 1e-14) {
      if (std::fabs(p0[axis]) > 0.5) return false;
    } else {
      double ta = (-0.5 - p0[axis]) / d[axis];
      double tb = (0.5 - p0[axis]) / d[axis];
      if (ta > tb) std::swap(ta, tb);
      tmin = std::max(tmin, ta);
      tmax = std::min(tmax, tb);
    }
  }
  if (tmin > tmax) return false;
  m_lo = std::max(0, static_cast<int>(std::floor((tmin - rg.t0) / rg.dt)) - 1);
  m_hi = std::min(rg.m_count, static_cast<int>(std::ceil((tmax - rg.t0) / rg.dt)) + 2);
  return m_lo < m_hi;
}

double ray_sum_scalar(const double* img, int n, double s, double c, double sn,
                      const RayGrid& rg, int m_lo, int m_hi) {
  double acc = 0.0;
  for (int m = m_lo; m < m_hi; ++m) {
    const double t = rg.t0 + m * rg.dt;
    const double x = s * c - t * sn;
    const double y = s * sn + t * c;
    if (!(x > -0.5 && x < 0.5 && y > -0.5 && y < 0.5)) continue;
    const double fx = (x + 0.5) * n - 0.5;
    const double fy = (0.5 - y) * n - 0.5;
    const double fj = std::floor(fx);
    const double fi = std::floor(fy);
    const int j0 = static_cast<int>(fj);
    const int i0 = static_cast<int>(fi);
    const double wx = fx - fj;
    const double wy = fy - fi;
    double val = 0.0;
    if (i0 >= 0 && j0 >= 0)
      val = (1.0 - wy) * (1.0 - wx) * img[static_cast<std::size_t>(i0) * n + j0];
    if (i0 >= 0 && j0 + 1 < n)
      val += (1.0 - wy) * wx * img[static_cast<std::size_t>(i0) * n + j0 + 1];
    if (i0 + 1 < n && j0 >= 0)
      val += wy * (1.0 - wx) * img[static_cast<std::size_t>(i0 + 1) * n + j0];
    if (i0 + 1 < n && j0 + 1 < n)
      val += wy * wx * img[static_cast<std::size_t>(i0 + 1) * n + j0 + 1];
    acc += val;
  }
  return acc;
}

void ray_splat_scalar(double* img, int n, double s, double c, double sn,
                      const RayGrid& rg, int m_lo, int m_hi, double g) {
  for (int m = m_lo; m < m_hi; ++m) {
    const double t = rg.t0 + m * rg.dt;
    const double x = s * c - t * sn;
    const double y = s * sn + t * c;
    if (!(x > -0.5 && x < 0.5 && y > -0.5 && y < 0.5)) continue;
    const double fx = (x + 0.5) * n - 0.5;
    const double fy = (0.5 - y) * n - 0.5;
    const double fj = std::floor(fx);
    const double fi = std::floor(fy);
    const int j0 = static_cast<int>(fj);
    const int i0 = static_cast<int>(fi);
    const double wx = fx - fj;
    const double wy = fy - fi;
    if (i0 >= 0 && j0 >= 0)
      img[static_cast<std::size_t>(i0) * n + j0] += g * ((1.0 - wy) * (1.0 - wx));
    if (i0 >= 0 && j0 + 1 < n)
      img[static_cast<std::size_t>(i0) * n + j0 + 1] += g * ((1.0 - wy) * wx);
    if (i0 + 1 < n && j0 >= 0)
      img[static_cast<std::size_t>(i0 + 1) * n + j0] += g * (wy * (1.0 - wx));
    if (i0 + 1 < n && j0 + 1 < n)
      img[static_cast<std::size_t>(i0 + 1) * n + j0 + 1] += g * (wy * wx);
  }
}

bool use_avx2() {
#if TOMO_RADON_AVX2
  static const bool ok = [] {
    const char* env = std::getenv("TOMO_SIMD");
    if (env && std::strcmp(env, "scalar") == 0) return false;
    return static_cast<bool>(__builtin_cpu_supports("avx2"));
  }();
  return ok;
#else
  return false;
#endif
}

#if TOMO_RADON_AVX2

// Forward integral for four detector bins at once. The per-bin accumulation
// runs over the same sample indices in the same order as the scalar
// reference, and masked lanes contribute exact zeros, so the result is
// bit-identical to ray_sum_scalar.
__attribute__((target("avx2")))
void forward_quad_avx2(const double* img, int n, const double* s4, double c,
                       double sn, const RayGrid& rg, int m_lo, int m_hi,
                       double* out4) {
  const __m256d vc = _mm256_set1_pd(c);
  const __m256d vsn = _mm256_set1_pd(sn);
  const __m256d vn = _mm256_set1_pd(static_cast<double>(n));
  const __m256d vhalf = _mm256_set1_pd(0.5);
  const __m256d vmhalf = _mm256_set1_pd(-0.5);
  const __m256d vone = _mm256_set1_pd(1.0);
  const __m256d vzero = _mm256_setzero_pd();
  const __m256d v_nm2 = _mm256_set1_pd(static_cast<double>(n - 2));
  const __m128i vi_n = _mm_set1_epi32(n);
  const __m128i vi_nm1 = _mm_set1_epi32(n - 1);
  const __m128i vi_zero = _mm_setzero_si128();
  const __m128i vi_one = _mm_set1_epi32(1);

  const __m256d vs4 = _mm256_loadu_pd(s4);
  const __m256d sx = _mm256_mul_pd(vs4, vc);
  const __m256d sy = _mm256_mul_pd(vs4, vsn);
  __m256d acc = _mm256_setzero_pd();

  for (int m = m_lo; m < m_hi; ++m) {
    const double t = rg.t0 + m * rg.dt;
    const __m256d vt = _mm256_set1_pd(t);
    const __m256d x = _mm256_sub_pd(sx, _mm256_mul_pd(vt, vsn));
    const __m256d y = _mm256_add_pd(sy, _mm256_mul_pd(vt, vc));
    const __m256d inside = _mm256_and_pd(
        _mm256_and_pd(_mm256_cmp_pd(x, vmhalf, _CMP_GT_OQ),
                      _mm256_cmp_pd(x, vhalf, _CMP_LT_OQ)),
        _mm256_and_pd(_mm256_cmp_pd(y, vmhalf, _CMP_GT_OQ),
                      _mm256_cmp_pd(y, vhalf, _CMP_LT_OQ)));
    if (_mm256_testz_pd(inside, inside)) continue;

    const __m256d fx = _mm256_sub_pd(_mm256_mul_pd(_mm256_add_pd(x, vhalf), vn), vhalf);
    const __m256d fy = _mm256_sub_pd(_mm256_mul_pd(_mm256_sub_pd(vhalf, y), vn), vhalf);
    const __m256d fj = _mm256_floor_pd(fx);
    const __m256d fi = _mm256_floor_pd(fy);
    const __m256d wx = _mm256_sub_pd(fx, fj);
    const __m256d wy = _mm256_sub_pd(fy, fi);
    const __m256d ux = _mm256_sub_pd(vone, wx);
    const __m256d uy = _mm256_sub_pd(vone, wy);

    const __m256d row0_ok = _mm256_cmp_pd(fi, vzero, _CMP_GE_OQ);
    const __m256d row1_ok = _mm256_cmp_pd(fi, v_nm2, _CMP_LE_OQ);
    const __m256d col0_ok = _mm256_cmp_pd(fj, vzero, _CMP_GE_OQ);
    const __m256d col1_ok = _mm256_cmp_pd(fj, v_nm2, _CMP_LE_OQ);

    __m128i i0 = _mm256_cvttpd_epi32(fi);
    __m128i j0 = _mm256_cvttpd_epi32(fj);
    __m128i i0c = _mm_max_epi32(_mm_min_epi32(i0, vi_nm1), vi_zero);
    __m128i i1c = _mm_max_epi32(_mm_min_epi32(_mm_add_epi32(i0, vi_one), vi_nm1), vi_zero);
    __m128i j0c = _mm_max_epi32(_mm_min_epi32(j0, vi_nm1), vi_zero);
    __m128i j1c = _mm_max_epi32(_mm_min_epi32(_mm_add_epi32(j0, vi_one), vi_nm1), vi_zero);
    __m128i r0 = _mm_mullo_epi32(i0c, vi_n);
    __m128i r1 = _mm_mullo_epi32(i1c, vi_n);

    const __m256d g00 = _mm256_i32gather_pd(img, _mm_add_epi32(r0, j0c), 8);
    const __m256d g01 = _mm256_i32gather_pd(img, _mm_add_epi32(r0, j1c), 8);
    const __m256d g10 = _mm256_i32gather_pd(img, _mm_add_epi32(r1, j0c), 8);
    const __m256d g11 = _mm256_i32gather_pd(img, _mm_add_epi32(r1, j1c), 8);

    const __m256d m00 = _mm256_and_pd(inside, _mm256_and_pd(row0_ok, col0_ok));
    const __m256d m01 = _mm256_and_pd(inside, _mm256_and_pd(row0_ok, col1_ok));
    const __m256d m10 = _mm256_and_pd(inside, _mm256_and_pd(row1_ok, col0_ok));
    const __m256d m11 = _mm256_and_pd(inside, _mm256_and_pd(row1_ok, col1_ok));

    __m256d val = _mm256_mul_pd(_mm256_and_pd(_mm256_mul_pd(uy, ux), m00), g00);
    val = _mm256_add_pd(val, _mm256_mul_pd(_mm256_and_pd(_mm256_mul_pd(uy, wx), m01), g01));
    val = _mm256_add_pd(val, _mm256_mul_pd(_mm256_and_pd(_mm256_mul_pd(wy, ux), m10), g10));
    val = _mm256_add_pd(val, _mm256_mul_pd(_mm256_and_pd(_mm256_mul_pd(wy, wx), m11), g11));
    acc = _mm256_add_pd(acc, val);
  }
  _mm256_storeu_pd(out4, acc);
}

// Splat for one ray, four samples per vector pass; weight math is vectorized
// and the scattered adds run in lane order, matching ray_splat_scalar bit for
// bit (masked taps add exact zeros at a clamped in-range pixel).
__attribute__((target("avx2")))
void splat_ray_avx2(double* img, int n, double s, double c, double sn,
                    const RayGrid& rg, int m_lo, int m_hi, double g) {
  const __m256d vc = _mm256_set1_pd(c);
  const __m256d vsn = _mm256_set1_pd(sn);
  const __m256d vn = _mm256_set1_pd(static_cast<double>(n));
  const __m256d vhalf = _mm256_set1_pd(0.5);
  const __m256d vmhalf = _mm256_set1_pd(-0.5);
  const __m256d vone = _mm256_set1_pd(1.0);
  const __m256d vzero = _mm256_setzero_pd();
  const __m256d v_nm2 = _mm256_set1_pd(static_cast<double>(n - 2));
  const __m128i vi_n = _mm_set1_epi32(n);
  const __m128i vi_nm1 = _mm_set1_epi32(n - 1);
  const __m128i vi_zero = _mm_setzero_si128();
  const __m128i vi_one = _mm_set1_epi32(1);
  const __m256d vsx = _mm256_set1_pd(s * c);
  const __m256d vsy = _mm256_set1_pd(s * sn);
  const __m256d vg = _mm256_set1_pd(g);

  int m = m_lo;
  for (; m + 4 <= m_hi; m += 4) {
    __m256d vt = _mm256_setr_pd(rg.t0 + m * rg.dt, rg.t0 + (m + 1) * rg.dt,
                                rg.t0 + (m + 2) * rg.dt, rg.t0 + (m + 3) * rg.dt);
    const __m256d x = _mm256_sub_pd(vsx, _mm256_mul_pd(vt, vsn));
    const __m256d y = _mm256_add_pd(vsy, _mm256_mul_pd(vt, vc));
    const __m256d inside = _mm256_and_pd(
        _mm256_and_pd(_mm256_cmp_pd(x, vmhalf, _CMP_GT_OQ),
                      _mm256_cmp_pd(x, vhalf, _CMP_LT_OQ)),
        _mm256_and_pd(_mm256_cmp_pd(y, vmhalf, _CMP_GT_OQ),
                      _mm256_cmp_pd(y, vhalf, _CMP_LT_OQ)));
    const __m256d fx = _mm256_sub_pd(_mm256_mul_pd(_mm256_add_pd(x, vhalf), vn), vhalf);
    const __m256d fy = _mm256_sub_pd(_mm256_mul_pd(_mm256_sub_pd(vhalf, y), vn), vhalf);
    const __m256d fj = _mm256_floor_pd(fx);
    const __m256d fi = _mm256_floor_pd(fy);
    const __m256d wx = _mm256_sub_pd(fx, fj);
    const __m256d wy = _mm256_sub_pd(fy, fi);
    const __m256d ux = _mm256_sub_pd(vone, wx);
    const __m256d uy = _mm256_sub_pd(vone, wy);

    const __m256d row0_ok = _mm256_cmp_pd(fi, vzero, _CMP_GE_OQ);
    const __m256d row1_ok = _mm256_cmp_pd(fi, v_nm2, _CMP_LE_OQ);
    const __m256d col0_ok = _mm256_cmp_pd(fj, vzero, _CMP_GE_OQ);
    const __m256d col1_ok = _mm256_cmp_pd(fj, v_nm2, _CMP_LE_OQ);

    __m128i i0 = _mm256_cvttpd_epi32(fi);
    __m128i j0 = _mm256_cvttpd_epi32(fj);
    __m128i i0c = _mm_max_epi32(_mm_min_epi32(i0, vi_nm1), vi_zero);
    __m128i i1c = _mm_max_epi32(_mm_min_epi32(_mm_add_epi32(i0, vi_one), vi_nm1), vi_zero);
    __m128i j0c = _mm_max_epi32(_mm_min_epi32(j0, vi_nm1), vi_zero);
    __m128i j1c = _mm_max_epi32(_mm_min_epi32(_mm_add_epi32(j0, vi_one), vi_nm1), vi_zero);
    __m128i r0 = _mm_mullo_epi32(i0c, vi_n);
    __m128i r1 = _mm_mullo_epi32(i1c, vi_n);

    alignas(32) double w00[4], w01[4], w10[4], w11[4];
    alignas(16) int idx00[4], idx01[4], idx10[4], idx11[4];
    _mm256_store_pd(w00, _mm256_mul_pd(_mm256_and_pd(_mm256_mul_pd(uy, ux),
                                                     _mm256_and_pd(inside, _mm256_and_pd(row0_ok, col0_ok))), vg));
    _mm256_store_pd(w01, _mm256_mul_pd(_mm256_and_pd(_mm256_mul_pd(uy, wx),
                                                     _mm256_and_pd(inside, _mm256_and_pd(row0_ok, col1_ok))), vg));
    _mm256_store_pd(w10, _mm256_mul_pd(_mm256_and_pd(_mm256_mul_pd(wy, ux),
                                                     _mm256_and_pd(inside, _mm256_and_pd(row1_ok, col0_ok))), vg));
    _mm256_store_pd(w11, _mm256_mul_pd(_mm256_and_pd(_mm256_mul_pd(wy, wx),
                                                     _mm256_and_pd(inside, _mm256_and_pd(row1_ok, col1_ok))), vg));
    _mm_store_si128(reinterpret_cast<__m128i*>(idx00), _mm_add_epi32(r0, j0c));
    _mm_store_si128(reinterpret_cast<__m128i*>(idx01), _mm_add_epi32(r0, j1c));
    _mm_store_si128(reinterpret_cast<__m128i*>(idx10), _mm_add_epi32(r1, j0c));
    _mm_store_si128(reinterpret_cast<__m128i*>(idx11), _mm_add_epi32(r1, j1c));

    for (int l = 0; l < 4; ++l) {
      img[idx00[l]] += w00[l];
      img[idx01[l]] += w01[l];
      img[idx10[l]] += w10[l];
      img[idx11[l]] += w11[l];
    }
  }
  if (m < m_hi) ray_splat_scalar(img, n, s, c, sn, rg, m, m_hi, g);
}

#endif  // TOMO_RADON_AVX2

void forward_masked(const double* img, int n, const Geometry& geo,
                    const std::vector<std::uint8_t>* mask, double* out,
                    bool use_simd) {
  const RayGrid rg(n);
  const int nb = geo.n_bins;
  for (int a = 0; a < geo.n_angles(); ++a) {
    double* row = &out[static_cast<std::size_t>(a) * nb];
    if (mask && !(*mask)[a]) {
      std::fill(row, row + nb, 0.0);
      continue;
    }
    const double c = std::cos(geo.angles[a]);
    const double sn = std::sin(geo.angles[a]);
#if TOMO_RADON_AVX2
    if (use_simd && use_avx2()) {
      int k = 0;
      for (; k + 4 <= nb; k += 4) {
        double s4[4];
        int m_lo = rg.m_count, m_hi = 0;
        bool any = false;
        for (int l = 0; l < 4; ++l) {
          s4[l] = geo.bin_pos(k + l);
          int lo, hi;
          if (clip_ray(s4[l], c, sn, rg, lo, hi)) {
            any = true;
            m_lo = std::min(m_lo, lo);
            m_hi = std::max(m_hi, hi);
          }
        }
        if (!any) {
          row[k] = row[k + 1] = row[k + 2] = row[k + 3] = 0.0;
          continue;
        }
        forward_quad_avx2(img, n, s4, c, sn, rg, m_lo, m_hi, row + k);
      }
      for (; k < nb; ++k) {
        int lo, hi;
        row[k] = clip_ray(geo.bin_pos(k), c, sn, rg, lo, hi)
                     ? ray_sum_scalar(img, n, geo.bin_pos(k), c, sn, rg, lo, hi)
                     : 0.0;
      }
    } else
#endif
    {
      (void)use_simd;
      for (int k = 0; k < nb; ++k) {
        int lo, hi;
        row[k] = clip_ray(geo.bin_pos(k), c, sn, rg, lo, hi)
                     ? ray_sum_scalar(img, n, geo.bin_pos(k), c, sn, rg, lo, hi)
                     : 0.0;
      }
    }
    const double dt = rg.dt;
    for (int k = 0; k < nb; ++k) row[k] *= dt;
  }
}

int next_pow2(int x) {
  int p = 1;
  while (p < x) p <<= 1;
  return p;
}

}  // namespace

double Geometry::bin_step() const { return 2.0 * kHalfDiag / (n_bins - 1); }
double Geometry::bin_pos(int k) const { return -kHalfDiag + k * bin_step(); }

void Geometry::validate() const {
  if (n_bins < 2) throw std::invalid_argument("geometry: n_bins must be >= 2");
  if (angles.empty()) throw std::invalid_argument("geometry: no angles");
  constexpr double half_pi = std::numbers::pi / 2.0;
  for (std::size_t i = 0; i < angles.size(); ++i) {
    if (angles[i] < -half_pi || angles[i] >= half_pi)
      throw std::invalid_argument("geometry: angles must lie in [-pi/2, pi/2)");
    if (i > 0 && angles[i] <= angles[i - 1])
      throw std::invalid_argument("geometry: angles must be strictly increasing");
  }
}

static int default_bins(int n) {
  return static_cast<int>(std::ceil(std::numbers::sqrt2 * n)) + 1;
}

Geometry make_limited_geometry(int n, double half_deg, double step_deg, int n_bins) {
  Geometry geo;
  geo.n_bins = n_bins > 0 ? n_bins : default_bins(n);
  const int count = static_cast<int>(std::lround(2.0 * half_deg / step_deg));
  constexpr double deg = std::numbers::pi / 180.0;
  for (int k = 0; k < count; ++k)
    geo.angles.push_back((-half_deg + k * step_deg) * deg);
  geo.validate();
  return geo;
}

Geometry make_half_turn_geometry(int n, int views, int n_bins) {
  Geometry geo;
  geo.n_bins = n_bins > 0 ? n_bins : default_bins(n);
  for (int k = 0; k < views; ++k)
    geo.angles.push_back(-std::numbers::pi / 2.0 + k * std::numbers::pi / views);
  geo.validate();
  return geo;
}

int Sinogram::n_measured() const {
  int c = 0;
  for (auto m : mask) c += m ? 1 : 0;
  return c;
}

namespace angular_range {

std::vector<std::uint8_t> full(const Geometry& geo) {
  return std::vector<std::uint8_t>(geo.angles.size(), 1);
}

std::vector<std::uint8_t> interval(const Geometry& geo, double lo_rad, double hi_rad) {
  std::vector<std::uint8_t> m(geo.angles.size(), 0);
  for (std::size_t i = 0; i < geo.angles.size(); ++i)
    m[i] = (geo.angles[i] >= lo_rad && geo.angles[i] < hi_rad) ? 1 : 0;
  return m;
}

std::vector<std::uint8_t> subset(const Geometry& geo, const std::vector<int>& idx) {
  std::vector<std::uint8_t> m(geo.angles.size(), 0);
  for (int i : idx) {
    if (i < 0 || i >= geo.n_angles())
      throw std::invalid_argument("angular_range::subset: index out of range");
    m[i] = 1;
  }
  return m;
}

}  // namespace angular_range

Sinogram radon_forward(const Image& img, const Geometry& geo) {
  geo.validate();
  Sinogram out(geo);
  forward_masked(img.v.data(), img.n, geo, nullptr, out.v.data(), true);
  return out;
}

Sinogram radon_limited(const Image& img, const Geometry& geo,
                       const std::vector<std::uint8_t>& mask) {
  geo.validate();
  if (mask.size() != geo.angles.size())
    throw std::invalid_argument("radon_limited: mask length mismatch");
  Sinogram out(geo);
  out.mask = mask;
  forward_masked(img.v.data(), img.n, geo, &mask, out.v.data(), true);
  return out;
}

void radon_forward_into(const double* img, int n, const Geometry& geo,
                        const std::vector<std::uint8_t>* mask, double* sino) {
  forward_masked(img, n, geo, mask, sino, true);
}

static void adjoint_masked(const double* sino, const Geometry& geo,
                           const std::vector<std::uint8_t>* mask, int n, double* img,
                           bool use_simd) {
  std::fill(img, img + static_cast<std::size_t>(n) * n, 0.0);
  const RayGrid rg(n);
  const int nb = geo.n_bins;
  for (int a = 0; a < geo.n_angles(); ++a) {
    if (mask && !(*mask)[a]) continue;
    const double c = std::cos(geo.angles[a]);
    const double sn = std::sin(geo.angles[a]);
    const double* row = &sino[static_cast<std::size_t>(a) * nb];
    for (int k = 0; k < nb; ++k) {
      const double g = rg.dt * row[k];
      if (g == 0.0) continue;
      int lo, hi;
      if (!clip_ray(geo.bin_pos(k), c, sn, rg, lo, hi)) continue;
#if TOMO_RADON_AVX2
      if (use_simd && use_avx2()) {
        splat_ray_avx2(img, n, geo.bin_pos(k), c, sn, rg, lo, hi, g);
        continue;
      }
#endif
      (void)use_simd;
      ray_splat_scalar(img, n, geo.bin_pos(k), c, sn, rg, lo, hi, g);
    }
  }
}

void radon_adjoint_into(const double* sino, const Geometry& geo,
                        const std::vector<std::uint8_t>* mask, int n, double* img) {
  adjoint_masked(sino, geo, mask, n, img, true);
}

namespace detail {

void radon_forward_scalar(const double* img, int n, const Geometry& geo,
                          const std::vector<std::uint8_t>* mask, double* sino) {
  forward_masked(img, n, geo, mask, sino, false);
}

void radon_adjoint_scalar(const double* sino, const Geometry& geo,
                          const std::vector<std::uint8_t>* mask, int n, double* img) {
  adjoint_masked(sino, geo, mask, n, img, false);
}

}  // namespace detail

Image radon_adjoint(const Sinogram& sino, int n) {
  sino.geo.validate();
  if (sino.mask.size() != sino.geo.angles.size())
    throw std::invalid_argument("radon_adjoint: mask length mismatch");
  Image out(n);
  radon_adjoint_into(sino.v.data(), sino.geo, &sino.mask, n, out.v.data());
  return out;
}

Image fbp(const Sinogram& sino, int n, bool cosine_apodization) {
  sino.geo.validate();
  const int nb = sino.geo.n_bins;
  const int measured = sino.n_measured();
  if (measured == 0) return Image(n);
  const double ds = sino.geo.bin_step();
  const int pad = next_pow2(2 * nb);
  const double h2 = 1.0 / (static_cast<double>(n) * n);

  // Ramp filter |sigma| (band-limited by the DFT grid itself) with the
  // discretization constants folded in, so that
  //   fbp = (pi / n_measured) * adjoint(filtered rows).
  std::vector<double> filter(pad);
  for (int k = 0; k < pad; ++k) {
    const int kw = freq_wrap(k, pad);
    const double sigma = 2.0 * std::numbers::pi * kw / (pad * ds);
    double f = std::fabs(sigma) * ds / (2.0 * std::numbers::pi * h2);
    if (cosine_apodization) {
      const double nyq = std::numbers::pi / ds;
      f *= std::cos(0.5 * std::numbers::pi * sigma / nyq);
    }
    filter[k] = f;
  }

  Sinogram filtered = sino;
  std::vector<std::complex<double>> buf(pad), fbuf(pad);
  for (int a = 0; a < sino.geo.n_angles(); ++a) {
    if (!sino.mask[a]) continue;
    std::fill(buf.begin(), buf.end(), std::complex<double>(0.0));
    for (int k = 0; k < nb; ++k) buf[k] = sino.at(a, k);
    fft::forward_c2c_1d(pad, buf.data(), fbuf.data());
    for (int k = 0; k < pad; ++k) fbuf[k] *= filter[k];
    fft::inverse_c2c_1d(pad, fbuf.data(), buf.data());
    for (int k = 0; k < nb; ++k) filtered.at(a, k) = buf[k].real() / pad;
  }

  Image rec = radon_adjoint(filtered, n);
  const double scale = std::numbers::pi / measured;
  for (auto& x : rec.v) x *= scale;
  return rec;
}

double fourier_slice_check(const Image& img, const Geometry& geo) {
  geo.validate();
  const int n = img.n;
  const int nb = geo.n_bins;
  const double ds = geo.bin_step();
  const double h = 1.0 / n;
  const Sinogram sino = radon_forward(img, geo);
  const Spectrum spec = fft2(img);

  const int pad = next_pow2(2 * nb);
  const double s_first = geo.bin_pos(0);
  const double x0 = -0.5 + 0.5 * h;
  const double y0 = 0.5 - 0.5 * h;
  // Stay inside both the detector band and the image grid band.
  const double sigma_cut =
      0.75 * std::min(std::numbers::pi / ds, std::numbers::pi * n);

  std::vector<std::complex<double>> buf(pad), fbuf(pad);
  double worst = 0.0;
  for (int a = 0; a < geo.n_angles(); ++a) {
    const double c = std::cos(geo.angles[a]);
    const double sn = std::sin(geo.angles[a]);
    std::fill(buf.begin(), buf.end(), std::complex<double>(0.0));
    for (int k = 0; k < nb; ++k) buf[k] = sino.at(a, k);
    fft::forward_c2c_1d(pad, buf.data(), fbuf.data());

    double num = 0.0, den = 0.0;
    for (int m = 0; m < pad; ++m) {
      const int mw = freq_wrap(m, pad);
      const double sigma = 2.0 * std::numbers::pi * mw / (pad * ds);
      if (std::fabs(sigma) > sigma_cut) continue;
      // Detector-side transform with the physical phase reference.
      const std::complex<double> g =
          ds * std::exp(std::complex<double>(0.0, -sigma * s_first)) * fbuf[m];

      // Image-side transform interpolated along the slice.
      const double xi_x = sigma * c;
      const double xi_y = sigma * sn;
      double qf = xi_x / (2.0 * std::numbers::pi);   // column wavenumber
      double pf = -xi_y / (2.0 * std::numbers::pi);  // row wavenumber
      auto sample = [&](double pr, double qr) {
        const double pw = pr - std::floor(pr / n) * n;
        const double qw = qr - std::floor(qr / n) * n;
        const int p0 = static_cast<int>(std::floor(pw)) % n;
        const int q0 = static_cast<int>(std::floor(qw)) % n;
        const int p1 = (p0 + 1) % n;
        const int q1 = (q0 + 1) % n;
        const double wp = pw - std::floor(pw);
        const double wq = qw - std::floor(qw);
        return (1 - wp) * ((1 - wq) * spec.at(p0, q0) + wq * spec.at(p0, q1)) +
               wp * ((1 - wq) * spec.at(p1, q0) + wq * spec.at(p1, q1));
      };
      const std::complex<double> phase =
          std::exp(std::complex<double>(0.0, -(xi_x * x0 + xi_y * y0)));
      const std::complex<double> f = (1.0 / n) * phase * sample(pf, qf);

      num += std::norm(g - f);
      den += std::norm(g);
    }
    if (den > 0.0) worst = std::max(worst, std::sqrt(num / den));
  }
  return worst;
}

void write_sinogram(const std::filesystem::path& base, const Sinogram& sino) {
  std::filesystem::path grd = base;
  grd += ".grd";
  write_grd(grd, static_cast<std::uint32_t>(sino.geo.n_angles()),
            static_cast<std::uint32_t>(sino.geo.n_bins), sino.v.data());
  std::filesystem::path ang = base;
  ang += ".angles";
  std::ofstream f(ang);
  if (!f) throw std::runtime_error("write_sinogram: cannot open " + ang.string());
  f.precision(12);
  for (int a = 0; a < sino.geo.n_angles(); ++a) {
    if (!sino.mask[a]) f << "# ";
    f << sino.geo.angles[a] * 180.0 / std::numbers::pi << "\n";
  }
}

Sinogram read_sinogram(const std::filesystem::path& base) {
  std::filesystem::path grd = base;
  grd += ".grd";
  Raster r = read_grd(grd);
  std::filesystem::path ang = base;
  ang += ".angles";
  std::ifstream f(ang);
  if (!f) throw std::runtime_error("read_sinogram: cannot open " + ang.string());

  Geometry geo;
  geo.n_bins = static_cast<int>(r.cols);
  std::vector<std::uint8_t> mask;
  std::string line;
  while (std::getline(f, line)) {
    std::size_t pos = line.find_first_not_of(" \t");
    if (pos == std::string::npos) continue;
    bool measured = true;
    if (line[pos] == '#') {
      measured = false;
      pos = line.find_first_not_of(" \t", pos + 1);
      if (pos == std::string::npos)
        throw std::runtime_error("read_sinogram: malformed angle line");
    }
    geo.angles.push_back(std::stod(line.substr(pos)) * std::numbers::pi / 180.0);
    mask.push_back(measured ? 1 : 0);
  }
  if (geo.angles.size() != r.rows)
    throw std::runtime_error("read_sinogram: angle count does not match raster rows");
  geo.validate();
  Sinogram sino(geo);
  sino.mask = std::move(mask);
  sino.v = std::move(r.v);
  return sino;
}

}  // namespace tomo
