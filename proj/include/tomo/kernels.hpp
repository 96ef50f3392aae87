#pragma once

#include <cstddef>

// Data-parallel inner loops shared by the solvers and transforms.
//
// Every kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant. The active table is selected once at startup from CPUID and can be
// overridden with the environment variable TOMO_SIMD=scalar|avx2 (useful for
// the equivalence tests). Elementwise kernels are bit-exact across variants
// (both translation units are compiled without FP contraction and the vector
// code uses no FMA); reductions may differ by rounding because the lane-wise
// accumulation reassociates the sum.

namespace tomo::kernels {

struct Table {
  // y += a*x
  void (*axpy)(std::size_t n, double a, const double* x, double* y);
  // x *= a
  void (*scale)(std::size_t n, double a, double* x);
  // out = 2*x_new - x_old   (Chambolle-Pock extrapolation)
  void (*extrapolate)(std::size_t n, const double* x_new, const double* x_old,
                      double* out);
  // out = sign(x) * max(|x| - t, 0)
  void (*soft_threshold)(std::size_t n, double t, const double* x, double* out);
  // out = max(x, 0)
  void (*clamp_min0)(std::size_t n, const double* x, double* out);
  // z = shrink * (z - sigma*b)   (prox of the conjugate of a quadratic)
  void (*quad_dual_prox)(std::size_t n, double shrink, double sigma,
                         const double* b, double* z);
  // z = clamp(z, -a, a)
  void (*clamp_abs)(std::size_t n, double a, double* z);
  // per-pixel (px,py) *= radius / max(radius, |(px,py)|)
  void (*l21_project)(std::size_t n_pix, double radius, double* px, double* py);
  // interleaved complex z[i] *= w[i] (real weights)
  void (*cmul_real)(std::size_t n_cplx, const double* w, double* z);
  double (*dot)(std::size_t n, const double* x, const double* y);
  double (*nrm2sq)(std::size_t n, const double* x);
  double (*asum)(std::size_t n, const double* x);
};

const Table& scalar_table();
const Table* avx2_table();  // nullptr when unsupported by the build or CPU
const Table& active();
const char* active_isa();   // "avx2" or "scalar"

}  // namespace tomo::kernels
