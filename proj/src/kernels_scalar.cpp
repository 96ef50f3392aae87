#include "tomo/kernels.hpp"

#include <cmath>

namespace tomo::kernels {
namespace {

void axpy(std::size_t n, double a, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale(std::size_t n, double a, double* x) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void extrapolate(std::size_t n, const double* x_new, const double* x_old,
                 double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = 2.0 * x_new[i] - x_old[i];
}

void soft_threshold(std::size_t n, double t, const double* x, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    double m = std::fabs(x[i]) - t;
    out[i] = m > 0.0 ? std::copysign(m, x[i]) : 0.0;
  }
}

void clamp_min0(std::size_t n, const double* x, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void quad_dual_prox(std::size_t n, double shrink, double sigma, const double* b,
                    double* z) {
  for (std::size_t i = 0; i < n; ++i) z[i] = shrink * (z[i] - sigma * b[i]);
}

void clamp_abs(std::size_t n, double a, double* z) {
  for (std::size_t i = 0; i < n; ++i) {
    if (z[i] > a) z[i] = a;
    else if (z[i] < -a) z[i] = -a;
  }
}

void l21_project(std::size_t n_pix, double radius, double* px, double* py) {
  for (std::size_t i = 0; i < n_pix; ++i) {
    double m = std::sqrt(px[i] * px[i] + py[i] * py[i]);
    if (m > radius) {
      double f = radius / m;
      px[i] *= f;
      py[i] *= f;
    }
  }
}

void cmul_real(std::size_t n_cplx, const double* w, double* z) {
  for (std::size_t i = 0; i < n_cplx; ++i) {
    z[2 * i] *= w[i];
    z[2 * i + 1] *= w[i];
  }
}

double dot(std::size_t n, const double* x, const double* y) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

double nrm2sq(std::size_t n, const double* x) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * x[i];
  return s;
}

double asum(std::size_t n, const double* x) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::fabs(x[i]);
  return s;
}

}  // namespace

const Table& scalar_table() {
  static const Table t{axpy,      scale,       extrapolate, soft_threshold,
                       clamp_min0, quad_dual_prox, clamp_abs, l21_project,
                       cmul_real, dot,         nrm2sq,      asum};
  return t;
}

}  // namespace tomo::kernels
