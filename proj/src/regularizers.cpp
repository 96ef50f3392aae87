#include "tomo/regularizers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tomo/kernels.hpp"

namespace tomo {

void grad_into(const double* img, int n, double* gx, double* gy) {
  for (int i = 0; i < n; ++i) {
    const double* row = &img[static_cast<std::size_t>(i) * n];
    double* gxr = &gx[static_cast<std::size_t>(i) * n];
    for (int j = 0; j < n - 1; ++j) gxr[j] = row[j + 1] - row[j];
    gxr[n - 1] = 0.0;
  }
  for (int i = 0; i < n - 1; ++i) {
    const double* row = &img[static_cast<std::size_t>(i) * n];
    const double* next = row + n;
    double* gyr = &gy[static_cast<std::size_t>(i) * n];
    for (int j = 0; j < n; ++j) gyr[j] = next[j] - row[j];
  }
  std::fill(gy + static_cast<std::size_t>(n - 1) * n, gy + static_cast<std::size_t>(n) * n,
            0.0);
}

void divneg_into(const double* gx, const double* gy, int n, double* out) {
  for (int i = 0; i < n; ++i) {
    const double* px = &gx[static_cast<std::size_t>(i) * n];
    double* o = &out[static_cast<std::size_t>(i) * n];
    o[0] = -px[0];
    for (int j = 1; j < n - 1; ++j) o[j] = px[j - 1] - px[j];
    o[n - 1] = px[n - 2];
  }
  for (int j = 0; j < n; ++j) {
    out[j] -= gy[j];
    for (int i = 1; i < n - 1; ++i)
      out[static_cast<std::size_t>(i) * n + j] -=
          gy[static_cast<std::size_t>(i) * n + j] -
          gy[static_cast<std::size_t>(i - 1) * n + j];
    out[static_cast<std::size_t>(n - 1) * n + j] +=
        gy[static_cast<std::size_t>(n - 2) * n + j];
  }
}

VectorField grad(const Image& img) {
  VectorField g(img.n);
  grad_into(img.v.data(), img.n, g.x.data(), g.y.data());
  return g;
}

Image div(const VectorField& field) {
  Image out(field.n);
  divneg_into(field.x.data(), field.y.data(), field.n, out.v.data());
  for (auto& x : out.v) x = -x;
  return out;
}

double tv_seminorm(const Image& img) {
  const VectorField g = grad(img);
  double s = 0.0;
  for (std::size_t i = 0; i < g.x.size(); ++i)
    s += std::sqrt(g.x[i] * g.x[i] + g.y[i] * g.y[i]);
  return s / (static_cast<double>(img.n) * img.n);
}

void soft_threshold_inplace(std::vector<double>& x, double t) {
  if (t < 0.0) throw std::invalid_argument("soft_threshold: negative threshold");
  kernels::active().soft_threshold(x.size(), t, x.data(), x.data());
}

Image prox_nonneg(const Image& img) {
  Image out(img.n);
  kernels::active().clamp_min0(img.v.size(), img.v.data(), out.v.data());
  return out;
}

void project_l21_ball(VectorField& field, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("project_l21_ball: radius <= 0");
  kernels::active().l21_project(field.x.size(), radius, field.x.data(),
                                field.y.data());
}

}  // namespace tomo
