#include "tomo/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace tomo {
namespace {

// Separable Gaussian blur with symmetric (reflect-including-edge) padding.
std::vector<double> gauss_blur(const std::vector<double>& src, int n,
                               const std::vector<double>& kern) {
  const int r = static_cast<int>(kern.size()) / 2;
  auto reflect = [n](int k) {
    while (k < 0 || k >= n) {
      if (k < 0) k = -k - 1;
      if (k >= n) k = 2 * n - k - 1;
    }
    return k;
  };
  std::vector<double> tmp(src.size()), out(src.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int t = -r; t <= r; ++t)
        s += kern[t + r] * src[static_cast<std::size_t>(i) * n + reflect(j + t)];
      tmp[static_cast<std::size_t>(i) * n + j] = s;
    }
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int t = -r; t <= r; ++t)
        s += kern[t + r] * tmp[static_cast<std::size_t>(reflect(i + t)) * n + j];
      out[static_cast<std::size_t>(i) * n + j] = s;
    }
  return out;
}

}  // namespace

double rel_l2(const Image& rec, const Image& truth) {
  if (rec.n != truth.n) throw std::invalid_argument("rel_l2: size mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < rec.v.size(); ++i) {
    const double d = rec.v[i] - truth.v[i];
    num += d * d;
    den += truth.v[i] * truth.v[i];
  }
  if (den == 0.0) throw std::invalid_argument("rel_l2: zero-norm truth");
  return std::sqrt(num / den);
}

double psnr(const Image& rec, const Image& truth, double peak) {
  if (rec.n != truth.n) throw std::invalid_argument("psnr: size mismatch");
  double mse = 0.0;
  for (std::size_t i = 0; i < rec.v.size(); ++i) {
    const double d = rec.v[i] - truth.v[i];
    mse += d * d;
  }
  mse /= static_cast<double>(rec.v.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

double ssim(const Image& rec, const Image& truth, double dynamic_range) {
  if (rec.n != truth.n) throw std::invalid_argument("ssim: size mismatch");
  if (rec.n < 11) throw std::invalid_argument("ssim: image smaller than the window");
  const int n = rec.n;
  const double c1 = std::pow(0.01 * dynamic_range, 2);
  const double c2 = std::pow(0.03 * dynamic_range, 2);

  std::vector<double> kern(11);
  double ksum = 0.0;
  for (int t = -5; t <= 5; ++t) {
    kern[t + 5] = std::exp(-0.5 * t * t / (1.5 * 1.5));
    ksum += kern[t + 5];
  }
  for (auto& k : kern) k /= ksum;

  const std::vector<double>& x = rec.v;
  const std::vector<double>& y = truth.v;
  std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto mx = gauss_blur(x, n, kern);
  const auto my = gauss_blur(y, n, kern);
  const auto mxx = gauss_blur(xx, n, kern);
  const auto myy = gauss_blur(yy, n, kern);
  const auto mxy = gauss_blur(xy, n, kern);

  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double vx = mxx[i] - mx[i] * mx[i];
    const double vy = myy[i] - my[i] * my[i];
    const double cxy = mxy[i] - mx[i] * my[i];
    const double val = ((2.0 * mx[i] * my[i] + c1) * (2.0 * cxy + c2)) /
                       ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
    acc += val;
  }
  return acc / static_cast<double>(x.size());
}

}  // namespace tomo
