#pragma once

#include "tomo/grid.hpp"

// Reconstruction-quality measures: relative l2 error, PSNR and SSIM.

namespace tomo {

// ||rec - truth|| / ||truth||; throws on zero-norm truth.
double rel_l2(const Image& rec, const Image& truth);

// 10*log10(peak^2 / MSE) in dB; +infinity for identical inputs.
double psnr(const Image& rec, const Image& truth, double peak = 1.0);

// Mean local SSIM, 11x11 Gaussian window sigma=1.5, C1=(0.01 L)^2,
// C2=(0.03 L)^2, symmetric boundary padding.
double ssim(const Image& rec, const Image& truth, double dynamic_range = 1.0);

}  // namespace tomo
