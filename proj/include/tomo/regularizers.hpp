#pragma once

#include <vector>

#include "tomo/grid.hpp"

// Discrete gradient/divergence pair, the TV seminorm, and the proximal maps
// shared by the solvers. grad uses forward differences with a Neumann
// boundary (last row/column difference zero) and div is its exact negative
// adjoint, so <grad u, p> = -<u, div p> holds to rounding.

namespace tomo {

struct VectorField {
  int n = 0;
  std::vector<double> x;  // horizontal component, row-major n*n
  std::vector<double> y;  // vertical component

  VectorField() = default;
  explicit VectorField(int n_)
      : n(n_),
        x(static_cast<std::size_t>(n_) * n_, 0.0),
        y(static_cast<std::size_t>(n_) * n_, 0.0) {}
};

VectorField grad(const Image& img);
Image div(const VectorField& field);

// Flat-buffer variants for the solver inner loops; divneg_into writes the
// negative divergence (the exact adjoint of grad_into).
void grad_into(const double* img, int n, double* gx, double* gy);
void divneg_into(const double* gx, const double* gy, int n, double* out);

// (1/n^2) * sum_p sqrt(gh^2 + gv^2) of the forward-difference gradient;
// pixel-area scaling makes values comparable across resolutions.
double tv_seminorm(const Image& img);

// Componentwise soft threshold on a flat coefficient buffer.
void soft_threshold_inplace(std::vector<double>& x, double t);

Image prox_nonneg(const Image& img);

// Per-pixel projection onto the (2,inf) ball of the given radius.
void project_l21_ball(VectorField& field, double radius);

}  // namespace tomo
