#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tomo/grid.hpp"

// GRD1 raster file format, bit-exact roundtrip for all finite float64 values:
//   4 ASCII magic bytes "GRD1"
//   rows  : uint32 little-endian
//   cols  : uint32 little-endian
//   data  : rows*cols IEEE-754 float64 little-endian, row-major
// Plus an 8-bit grayscale PNG writer for figure-style output.

namespace tomo {

struct Raster {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<double> v;
};

void write_grd(const std::filesystem::path& path, std::uint32_t rows,
               std::uint32_t cols, const double* data);
Raster read_grd(const std::filesystem::path& path);

void write_raster(const std::filesystem::path& path, const Image& img);
// Throws if the stored raster is not square.
Image read_raster(const std::filesystem::path& path);

// Windowed 8-bit grayscale PNG: pixel = round_half_up(clamp((v-lo)/(hi-lo),0,1)*255).
void write_png(const std::filesystem::path& path, const Image& img, double lo = 0.0,
               double hi = 1.0);

}  // namespace tomo
