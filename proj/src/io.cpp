#include "tomo/io.hpp"

#include <zlib.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace tomo {
namespace {

void put_u32le(std::string& buf, std::uint32_t x) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((x >> (8 * i)) & 0xff));
}

std::uint32_t get_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u32be(std::string& buf, std::uint32_t x) {
  for (int i = 3; i >= 0; --i) buf.push_back(static_cast<char>((x >> (8 * i)) & 0xff));
}

void png_chunk(std::string& out, const char type[4], const std::string& payload) {
  put_u32be(out, static_cast<std::uint32_t>(payload.size()));
  std::string body(type, 4);
  body += payload;
  out += body;
  std::uint32_t crc = static_cast<std::uint32_t>(
      crc32(0, reinterpret_cast<const Bytef*>(body.data()), static_cast<uInt>(body.size())));
  put_u32be(out, crc);
}

}  // namespace

void write_grd(const std::filesystem::path& path, std::uint32_t rows,
               std::uint32_t cols, const double* data) {
  std::string buf;
  buf.reserve(12 + static_cast<std::size_t>(rows) * cols * 8);
  buf += "GRD1";
  put_u32le(buf, rows);
  put_u32le(buf, cols);
  const std::size_t count = static_cast<std::size_t>(rows) * cols;
  const char* raw = reinterpret_cast<const char*>(data);
  buf.append(raw, raw + count * sizeof(double));  // host is little-endian

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("write_grd: cannot open " + path.string());
  f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!f) throw std::runtime_error("write_grd: write failed for " + path.string());
}

Raster read_grd(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("read_grd: cannot open " + path.string());
  std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (buf.size() < 12 || std::memcmp(buf.data(), "GRD1", 4) != 0)
    throw std::runtime_error("read_grd: bad magic in " + path.string());
  const auto* p = reinterpret_cast<const unsigned char*>(buf.data());
  Raster r;
  r.rows = get_u32le(p + 4);
  r.cols = get_u32le(p + 8);
  const std::size_t count = static_cast<std::size_t>(r.rows) * r.cols;
  if (buf.size() != 12 + count * sizeof(double))
    throw std::runtime_error("read_grd: truncated payload in " + path.string());
  r.v.resize(count);
  std::memcpy(r.v.data(), buf.data() + 12, count * sizeof(double));
  return r;
}

void write_raster(const std::filesystem::path& path, const Image& img) {
  write_grd(path, static_cast<std::uint32_t>(img.n), static_cast<std::uint32_t>(img.n),
            img.v.data());
}

Image read_raster(const std::filesystem::path& path) {
  Raster r = read_grd(path);
  if (r.rows != r.cols)
    throw std::runtime_error("read_raster: raster is not square in " + path.string());
  Image img(static_cast<int>(r.rows));
  img.v = std::move(r.v);
  return img;
}

void write_png(const std::filesystem::path& path, const Image& img, double lo,
               double hi) {
  if (!(lo < hi)) throw std::invalid_argument("write_png: requires lo < hi");
  const int n = img.n;
  // One filter byte (0 = none) per scanline.
  std::string raw;
  raw.reserve(static_cast<std::size_t>(n) * (n + 1));
  for (int i = 0; i < n; ++i) {
    raw.push_back('\0');
    for (int j = 0; j < n; ++j) {
      double t = (img.at(i, j) - lo) / (hi - lo);
      t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
      raw.push_back(static_cast<char>(static_cast<int>(std::floor(t * 255.0 + 0.5))));
    }
  }

  uLongf zcap = compressBound(static_cast<uLong>(raw.size()));
  std::string zdata(zcap, '\0');
  if (compress2(reinterpret_cast<Bytef*>(zdata.data()), &zcap,
                reinterpret_cast<const Bytef*>(raw.data()), static_cast<uLong>(raw.size()),
                9) != Z_OK)
    throw std::runtime_error("write_png: deflate failed");
  zdata.resize(zcap);

  std::string ihdr;
  put_u32be(ihdr, static_cast<std::uint32_t>(n));
  put_u32be(ihdr, static_cast<std::uint32_t>(n));
  ihdr.push_back(8);   // bit depth
  ihdr.push_back(0);   // grayscale
  ihdr.push_back(0);   // deflate
  ihdr.push_back(0);   // filter method
  ihdr.push_back(0);   // no interlace

  std::string out("\x89PNG\r\n\x1a\n", 8);
  png_chunk(out, "IHDR", ihdr);
  png_chunk(out, "IDAT", zdata);
  png_chunk(out, "IEND", "");

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("write_png: cannot open " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw std::runtime_error("write_png: write failed for " + path.string());
}

}  // namespace tomo
