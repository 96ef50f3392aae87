#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tomo/frames.hpp"
#include "tomo/metrics.hpp"
#include "tomo/radon.hpp"
#include "tomo/sim.hpp"
#include "tomo/solvers.hpp"

// Command layer: everything the tomo binary does, exposed as functions so the
// acceptance suite drives the same code paths. One invocation writes into one
// run directory: config echo, artifacts, logs.

namespace tomo::cli {

struct RunConfig {
  // geometry
  std::string mode = "limited";  // limited | sparse | full
  double limited_half_deg = 65.0;
  double limited_step_deg = 1.0;
  int sparse_views = 50;
  int full_views = 360;
  int n_bins = 0;  // 0 = ceil(sqrt(2) n) + 1

  // image
  int n = 256;

  // noise
  double photons = 1e4;
  std::uint64_t seed = 1;
  double noise_scale = 0.0;  // 0 = auto (max optical depth ~ 4)

  // method + solver parameters
  std::string method = "complementary";  // fbp|l1|tv|hybrid|bb|complementary
  double alpha = 2e-4;
  double beta = 2e-4;
  double mu = 1.0;
  int outer_iters = 0;  // 0 = auto: 10 for photons >= 1e4, else 4
  int inner_l1 = 200;
  int inner_tv = 500;
  double beta_schedule = 2.0;
  double step_ratio = 1.0;
  bool jacobi_coupling = false;
  bool fbp_cosine = false;

  // frame
  int scales = 0;                      // 0 = auto
  std::string wedges;                  // comma list, empty = default schedule
  std::string wedge_adapted = "auto";  // auto | on | off
  double wedge_deg = 0.0;              // 0 = infer from the measured angles
  std::string nu = "smooth";           // smooth | poly3 | poly5 | poly7

  // inputs/outputs
  std::string preset = "thorax";
  std::string phantom_file;  // ellipse text file overriding the preset
  std::string phantom_grd;   // rasterized phantom input (project)
  std::string sino;          // sinogram base path (reconstruct/sweep)
  std::string truth;         // truth raster for metrics
  std::string out_dir;       // run directory; empty = auto under the run root
};

// Exit codes used by the binary.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;
inline constexpr int kExitDivergence = 3;

std::filesystem::path resolve_out_dir(const RunConfig& cfg, const std::string& command);
void echo_config(const RunConfig& cfg, const std::filesystem::path& dir);

Geometry make_geometry(const RunConfig& cfg);
EllipsePhantom resolve_phantom(const RunConfig& cfg);

// Frame bank for this config/geometry (wedge adaptation resolved from the
// measured angles when set to "auto"). Banks are memoized per parameter set.
const WindowBank& make_bank(const RunConfig& cfg, const Geometry& geo);

// ||K_Omega|| memoized per (geometry, mask, n).
double op_norm(const Geometry& geo, const std::vector<std::uint8_t>& mask, int n);

struct MethodOutput {
  Image rec;
  Image aux;  // complementary only
  bool has_aux = false;
  SolveReport report;
};

// Runs cfg.method on the given data; resolves solver defaults from cfg.
MethodOutput run_method(const RunConfig& cfg, const Sinogram& data);

struct MetricsRow {
  std::string method;
  double photons = 0;
  double rel_l2 = 0;
  double psnr = 0;
  double ssim = 0;
  double seconds = 0;
};
void append_metrics_csv(const std::filesystem::path& path, const MetricsRow& row);

int cmd_phantom(const RunConfig& cfg);
int cmd_project(const RunConfig& cfg);
int cmd_reconstruct(const RunConfig& cfg);
int cmd_sweep(RunConfig cfg, const std::string& param, const std::vector<double>& grid);
int cmd_table(const std::string& dir, const std::string& out_csv);
int cmd_check(const RunConfig& cfg, const std::string& dump_bank_dir);

}  // namespace tomo::cli
