// tomo: limited-data CT reconstruction harness.
//
// Subcommands: phantom, project, reconstruct, sweep, table, check.
// Exit codes: 0 ok, 1 usage/config error, 2 runtime error, 3 divergence.

#include <CLI11.hpp>

#include <iostream>

#include "tomo/cli.hpp"

namespace {

void add_common_options(CLI::App* app, tomo::cli::RunConfig& cfg) {
  app->set_config("--config", "", "key=value config file (flags win)");
  app->add_option("--mode", cfg.mode, "geometry: limited|sparse|full");
  app->add_option("--half-deg", cfg.limited_half_deg, "limited view half range (deg)");
  app->add_option("--step-deg", cfg.limited_step_deg, "limited view angle step (deg)");
  app->add_option("--views", cfg.sparse_views, "sparse view count");
  app->add_option("--full-views", cfg.full_views, "full mode view count");
  app->add_option("--bins", cfg.n_bins, "detector bins (0 = auto)");
  app->add_option("-n,--size", cfg.n, "image size in pixels");
  app->add_option("--photons", cfg.photons, "incident photons per bin");
  app->add_option("--seed", cfg.seed, "noise seed");
  app->add_option("--noise-scale", cfg.noise_scale, "attenuation scale (0 = auto)");
  app->add_option("--method", cfg.method, "fbp|l1|tv|hybrid|bb|complementary");
  app->add_option("--alpha", cfg.alpha, "l1 weight");
  app->add_option("--beta", cfg.beta, "TV weight");
  app->add_option("--mu", cfg.mu, "coupling weight");
  app->add_option("--outer", cfg.outer_iters, "outer iterations (0 = auto by photons)");
  app->add_option("--inner-l1", cfg.inner_l1, "inner iterations, l1 stage");
  app->add_option("--inner-tv", cfg.inner_tv, "inner iterations, TV stage");
  app->add_option("--beta-schedule", cfg.beta_schedule, "beta(n) multiplier");
  app->add_option("--step-ratio", cfg.step_ratio, "primal/dual step split");
  app->add_flag("--jacobi-coupling", cfg.jacobi_coupling,
                "u-step reads the previous theta update");
  app->add_flag("--fbp-cosine", cfg.fbp_cosine, "cosine-apodized FBP filter");
  app->add_option("--scales", cfg.scales, "frame scales (0 = auto)");
  app->add_option("--wedges", cfg.wedges, "comma list of wedges per scale");
  app->add_option("--wedge-adapted", cfg.wedge_adapted, "auto|on|off");
  app->add_option("--wedge-deg", cfg.wedge_deg, "visible half angle (0 = infer)");
  app->add_option("--nu", cfg.nu, "transition function: smooth|poly3|poly5|poly7");
  app->add_option("--preset", cfg.preset, "phantom preset");
  app->add_option("--phantom-file", cfg.phantom_file, "ellipse text file");
  app->add_option("--phantom", cfg.phantom_grd, "phantom raster (GRD1)");
  app->add_option("--sino", cfg.sino, "sinogram base path (without .grd)");
  app->add_option("--truth", cfg.truth, "truth raster for metrics");
  app->add_option("-o,--out-dir", cfg.out_dir, "run directory (default: auto)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"limited-data CT reconstruction toolkit"};
  app.require_subcommand(1);

  tomo::cli::RunConfig cfg;
  std::string sweep_param;
  std::vector<double> sweep_grid;
  std::string table_dir = "runs";
  std::string table_out = "table.csv";
  std::string dump_bank;

  auto* p_phantom = app.add_subcommand("phantom", "rasterize a phantom");
  add_common_options(p_phantom, cfg);
  auto* p_project = app.add_subcommand("project", "simulate limited/noisy data");
  add_common_options(p_project, cfg);
  auto* p_rec = app.add_subcommand("reconstruct", "run one reconstruction");
  add_common_options(p_rec, cfg);
  auto* p_sweep = app.add_subcommand("sweep", "1-D parameter grid search");
  add_common_options(p_sweep, cfg);
  p_sweep->add_option("--param", sweep_param, "alpha|beta|mu")->required();
  p_sweep->add_option("--grid", sweep_grid, "grid values")->required()->delimiter(',');
  auto* p_table = app.add_subcommand("table", "aggregate metrics into one table");
  p_table->add_option("--dir", table_dir, "directory scanned for metrics.csv");
  p_table->add_option("--out", table_out, "output CSV");
  auto* p_check = app.add_subcommand("check", "run the invariant suite");
  add_common_options(p_check, cfg);
  p_check->add_option("--dump-bank", dump_bank, "export the adapted bank to a directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : tomo::cli::kExitUsage;
  }

  try {
    if (p_phantom->parsed()) return tomo::cli::cmd_phantom(cfg);
    if (p_project->parsed()) return tomo::cli::cmd_project(cfg);
    if (p_rec->parsed()) return tomo::cli::cmd_reconstruct(cfg);
    if (p_sweep->parsed()) return tomo::cli::cmd_sweep(cfg, sweep_param, sweep_grid);
    if (p_table->parsed()) return tomo::cli::cmd_table(table_dir, table_out);
    if (p_check->parsed()) return tomo::cli::cmd_check(cfg, dump_bank);
  } catch (const tomo::divergence_error& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return tomo::cli::kExitDivergence;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return tomo::cli::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return tomo::cli::kExitRuntime;
  }
  return tomo::cli::kExitUsage;
}
