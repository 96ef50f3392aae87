#include "tomo/cli.hpp"

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>

#include "tomo/io.hpp"
#include "tomo/kernels.hpp"
#include "tomo/regularizers.hpp"

namespace tomo::cli {
namespace {

namespace fs = std::filesystem;

NuKind parse_nu(const std::string& s) {
  if (s == "smooth") return NuKind::smooth;
  if (s == "poly3") return NuKind::poly3;
  if (s == "poly5") return NuKind::poly5;
  if (s == "poly7") return NuKind::poly7;
  throw std::invalid_argument("unknown nu variant: " + s);
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(std::stoi(tok));
  }
  return out;
}

// Half-angle of the measured angular range, used when the wedge adaptation
// is inferred from the data.
double infer_wedge_half_angle(const Geometry& geo, const std::vector<std::uint8_t>& mask) {
  double lo = 1e9, hi = -1e9, step = 1e9;
  double prev = 1e9;
  for (int a = 0; a < geo.n_angles(); ++a) {
    if (!mask.empty() && !mask[a]) continue;
    lo = std::min(lo, geo.angles[a]);
    hi = std::max(hi, geo.angles[a]);
    if (prev < 1e8) step = std::min(step, geo.angles[a] - prev);
    prev = geo.angles[a];
  }
  if (hi < lo) return 0.0;
  if (step > 1e8) step = 0.0;
  return 0.5 * (hi - lo + step);
}

bool limited_range(const Geometry& geo, const std::vector<std::uint8_t>& mask) {
  const double half = infer_wedge_half_angle(geo, mask);
  return half > 0.0 && half < 85.0 * std::numbers::pi / 180.0;
}

struct BankKey {
  int n;
  int scales;
  std::string wedges;
  std::string nu;
  bool adapted;
  long phi_millideg;
  auto operator<=>(const BankKey&) const = default;
};

std::map<BankKey, WindowBank> g_bank_cache;
std::mutex g_bank_mutex;

std::map<std::string, double> g_norm_cache;
std::mutex g_norm_mutex;

std::string geometry_fingerprint(const Geometry& geo, const std::vector<std::uint8_t>& mask,
                                 int n) {
  std::ostringstream ss;
  ss.precision(17);
  ss << n << ";" << geo.n_bins << ";";
  for (double a : geo.angles) ss << a << ",";
  ss << ";";
  for (auto m : mask) ss << (m ? '1' : '0');
  return ss.str();
}

SolverConfig solver_config(const RunConfig& cfg, const Sinogram& data) {
  SolverConfig sc;
  sc.alpha = cfg.alpha;
  sc.beta = cfg.beta;
  sc.mu = cfg.mu;
  sc.outer_iters =
      cfg.outer_iters > 0 ? cfg.outer_iters : (cfg.photons >= 1e4 ? 10 : 4);
  sc.inner_iters_l1 = cfg.inner_l1;
  sc.inner_iters_tv = cfg.inner_tv;
  sc.beta_schedule = cfg.beta_schedule;
  sc.step_ratio = cfg.step_ratio;
  sc.jacobi_coupling = cfg.jacobi_coupling;
  sc.op_norm_hint = op_norm(data.geo, data.mask, cfg.n);
  return sc;
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%d-%H%M%S", std::localtime(&t));
  return buf;
}

void write_image_outputs(const fs::path& dir, const std::string& stem, const Image& img) {
  write_raster(dir / (stem + ".grd"), img);
  write_png(dir / (stem + ".png"), img, 0.0, 1.0);
}

}  // namespace

std::filesystem::path resolve_out_dir(const RunConfig& cfg, const std::string& command) {
  fs::path dir;
  if (!cfg.out_dir.empty()) {
    dir = cfg.out_dir;
  } else {
    const char* root = std::getenv("TOMO_RUN_ROOT");
    dir = fs::path(root ? root : "runs") /
          (command + "-" + timestamp() + "-" + std::to_string(::getpid()));
  }
  fs::create_directories(dir);
  return dir;
}

void echo_config(const RunConfig& cfg, const std::filesystem::path& dir) {
  std::ofstream f(dir / "config.txt");
  if (!f) throw std::runtime_error("cannot write config echo in " + dir.string());
  f.precision(17);
  f << "mode=" << cfg.mode << "\n"
    << "limited_half_deg=" << cfg.limited_half_deg << "\n"
    << "limited_step_deg=" << cfg.limited_step_deg << "\n"
    << "sparse_views=" << cfg.sparse_views << "\n"
    << "full_views=" << cfg.full_views << "\n"
    << "n_bins=" << cfg.n_bins << "\n"
    << "n=" << cfg.n << "\n"
    << "photons=" << cfg.photons << "\n"
    << "seed=" << cfg.seed << "\n"
    << "noise_scale=" << cfg.noise_scale << "\n"
    << "method=" << cfg.method << "\n"
    << "alpha=" << cfg.alpha << "\n"
    << "beta=" << cfg.beta << "\n"
    << "mu=" << cfg.mu << "\n"
    << "outer_iters=" << cfg.outer_iters << "\n"
    << "inner_l1=" << cfg.inner_l1 << "\n"
    << "inner_tv=" << cfg.inner_tv << "\n"
    << "beta_schedule=" << cfg.beta_schedule << "\n"
    << "step_ratio=" << cfg.step_ratio << "\n"
    << "jacobi_coupling=" << (cfg.jacobi_coupling ? 1 : 0) << "\n"
    << "fbp_cosine=" << (cfg.fbp_cosine ? 1 : 0) << "\n"
    << "scales=" << cfg.scales << "\n"
    << "wedges=" << cfg.wedges << "\n"
    << "wedge_adapted=" << cfg.wedge_adapted << "\n"
    << "wedge_deg=" << cfg.wedge_deg << "\n"
    << "nu=" << cfg.nu << "\n"
    << "preset=" << cfg.preset << "\n"
    << "phantom_file=" << cfg.phantom_file << "\n"
    << "phantom_grd=" << cfg.phantom_grd << "\n"
    << "sino=" << cfg.sino << "\n"
    << "truth=" << cfg.truth << "\n";
}

Geometry make_geometry(const RunConfig& cfg) {
  if (cfg.mode == "limited")
    return make_limited_geometry(cfg.n, cfg.limited_half_deg, cfg.limited_step_deg,
                                 cfg.n_bins);
  if (cfg.mode == "sparse") return make_half_turn_geometry(cfg.n, cfg.sparse_views, cfg.n_bins);
  if (cfg.mode == "full") return make_half_turn_geometry(cfg.n, cfg.full_views, cfg.n_bins);
  throw std::invalid_argument("unknown geometry mode: " + cfg.mode);
}

EllipsePhantom resolve_phantom(const RunConfig& cfg) {
  if (!cfg.phantom_file.empty()) return load_phantom(cfg.phantom_file);
  if (cfg.preset == "thorax") return thorax_phantom();
  throw std::invalid_argument("unknown phantom preset: " + cfg.preset);
}

const WindowBank& make_bank(const RunConfig& cfg, const Geometry& geo) {
  // Resolve wedge adaptation.
  std::vector<std::uint8_t> all(geo.angles.size(), 1);
  bool adapted = false;
  double phi = 0.0;
  if (cfg.wedge_adapted == "on" || (cfg.wedge_adapted == "auto" && limited_range(geo, all))) {
    adapted = true;
    phi = cfg.wedge_deg > 0.0 ? cfg.wedge_deg * std::numbers::pi / 180.0
                              : infer_wedge_half_angle(geo, all);
  } else if (cfg.wedge_adapted != "off" && cfg.wedge_adapted != "auto" &&
             cfg.wedge_adapted != "on") {
    throw std::invalid_argument("wedge_adapted must be auto|on|off");
  }

  BankKey key{cfg.n, cfg.scales, cfg.wedges, cfg.nu, adapted,
              static_cast<long>(std::lround(phi * 180.0 / std::numbers::pi * 1000.0))};
  std::lock_guard<std::mutex> lock(g_bank_mutex);
  auto it = g_bank_cache.find(key);
  if (it != g_bank_cache.end()) return it->second;

  WindowSpec spec;
  spec.nu = parse_nu(cfg.nu);
  spec.scales = cfg.scales;
  spec.wedges_per_scale = parse_int_list(cfg.wedges);
  WindowBank bank;
  if (adapted) {
    spec.wedge_half_angle = phi;
    bank = build_wedge_adapted_bank(cfg.n, spec);
  } else {
    bank = build_window_bank(cfg.n, spec);
  }
  return g_bank_cache.emplace(key, std::move(bank)).first->second;
}

double op_norm(const Geometry& geo, const std::vector<std::uint8_t>& mask, int n) {
  const std::string key = geometry_fingerprint(geo, mask, n);
  std::lock_guard<std::mutex> lock(g_norm_mutex);
  auto it = g_norm_cache.find(key);
  if (it != g_norm_cache.end()) return it->second;
  const double norm = radon_op_norm(geo, mask, n, 30);
  return g_norm_cache.emplace(key, norm).first->second;
}

MethodOutput run_method(const RunConfig& cfg, const Sinogram& data) {
  MethodOutput out;
  if (cfg.method == "fbp") {
    out.rec = fbp(data, cfg.n, cfg.fbp_cosine);
    return out;
  }
  const SolverConfig sc = solver_config(cfg, data);
  if (cfg.method == "tv") {
    auto r = reconstruct_tv(data, sc, cfg.n);
    out.rec = std::move(r.u);
    out.report = std::move(r.report);
    return out;
  }
  const WindowBank& bank = make_bank(cfg, data.geo);
  if (cfg.method == "l1") {
    auto r = reconstruct_l1_synthesis(data, bank, sc);
    out.rec = std::move(r.u);
    out.report = std::move(r.report);
    return out;
  }
  if (cfg.method == "hybrid") {
    auto r = reconstruct_hybrid(data, bank, sc);
    out.rec = std::move(r.u);
    out.report = std::move(r.report);
    return out;
  }
  if (cfg.method == "bb") {
    auto r = reconstruct_bb(data, bank, sc);
    out.rec = std::move(r.u);
    out.report = std::move(r.report);
    return out;
  }
  if (cfg.method == "complementary") {
    auto r = reconstruct_complementary(data, bank, sc);
    out.rec = std::move(r.u);
    out.aux = std::move(r.aux);
    out.has_aux = true;
    out.report = std::move(r.report);
    return out;
  }
  throw std::invalid_argument("unknown method: " + cfg.method);
}

void append_metrics_csv(const std::filesystem::path& path, const MetricsRow& row) {
  const bool fresh = !fs::exists(path);
  std::ofstream f(path, std::ios::app);
  if (!f) throw std::runtime_error("cannot open metrics csv " + path.string());
  f.precision(10);
  if (fresh) f << "method,photons,rel_l2,psnr,ssim,seconds\n";
  f << row.method << "," << row.photons << "," << row.rel_l2 << "," << row.psnr << ","
    << row.ssim << "," << row.seconds << "\n";
}

int cmd_phantom(const RunConfig& cfg) {
  const fs::path dir = resolve_out_dir(cfg, "phantom");
  echo_config(cfg, dir);
  const EllipsePhantom ph = resolve_phantom(cfg);
  const Image img = rasterize(ph, cfg.n);
  write_image_outputs(dir, "phantom", img);
  save_phantom(dir / "phantom.txt", ph);
  std::cout << "phantom: " << (dir / "phantom.grd").string() << " (" << cfg.n << "x"
            << cfg.n << ")\n";
  return kExitOk;
}

int cmd_project(const RunConfig& cfg) {
  if (!(cfg.photons >= 1.0))
    throw std::invalid_argument("project: photons must be >= 1");
  const fs::path dir = resolve_out_dir(cfg, "project");
  echo_config(cfg, dir);
  Image img;
  if (!cfg.phantom_grd.empty()) {
    img = read_raster(cfg.phantom_grd);
    if (img.n != cfg.n)
      throw std::invalid_argument("project: phantom raster size != configured n");
  } else {
    img = rasterize(resolve_phantom(cfg), cfg.n);
    write_image_outputs(dir, "phantom", img);
  }
  const Geometry geo = make_geometry(cfg);
  const Sinogram clean = radon_forward(img, geo);
  write_sinogram(dir / "sino_clean", clean);

  NoiseConfig nc;
  nc.photons = cfg.photons;
  nc.attenuation_scale = cfg.noise_scale;
  nc.seed = cfg.seed;
  const NoiseResult noisy = apply_poisson_noise(clean, nc);
  write_sinogram(dir / "sino_noisy", noisy.sino);
  std::cout << "project: " << clean.geo.n_angles() << " angles x " << clean.geo.n_bins
            << " bins; noise scale " << noisy.scale_used << ", clamped bins "
            << noisy.clamp_count << "\n";
  return kExitOk;
}

int cmd_reconstruct(const RunConfig& cfg) {
  if (cfg.sino.empty()) throw std::invalid_argument("reconstruct: --sino is required");
  const fs::path dir = resolve_out_dir(cfg, "reconstruct");
  echo_config(cfg, dir);
  Sinogram data = read_sinogram(cfg.sino);
  if (data.geo.n_bins < 2) throw std::invalid_argument("reconstruct: bad sinogram");

  const auto t0 = std::chrono::steady_clock::now();
  MethodOutput out = run_method(cfg, data);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  write_image_outputs(dir, "rec", out.rec);
  if (out.has_aux) write_image_outputs(dir, "aux", out.aux);
  if (!out.report.objective.empty()) out.report.write_csv(dir / "report.csv");

  if (!cfg.truth.empty()) {
    const Image truth = read_raster(cfg.truth);
    MetricsRow row{cfg.method, cfg.photons, rel_l2(out.rec, truth),
                   psnr(out.rec, truth), ssim(out.rec, truth), secs};
    append_metrics_csv(dir / "metrics.csv", row);
    std::cout << "reconstruct[" << cfg.method << "]: rel_l2=" << row.rel_l2
              << " psnr=" << row.psnr << " ssim=" << row.ssim << "\n";
  } else {
    std::cout << "reconstruct[" << cfg.method << "]: done (no truth, metrics skipped)\n";
  }
  return kExitOk;
}

int cmd_sweep(RunConfig cfg, const std::string& param, const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("sweep: empty grid");
  if (cfg.sino.empty() || cfg.truth.empty())
    throw std::invalid_argument("sweep: --sino and --truth are required");
  const fs::path dir = resolve_out_dir(cfg, "sweep");
  echo_config(cfg, dir);
  const Sinogram data = read_sinogram(cfg.sino);
  const Image truth = read_raster(cfg.truth);

  auto set_param = [&](RunConfig& c, double value) {
    if (param == "alpha") c.alpha = value;
    else if (param == "beta") c.beta = value;
    else if (param == "mu") c.mu = value;
    else throw std::invalid_argument("sweep: unknown parameter " + param);
  };

  // The complementary protocol sweeps alpha on the theta update alone and
  // beta on the first u update (with alpha fixed); the outer iterations are
  // then run once with the chosen values.
  const bool complementary_stagewise =
      cfg.method == "complementary" && (param == "alpha" || param == "beta");

  std::ofstream csv(dir / "sweep.csv");
  csv.precision(10);
  csv << "param,value,rel_l2,psnr,ssim\n";

  double best_val = grid.front();
  double best_err = std::numeric_limits<double>::infinity();
  Image best_rec;
  for (double value : grid) {
    RunConfig c = cfg;
    set_param(c, value);
    if (complementary_stagewise) {
      c.outer_iters = 1;
      if (param == "alpha") c.beta = 0.0;  // evaluate the noise-suppressing stage
    }
    Sinogram d = data;
    MethodOutput out = run_method(c, d);
    const Image& scored = (complementary_stagewise && param == "alpha") ? out.aux : out.rec;
    const double err = rel_l2(scored, truth);
    csv << param << "," << value << "," << err << "," << psnr(scored, truth) << ","
        << ssim(scored, truth) << "\n";
    std::cout << "sweep " << param << "=" << value << " rel_l2=" << err << "\n";
    if (err < best_err) {
      best_err = err;
      best_val = value;
      best_rec = scored;
    }
  }
  if (best_rec.n > 0) write_image_outputs(dir, "best", best_rec);
  std::ofstream bf(dir / "best.txt");
  bf.precision(17);
  bf << param << "=" << best_val << "\nrel_l2=" << best_err << "\n";
  if (grid.size() > 1 && (best_val == grid.front() || best_val == grid.back()))
    std::cerr << "sweep: warning: best " << param << " sits on the grid boundary ("
              << best_val << "); widen the grid\n";
  std::cout << "sweep: best " << param << "=" << best_val << " rel_l2=" << best_err
            << "\n";
  return kExitOk;
}

int cmd_table(const std::string& dir, const std::string& out_csv) {
  std::vector<MetricsRow> rows;
  if (fs::exists(dir)) {
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
      if (!e.is_regular_file() || e.path().filename() != "metrics.csv") continue;
      std::ifstream f(e.path());
      std::string line;
      std::getline(f, line);  // header
      while (std::getline(f, line)) {
        std::stringstream ss(line);
        MetricsRow r;
        std::string tok;
        std::getline(ss, r.method, ',');
        std::getline(ss, tok, ',');
        r.photons = std::stod(tok);
        std::getline(ss, tok, ',');
        r.rel_l2 = std::stod(tok);
        std::getline(ss, tok, ',');
        r.psnr = std::stod(tok);
        std::getline(ss, tok, ',');
        r.ssim = std::stod(tok);
        if (std::getline(ss, tok, ',')) r.seconds = std::stod(tok);
        rows.push_back(r);
      }
    }
  }
  std::sort(rows.begin(), rows.end(), [](const MetricsRow& a, const MetricsRow& b) {
    if (a.photons != b.photons) return a.photons > b.photons;
    return a.method < b.method;
  });

  // Missing combinations: every method seen should appear at every photon level.
  std::vector<std::string> methods;
  std::vector<double> levels;
  for (const auto& r : rows) {
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end())
      methods.push_back(r.method);
    if (std::find(levels.begin(), levels.end(), r.photons) == levels.end())
      levels.push_back(r.photons);
  }
  for (double p : levels)
    for (const auto& m : methods) {
      const bool present = std::any_of(rows.begin(), rows.end(), [&](const MetricsRow& r) {
        return r.method == m && r.photons == p;
      });
      if (!present)
        std::cerr << "table: warning: missing run method=" << m << " photons=" << p
                  << "\n";
    }
  if (rows.empty()) std::cerr << "table: warning: no metrics found under " << dir << "\n";

  std::ofstream f(out_csv);
  if (!f) throw std::runtime_error("table: cannot open " + out_csv);
  f.precision(10);
  f << "photons,method,rel_l2,psnr,ssim,best_rel_l2,best_psnr,best_ssim\n";
  for (double p : levels) {
    std::size_t best_e = rows.size(), best_p = rows.size(), best_s = rows.size();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].photons != p) continue;
      if (best_e == rows.size() || rows[i].rel_l2 < rows[best_e].rel_l2) best_e = i;
      if (best_p == rows.size() || rows[i].psnr > rows[best_p].psnr) best_p = i;
      if (best_s == rows.size() || rows[i].ssim > rows[best_s].ssim) best_s = i;
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].photons != p) continue;
      f << rows[i].photons << "," << rows[i].method << "," << rows[i].rel_l2 << ","
        << rows[i].psnr << "," << rows[i].ssim << "," << (i == best_e ? 1 : 0) << ","
        << (i == best_p ? 1 : 0) << "," << (i == best_s ? 1 : 0) << "\n";
    }
  }
  std::cout << "table: " << rows.size() << " rows -> " << out_csv << "\n";
  return kExitOk;
}

int cmd_check(const RunConfig& cfg, const std::string& dump_bank_dir) {
  const int n = cfg.n;
  int failures = 0;
  auto report = [&](const std::string& name, bool ok, double value, double bound) {
    std::cout << (ok ? "[pass] " : "[FAIL] ") << name << " (" << value
              << (ok ? " <= " : " > ") << bound << ")\n";
    if (!ok) ++failures;
  };
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  auto random_image = [&](int sz) {
    Image img(sz);
    for (auto& x : img.v) x = unif(rng);
    return img;
  };

  std::cout << "simd: " << kernels::active_isa() << "\n";

  {  // fft roundtrip + Parseval
    const Image u = random_image(n);
    const Spectrum s = fft2(u);
    const Image back = ifft2(s);
    double err = 0.0, nrm = 0.0, pu = 0.0, ps = 0.0;
    for (std::size_t i = 0; i < u.v.size(); ++i) {
      err += (back.v[i] - u.v[i]) * (back.v[i] - u.v[i]);
      nrm += u.v[i] * u.v[i];
      pu += u.v[i] * u.v[i];
      ps += std::norm(s.v[i]);
    }
    report("fft roundtrip", std::sqrt(err / nrm) <= 1e-12, std::sqrt(err / nrm), 1e-12);
    const double pars = std::fabs(std::sqrt(pu) - std::sqrt(ps)) / std::sqrt(pu);
    report("parseval", pars <= 1e-12, pars, 1e-12);
  }

  {  // radon adjoint identity
    const Geometry geo = make_half_turn_geometry(n, std::max(12, n / 4));
    const Image u = random_image(n);
    Sinogram v(geo);
    for (auto& x : v.v) x = unif(rng);
    const Sinogram ku = radon_forward(u, geo);
    const Image ktv = radon_adjoint(v, n);
    double lhs = 0.0, nku = 0.0, nv = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < ku.v.size(); ++i) {
      lhs += ku.v[i] * v.v[i];
      nku += ku.v[i] * ku.v[i];
      nv += v.v[i] * v.v[i];
    }
    for (std::size_t i = 0; i < u.v.size(); ++i) rhs += u.v[i] * ktv.v[i];
    const double dev = std::fabs(lhs - rhs) / (std::sqrt(nku) * std::sqrt(nv));
    report("radon adjoint", dev <= 1e-6, dev, 1e-6);
  }

  {  // grad/div adjoint
    const Image u = random_image(n);
    VectorField p(n);
    for (auto& x : p.x) x = unif(rng);
    for (auto& x : p.y) x = unif(rng);
    const VectorField gu = grad(u);
    const Image dp = div(p);
    double lhs = 0.0, rhs = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < gu.x.size(); ++i) {
      lhs += gu.x[i] * p.x[i] + gu.y[i] * p.y[i];
      scale += gu.x[i] * gu.x[i] + gu.y[i] * gu.y[i];
    }
    for (std::size_t i = 0; i < u.v.size(); ++i) rhs -= u.v[i] * dp.v[i];
    const double dev = std::fabs(lhs - rhs) / std::max(1.0, std::sqrt(scale));
    report("grad/div adjoint", dev <= 1e-12, dev, 1e-12);
  }

  for (int adapted = 0; adapted < 2; ++adapted) {  // frame partition + tightness
    WindowSpec spec;
    spec.scales = n >= 128 ? 4 : 3;
    WindowBank bank;
    if (adapted) {
      spec.wedge_half_angle = 65.0 * std::numbers::pi / 180.0;
      bank = build_wedge_adapted_bank(n, spec);
    } else {
      bank = build_window_bank(n, spec);
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < bank.plane_size(); ++i) {
      double s = 0.0;
      for (std::size_t p = 0; p < bank.planes(); ++p) {
        const double w = bank.plane(p)[i];
        s += w * w;
      }
      worst = std::max(worst, std::fabs(s - 1.0));
    }
    const std::string tag = adapted ? "adapted" : "standard";
    report("partition of unity (" + tag + ")", worst <= 1e-10, worst, 1e-10);

    const Image u = random_image(n);
    const Image rt = synthesis(analysis(u, bank), bank);
    double err = 0.0, nrm = 0.0;
    for (std::size_t i = 0; i < u.v.size(); ++i) {
      err += (rt.v[i] - u.v[i]) * (rt.v[i] - u.v[i]);
      nrm += u.v[i] * u.v[i];
    }
    const double dev = std::sqrt(err / nrm);
    report("frame roundtrip (" + tag + ")", dev <= 1e-10, dev, 1e-10);

    if (adapted && !dump_bank_dir.empty()) export_window_bank(bank, dump_bank_dir);
  }

  {  // simd equivalence spot check
    std::vector<double> a(1003), b(1003), c1(1003), c2(1003);
    for (auto& x : a) x = unif(rng);
    for (auto& x : b) x = unif(rng);
    const auto& S = kernels::scalar_table();
    const auto* V = kernels::avx2_table();
    double worst = 0.0;
    if (V) {
      S.soft_threshold(a.size(), 0.3, a.data(), c1.data());
      V->soft_threshold(a.size(), 0.3, a.data(), c2.data());
      for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::fabs(c1[i] - c2[i]));
      const double d1 = S.dot(a.size(), a.data(), b.data());
      const double d2 = V->dot(a.size(), a.data(), b.data());
      worst = std::max(worst, std::fabs(d1 - d2) / std::max(1.0, std::fabs(d1)));
    }
    report("simd equivalence", worst <= 1e-13, worst, 1e-13);
  }

  if (failures == 0) {
    std::cout << "check: all invariants hold at n=" << n << "\n";
    return kExitOk;
  }
  std::cout << "check: " << failures << " failure(s)\n";
  return kExitRuntime;
}

}  // namespace tomo::cli
