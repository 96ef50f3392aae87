#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tomo/io.hpp"
#include "tomo/radon.hpp"

namespace fs = std::filesystem;

namespace {

std::string bin() {
  const char* b = std::getenv("TOMO_BIN");
  REQUIRE_MESSAGE(b != nullptr, "TOMO_BIN must point at the tomo binary");
  return b;
}

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + bin() + " " + args +
                          " >/dev/null 2>@/dev/null";
  // ^ keep stderr visible on failure investigations; silence by default
  const std::string real_cmd =
      env + (env.empty() ? "" : " ") + bin() + " " + args + " >/dev/null 2>/dev/null";
  (void)cmd;
  const int rc = std::system(real_cmd.c_str());
  return WEXITSTATUS(rc);
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("tomo_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE_MESSAGE(f.good(), ("missing file: " + p.string()).c_str());
  return std::string((std::istreambuf_iterator<char>(f)),
                     std::istreambuf_iterator<char>());
}

std::vector<std::string> csv_lines(const fs::path& p) {
  std::vector<std::string> out;
  std::stringstream ss(slurp(p));
  std::string line;
  while (std::getline(ss, line))
    if (!line.empty()) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("phantom command") {
  const fs::path dir = fresh_dir("phantom");
  CHECK(run("phantom -n 64 -o " + (dir / "run").string()) == 0);
  const tomo::Image img = tomo::read_raster(dir / "run" / "phantom.grd");
  CHECK(img.n == 64);
  double lo = 1e9, hi = -1e9;
  for (double x : img.v) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  CHECK(lo >= 0.0);
  CHECK(hi <= 1.0);
  CHECK(fs::exists(dir / "run" / "phantom.png"));
  CHECK(fs::exists(dir / "run" / "config.txt"));

  CHECK(run("phantom -n 64 --preset no_such_preset -o " + (dir / "x").string()) == 1);
}

TEST_CASE("project command writes masked noisy data with sidecars") {
  const fs::path dir = fresh_dir("project");
  CHECK(run("project -n 64 --mode limited --photons 1e4 --seed 5 -o " +
            (dir / "lim").string()) == 0);
  const tomo::Sinogram lim = tomo::read_sinogram(dir / "lim" / "sino_noisy");
  CHECK(lim.geo.n_angles() == 130);  // one-degree steps over 130 degrees
  CHECK(lim.n_measured() == 130);

  CHECK(run("project -n 64 --mode sparse --views 50 --photons 1e4 -o " +
            (dir / "sp").string()) == 0);
  const tomo::Sinogram sp = tomo::read_sinogram(dir / "sp" / "sino_clean");
  CHECK(sp.geo.n_angles() == 50);
  CHECK(sp.n_measured() == 50);
  CHECK(sp.geo.angles.front() == doctest::Approx(-1.5707963268).epsilon(1e-9));

  CHECK(run("project -n 64 --photons 0 -o " + (dir / "bad").string()) == 1);
}

TEST_CASE("fbp reconstruction on clean full data meets the baseline") {
  const fs::path dir = fresh_dir("fbp");
  REQUIRE(run("project -n 256 --mode full --full-views 360 --photons 1e6 -o " +
              (dir / "data").string()) == 0);
  REQUIRE(run("reconstruct --method fbp -n 256 --photons 1e6 --sino " +
              (dir / "data" / "sino_clean").string() + " --truth " +
              (dir / "data" / "phantom.grd").string() + " -o " +
              (dir / "rec").string()) == 0);
  const auto lines = csv_lines(dir / "rec" / "metrics.csv");
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == "method,photons,rel_l2,psnr,ssim,seconds");
  std::stringstream ss(lines[1]);
  std::string method, tok;
  std::getline(ss, method, ',');
  CHECK(method == "fbp");
  std::getline(ss, tok, ',');  // photons
  std::getline(ss, tok, ',');  // rel_l2
  CHECK(std::stod(tok) <= 0.05);

  CHECK(run("reconstruct --method no_such -n 64 --sino " +
            (dir / "data" / "sino_clean").string() + " -o " + (dir / "x").string()) == 1);
}

TEST_CASE("complementary with mu=0 and N=1 degenerates to l1") {
  const fs::path dir = fresh_dir("degenerate");
  REQUIRE(run("project -n 64 --mode limited --photons 1e4 --seed 2 -o " +
              (dir / "data").string()) == 0);
  const std::string common =
      " -n 64 --photons 1e4 --alpha 3e-4 --inner-l1 25 --scales 3 --sino " +
      (dir / "data" / "sino_noisy").string() + " --truth " +
      (dir / "data" / "phantom.grd").string();
  REQUIRE(run("reconstruct --method complementary --mu 0 --outer 1" + common + " -o " +
              (dir / "comp").string()) == 0);
  REQUIRE(run("reconstruct --method l1" + common + " -o " + (dir / "l1").string()) == 0);

  auto metrics = [&](const fs::path& p) {
    const auto lines = csv_lines(p / "metrics.csv");
    REQUIRE(lines.size() == 2);
    std::stringstream ss(lines[1]);
    std::string tok;
    std::getline(ss, tok, ',');  // method
    std::getline(ss, tok, ',');  // photons
    std::vector<double> vals;
    while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
    return vals;  // rel_l2, psnr, ssim, seconds
  };
  const auto a = metrics(dir / "comp");
  const auto b = metrics(dir / "l1");
  for (int i = 0; i < 3; ++i)
    CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-6));
}

TEST_CASE("runs are reproducible byte for byte") {
  const fs::path dir = fresh_dir("determinism");
  REQUIRE(run("project -n 64 --mode limited --photons 1e3 --seed 9 -o " +
              (dir / "d1").string()) == 0);
  REQUIRE(run("project -n 64 --mode limited --photons 1e3 --seed 9 -o " +
              (dir / "d2").string()) == 0);
  CHECK(slurp(dir / "d1" / "sino_noisy.grd") == slurp(dir / "d2" / "sino_noisy.grd"));

  const std::string rec_args =
      "reconstruct --method tv -n 64 --photons 1e3 --beta 4e-4 --inner-tv 40 --sino " +
      (dir / "d1" / "sino_noisy").string() + " --truth " +
      (dir / "d1" / "phantom.grd").string();
  REQUIRE(run(rec_args + " -o " + (dir / "r1").string()) == 0);
  REQUIRE(run(rec_args + " -o " + (dir / "r2").string()) == 0);
  CHECK(slurp(dir / "r1" / "rec.grd") == slurp(dir / "r2" / "rec.grd"));
  CHECK(slurp(dir / "r1" / "report.csv") == slurp(dir / "r2" / "report.csv"));
  // metrics identical except the wall-time column
  auto strip_seconds = [&](const fs::path& p) {
    auto lines = csv_lines(p);
    for (auto& l : lines) l = l.substr(0, l.rfind(','));
    return lines;
  };
  CHECK(strip_seconds(dir / "r1" / "metrics.csv") ==
        strip_seconds(dir / "r2" / "metrics.csv"));

  SUBCASE("config echo reproduces the run") {
    REQUIRE(run("reconstruct --config " + (dir / "r1" / "config.txt").string() + " -o " +
                (dir / "r3").string()) == 0);
    CHECK(slurp(dir / "r1" / "rec.grd") == slurp(dir / "r3" / "rec.grd"));
  }
}

TEST_CASE("sweep command") {
  const fs::path dir = fresh_dir("sweep");
  REQUIRE(run("project -n 64 --mode limited --photons 1e4 --seed 4 -o " +
              (dir / "data").string()) == 0);
  const std::string common = " --method tv -n 64 --photons 1e4 --inner-tv 30 --sino " +
                             (dir / "data" / "sino_noisy").string() + " --truth " +
                             (dir / "data" / "phantom.grd").string();

  SUBCASE("grid rows and boundary warning") {
    REQUIRE(run("sweep --param beta --grid 1e-5,1e-4,1e-3" + common + " -o " +
                (dir / "s3").string()) == 0);
    const auto lines = csv_lines(dir / "s3" / "sweep.csv");
    CHECK(lines.size() == 4);  // header + one row per grid point
    CHECK(fs::exists(dir / "s3" / "best.grd"));
  }

  SUBCASE("singleton grid matches a plain reconstruction") {
    REQUIRE(run("sweep --param beta --grid 2e-4" + common + " -o " +
                (dir / "s1").string()) == 0);
    REQUIRE(run("reconstruct --beta 2e-4" + common + " -o " + (dir / "r").string()) == 0);
    CHECK(slurp(dir / "s1" / "best.grd") == slurp(dir / "r" / "rec.grd"));
  }

  SUBCASE("empty grid is a usage error") {
    CHECK(run("sweep --param beta --grid \"\"" + common + " -o " +
              (dir / "sx").string()) == 1);
  }
}

TEST_CASE("table command aggregates and flags the best entries") {
  const fs::path dir = fresh_dir("table");
  REQUIRE(run("project -n 64 --mode limited --photons 1e3 --seed 6 -o " +
              (dir / "data").string()) == 0);
  const std::string common = " -n 64 --photons 1e3 --sino " +
                             (dir / "data" / "sino_noisy").string() + " --truth " +
                             (dir / "data" / "phantom.grd").string();
  REQUIRE(run("reconstruct --method fbp" + common + " -o " + (dir / "runs" / "fbp").string()) == 0);
  REQUIRE(run("reconstruct --method tv --beta 3e-4 --inner-tv 30" + common + " -o " +
              (dir / "runs" / "tv").string()) == 0);

  CHECK(run("table --dir " + (dir / "runs").string() + " --out " +
            (dir / "table.csv").string()) == 0);
  const auto lines = csv_lines(dir / "table.csv");
  REQUIRE(lines.size() == 3);  // header + 2 rows
  int best_rel = 0, best_psnr = 0, best_ssim = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::stringstream ss(lines[i]);
    std::string tok;
    std::vector<std::string> cells;
    while (std::getline(ss, tok, ',')) cells.push_back(tok);
    REQUIRE(cells.size() == 8);
    best_rel += cells[5] == "1";
    best_psnr += cells[6] == "1";
    best_ssim += cells[7] == "1";
  }
  CHECK(best_rel == 1);
  CHECK(best_psnr == 1);
  CHECK(best_ssim == 1);

  SUBCASE("empty directory yields a header-only table") {
    const fs::path empty = dir / "none";
    fs::create_directories(empty);
    CHECK(run("table --dir " + empty.string() + " --out " + (dir / "t2.csv").string()) ==
          0);
    CHECK(csv_lines(dir / "t2.csv").size() == 1);
  }
}

TEST_CASE("check command passes under both kernel tables") {
  CHECK(run("check -n 64") == 0);
  CHECK(run("check -n 64", "TOMO_SIMD=scalar") == 0);
}
