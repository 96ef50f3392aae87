#include "tomo/solvers.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>

#include "tomo/kernels.hpp"
#include "tomo/regularizers.hpp"

namespace tomo {
namespace {

using clock_type = std::chrono::steady_clock;
using RhsPtr = std::shared_ptr<const std::vector<double>>;

double elapsed(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// (1/2)||a - b||^2
double half_sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return 0.5 * s;
}

double l2_dist(const std::vector<double>& a, const std::vector<double>& b) {
  return std::sqrt(2.0 * half_sq_dist(a, b));
}

// sum_p |grad_p| / n^2 from a stacked (gx|gy) block output.
double tv_of_grad_block(const std::vector<double>& g, std::size_t npix) {
  double s = 0.0;
  for (std::size_t i = 0; i < npix; ++i)
    s += std::sqrt(g[i] * g[i] + g[npix + i] * g[npix + i]);
  return s / static_cast<double>(npix);
}

std::function<void(double*, double)> quad_dual_prox(double weight, RhsPtr rhs) {
  return [weight, rhs](double* y, double sigma) {
    kernels::active().quad_dual_prox(rhs->size(), 1.0 / (1.0 + sigma / weight), sigma,
                                     rhs->data(), y);
  };
}

// Operator factory bound to one data layout (geometry, mask, optional bank).
struct OpContext {
  const Geometry* geo = nullptr;
  const std::vector<std::uint8_t>* mask = nullptr;
  const WindowBank* bank = nullptr;
  int n = 0;

  std::size_t sino_dim() const {
    return geo->angles.size() * static_cast<std::size_t>(geo->n_bins);
  }
  std::size_t img_dim() const { return static_cast<std::size_t>(n) * n; }
  std::size_t coeff_dim() const { return bank->planes() * img_dim(); }

  CpBlock radon_block(double weight, RhsPtr rhs) const {
    CpBlock blk;
    blk.dim = sino_dim();
    blk.apply = [this](const double* in, double* out) {
      radon_forward_into(in, n, *geo, mask, out);
    };
    blk.adjoint = [this](const double* in, double* out) {
      radon_adjoint_into(in, *geo, mask, n, out);
    };
    blk.dual_prox = quad_dual_prox(weight, std::move(rhs));
    return blk;
  }

  CpBlock radon_synthesis_block(double weight, RhsPtr rhs) const {
    CpBlock blk;
    blk.dim = sino_dim();
    auto scratch = std::make_shared<std::vector<double>>(img_dim());
    blk.apply = [this, scratch](const double* in, double* out) {
      synthesis_into(in, *bank, scratch->data());
      radon_forward_into(scratch->data(), n, *geo, mask, out);
    };
    blk.adjoint = [this, scratch](const double* in, double* out) {
      radon_adjoint_into(in, *geo, mask, n, scratch->data());
      analysis_into(scratch->data(), *bank, out);
    };
    blk.dual_prox = quad_dual_prox(weight, std::move(rhs));
    return blk;
  }

  CpBlock synthesis_quad_block(double weight, RhsPtr rhs) const {
    CpBlock blk;
    blk.dim = img_dim();
    blk.apply = [this](const double* in, double* out) { synthesis_into(in, *bank, out); };
    blk.adjoint = [this](const double* in, double* out) { analysis_into(in, *bank, out); };
    blk.dual_prox = quad_dual_prox(weight, std::move(rhs));
    return blk;
  }

  CpBlock analysis_l1_block(double alpha) const {
    CpBlock blk;
    blk.dim = coeff_dim();
    const std::size_t dim = blk.dim;
    blk.apply = [this](const double* in, double* out) { analysis_into(in, *bank, out); };
    blk.adjoint = [this](const double* in, double* out) { synthesis_into(in, *bank, out); };
    blk.dual_prox = [alpha, dim](double* y, double) {
      kernels::active().clamp_abs(dim, alpha, y);
    };
    return blk;
  }

  CpBlock grad_block(double tv_weight) const {
    CpBlock blk;
    blk.dim = 2 * img_dim();
    const int nn = n;
    const std::size_t npix = img_dim();
    blk.apply = [nn, npix](const double* in, double* out) {
      grad_into(in, nn, out, out + npix);
    };
    blk.adjoint = [nn, npix](const double* in, double* out) {
      divneg_into(in, in + npix, nn, out);
    };
    const double radius = tv_weight / static_cast<double>(npix);
    blk.dual_prox = [radius, npix](double* y, double) {
      kernels::active().l21_project(npix, radius, y, y + npix);
    };
    return blk;
  }
};

// min_theta (w/2)||K synth(theta) - b||^2 + alpha||theta||_1 by CP,
// warm-started at the incoming theta. The residual column reports the
// distance to data_for_residual (the measured data, not the merged rhs).
void l1_synthesis_core(const OpContext& ctx, double weight, RhsPtr b,
                       RhsPtr data_for_residual, double alpha, int iters,
                       double l_radon, double step_ratio, std::vector<double>& theta,
                       SolveReport& report) {
  std::vector<CpBlock> blocks;
  blocks.push_back(ctx.radon_synthesis_block(weight, b));
  const std::size_t dim = ctx.coeff_dim();

  auto obj = [weight, alpha, b, dim](const double* x,
                                     const std::vector<std::vector<double>>& kx) {
    return weight * half_sq_dist(kx[0], *b) + alpha * kernels::active().asum(dim, x);
  };
  auto res = [data_for_residual](const std::vector<std::vector<double>>& kx) {
    return l2_dist(kx[0], *data_for_residual);
  };
  auto prox = [alpha, dim](double* x, double tau) {
    kernels::active().soft_threshold(dim, tau * alpha, x, x);
  };

  CpOptions opt;
  opt.iters = iters;
  opt.L = l_radon;  // tight frame: ||K o synth|| = ||K||
  opt.step_ratio = step_ratio;
  chambolle_pock(blocks, prox, obj, res, theta, opt, report);
}

// min_u (w/2)||K u - b||^2 + tv_weight*TV(u) + positivity, warm-started at u.
void tv_core(const OpContext& ctx, double weight, RhsPtr b, RhsPtr data_for_residual,
             double tv_weight, int iters, double l_radon, double step_ratio,
             std::vector<double>& u, SolveReport& report) {
  std::vector<CpBlock> blocks;
  blocks.push_back(ctx.radon_block(weight, b));
  blocks.push_back(ctx.grad_block(tv_weight));
  const std::size_t npix = ctx.img_dim();

  auto obj = [weight, tv_weight, b, npix](const double* x,
                                          const std::vector<std::vector<double>>& kx) {
    (void)x;
    return weight * half_sq_dist(kx[0], *b) + tv_weight * tv_of_grad_block(kx[1], npix);
  };
  auto res = [data_for_residual](const std::vector<std::vector<double>>& kx) {
    return l2_dist(kx[0], *data_for_residual);
  };
  auto prox = [npix](double* x, double) {
    kernels::active().clamp_min0(npix, x, x);
  };

  CpOptions opt;
  opt.iters = iters;
  opt.L = std::sqrt(l_radon * l_radon + 8.0);  // ||grad||^2 <= 8
  opt.step_ratio = step_ratio;
  chambolle_pock(blocks, prox, obj, res, u, opt, report);
}

// min_u tv_weight*TV(u) + (mu/2)||u - w||^2 (the proximal TV problem of the
// image-space-coupled second stage; no positivity, matching the BB display).
void rof_core(const OpContext& ctx, double mu, RhsPtr w_img, double tv_weight,
              int iters, double step_ratio, std::vector<double>& u,
              SolveReport& report) {
  std::vector<CpBlock> blocks;
  blocks.push_back(ctx.grad_block(tv_weight));
  const std::size_t npix = ctx.img_dim();

  // The subproblem has no radon block, so the residual column reports the
  // coupling fidelity ||u - w|| instead; computed in the objective pass and
  // stashed via a shared cell.
  auto last_fid = std::make_shared<double>(0.0);
  auto obj2 = [mu, tv_weight, w_img, npix, last_fid](
                  const double* x, const std::vector<std::vector<double>>& kx) {
    double q = 0.0;
    for (std::size_t i = 0; i < npix; ++i) {
      const double d = x[i] - (*w_img)[i];
      q += d * d;
    }
    *last_fid = std::sqrt(q);
    return tv_weight * tv_of_grad_block(kx[0], npix) + 0.5 * mu * q;
  };
  auto res2 = [last_fid](const std::vector<std::vector<double>>&) { return *last_fid; };
  auto prox = [mu, w_img, npix](double* x, double tau) {
    const double f = 1.0 / (1.0 + tau * mu);
    for (std::size_t i = 0; i < npix; ++i) x[i] = f * (x[i] + tau * mu * (*w_img)[i]);
  };

  CpOptions opt;
  opt.iters = iters;
  opt.L = std::sqrt(8.0) * 1.01;
  opt.step_ratio = step_ratio;
  chambolle_pock(blocks, prox, obj2, res2, u, opt, report);
}

Image image_from_flat(const std::vector<double>& x, int n) {
  Image img(n);
  img.v = x;
  return img;
}

}  // namespace

void SolveReport::write_csv(const std::filesystem::path& path) const {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("SolveReport: cannot open " + path.string());
  f.precision(17);
  f << "iteration,objective,residual\n";
  for (std::size_t i = 0; i < objective.size(); ++i)
    f << i << "," << objective[i] << "," << residual[i] << "\n";
}

double power_method(const LinearFn& apply, const LinearFn& apply_adjoint,
                    std::size_t dim_domain, std::size_t dim_codomain, int iters) {
  if (iters < 1) throw std::invalid_argument("power_method: iters must be >= 1");
  std::vector<double> x(dim_domain), y(dim_codomain), z(dim_domain);
  for (std::size_t i = 0; i < dim_domain; ++i)
    x[i] = static_cast<double>(splitmix64(0x9d2c5680ULL + i)) /
               static_cast<double>(std::numeric_limits<std::uint64_t>::max()) -
           0.5;
  const auto& K = kernels::active();
  double sigma = 0.0;
  for (int it = 0; it < iters; ++it) {
    const double xn = std::sqrt(K.nrm2sq(x.size(), x.data()));
    if (xn == 0.0) return 0.0;
    K.scale(x.size(), 1.0 / xn, x.data());
    apply(x.data(), y.data());
    sigma = std::sqrt(K.nrm2sq(y.size(), y.data()));
    apply_adjoint(y.data(), z.data());
    std::swap(x, z);
  }
  return sigma * 1.01;
}

void chambolle_pock(
    const std::vector<CpBlock>& blocks,
    const std::function<void(double* x, double tau)>& prox_g,
    const std::function<double(const double* x, const std::vector<std::vector<double>>& kx)>& objective,
    const std::function<double(const std::vector<std::vector<double>>& kx)>& residual,
    std::vector<double>& x, const CpOptions& opt, SolveReport& report) {
  if (opt.iters < 1) throw std::invalid_argument("chambolle_pock: iters must be >= 1");
  if (!(opt.L > 0.0)) throw std::invalid_argument("chambolle_pock: L must be positive");
  const double tau = opt.step_ratio / opt.L;
  const double sigma = 1.0 / (opt.step_ratio * opt.L);
  const auto& K = kernels::active();

  const std::size_t nb = blocks.size();
  std::vector<std::vector<double>> y(nb), kx(nb), kxbar(nb), kscratch(nb);
  for (std::size_t i = 0; i < nb; ++i) {
    y[i].assign(blocks[i].dim, 0.0);
    kx[i].assign(blocks[i].dim, 0.0);
    kxbar[i].assign(blocks[i].dim, 0.0);
    kscratch[i].assign(blocks[i].dim, 0.0);
    blocks[i].apply(x.data(), kx[i].data());
    kxbar[i] = kx[i];
  }
  std::vector<double> xnew(x.size()), adj_scratch(x.size());

  for (int it = 0; it < opt.iters; ++it) {
    for (std::size_t i = 0; i < nb; ++i) {
      K.axpy(y[i].size(), sigma, kxbar[i].data(), y[i].data());
      blocks[i].dual_prox(y[i].data(), sigma);
    }
    xnew = x;
    for (std::size_t i = 0; i < nb; ++i) {
      blocks[i].adjoint(y[i].data(), adj_scratch.data());
      K.axpy(xnew.size(), -tau, adj_scratch.data(), xnew.data());
    }
    prox_g(xnew.data(), tau);
    for (std::size_t i = 0; i < nb; ++i) {
      blocks[i].apply(xnew.data(), kscratch[i].data());
      K.extrapolate(kxbar[i].size(), kscratch[i].data(), kx[i].data(), kxbar[i].data());
      std::swap(kx[i], kscratch[i]);
    }
    std::swap(x, xnew);

    const double obj = objective(x.data(), kx);
    report.objective.push_back(obj);
    report.residual.push_back(residual(kx));
    if (!std::isfinite(obj))
      throw divergence_error("chambolle_pock: nonfinite objective at iteration " +
                             std::to_string(it));
  }
}

double radon_op_norm(const Geometry& geo, const std::vector<std::uint8_t>& mask, int n,
                     int iters) {
  const std::size_t sino_dim = geo.angles.size() * static_cast<std::size_t>(geo.n_bins);
  LinearFn fwd = [&geo, &mask, n](const double* in, double* out) {
    radon_forward_into(in, n, geo, &mask, out);
  };
  LinearFn adj = [&geo, &mask, n](const double* in, double* out) {
    radon_adjoint_into(in, geo, &mask, n, out);
  };
  return power_method(fwd, adj, static_cast<std::size_t>(n) * n, sino_dim, iters);
}

namespace {

double ensure_norm(const SolverConfig& cfg, const Sinogram& data, int n) {
  if (cfg.op_norm_hint > 0.0) return cfg.op_norm_hint;
  return radon_op_norm(data.geo, data.mask, n, 30);
}

void record_params(SolveReport& rep, const SolverConfig& cfg, double l_radon) {
  rep.params = {{"alpha", cfg.alpha},
                {"beta", cfg.beta},
                {"mu", cfg.mu},
                {"outer_iters", static_cast<double>(cfg.outer_iters)},
                {"inner_iters_l1", static_cast<double>(cfg.inner_iters_l1)},
                {"inner_iters_tv", static_cast<double>(cfg.inner_iters_tv)},
                {"beta_schedule", cfg.beta_schedule},
                {"op_norm", l_radon}};
}

}  // namespace

L1SynthesisResult reconstruct_l1_synthesis(const Sinogram& data, const WindowBank& bank,
                                           const SolverConfig& cfg) {
  if (!(cfg.alpha > 0.0))
    throw std::invalid_argument("reconstruct_l1_synthesis: alpha must be > 0");
  const auto t0 = clock_type::now();
  OpContext ctx{&data.geo, &data.mask, &bank, bank.n};
  const double l_radon = ensure_norm(cfg, data, bank.n);

  L1SynthesisResult out;
  std::vector<double> theta(ctx.coeff_dim(), 0.0);
  auto b = std::make_shared<const std::vector<double>>(data.v);
  l1_synthesis_core(ctx, 1.0, b, b, cfg.alpha, cfg.inner_iters_l1, l_radon,
                    cfg.step_ratio, theta, out.report);

  out.theta = FrameCoeffs(bank.n, bank.planes());
  out.theta.v = std::move(theta);
  out.u = Image(bank.n);
  synthesis_into(out.theta.v.data(), bank, out.u.v.data());
  record_params(out.report, cfg, l_radon);
  out.report.seconds = elapsed(t0);
  return out;
}

ImageResult reconstruct_tv(const Sinogram& data, const SolverConfig& cfg, int n) {
  if (!(cfg.beta > 0.0)) throw std::invalid_argument("reconstruct_tv: beta must be > 0");
  const auto t0 = clock_type::now();
  OpContext ctx{&data.geo, &data.mask, nullptr, n};
  const double l_radon = ensure_norm(cfg, data, n);

  ImageResult out;
  std::vector<double> u(ctx.img_dim(), 0.0);
  auto b = std::make_shared<const std::vector<double>>(data.v);
  tv_core(ctx, 1.0, b, b, cfg.beta, cfg.inner_iters_tv, l_radon, cfg.step_ratio, u,
          out.report);
  out.u = image_from_flat(u, n);
  record_params(out.report, cfg, l_radon);
  out.report.seconds = elapsed(t0);
  return out;
}

ImageResult reconstruct_hybrid(const Sinogram& data, const WindowBank& bank,
                               const SolverConfig& cfg) {
  if (cfg.alpha < 0.0 || cfg.beta < 0.0)
    throw std::invalid_argument("reconstruct_hybrid: weights must be >= 0");
  // Degenerate weights collapse to the corresponding single-regularizer
  // solver (identical code path, not just an equivalent problem).
  if (cfg.alpha == 0.0) {
    SolverConfig tv_cfg = cfg;
    tv_cfg.inner_iters_tv = cfg.inner_iters_tv;
    return reconstruct_tv(data, tv_cfg, bank.n);
  }
  const auto t0 = clock_type::now();
  OpContext ctx{&data.geo, &data.mask, &bank, bank.n};
  const double l_radon = ensure_norm(cfg, data, bank.n);
  const std::size_t npix = ctx.img_dim();

  std::vector<CpBlock> blocks;
  auto b = std::make_shared<const std::vector<double>>(data.v);
  blocks.push_back(ctx.radon_block(1.0, b));
  blocks.push_back(ctx.analysis_l1_block(cfg.alpha));
  const bool with_tv = cfg.beta > 0.0;
  if (with_tv) blocks.push_back(ctx.grad_block(cfg.beta));

  const double alpha = cfg.alpha;
  const double beta = cfg.beta;
  auto obj = [alpha, beta, with_tv, b, npix](const double* x,
                                             const std::vector<std::vector<double>>& kx) {
    (void)x;
    double s = half_sq_dist(kx[0], *b) +
               alpha * kernels::active().asum(kx[1].size(), kx[1].data());
    if (with_tv) s += beta * tv_of_grad_block(kx[2], npix);
    return s;
  };
  auto res = [b](const std::vector<std::vector<double>>& kx) {
    return l2_dist(kx[0], *b);
  };
  auto prox = [npix](double* x, double) { kernels::active().clamp_min0(npix, x, x); };

  CpOptions opt;
  opt.iters = cfg.inner_iters_tv;
  opt.L = std::sqrt(l_radon * l_radon + 1.0 + (with_tv ? 8.0 : 0.0));
  opt.step_ratio = cfg.step_ratio;

  ImageResult out;
  std::vector<double> u(npix, 0.0);
  chambolle_pock(blocks, prox, obj, res, u, opt, out.report);
  out.u = image_from_flat(u, bank.n);
  record_params(out.report, cfg, l_radon);
  out.report.seconds = elapsed(t0);
  return out;
}

ImageResult reconstruct_bb(const Sinogram& data, const WindowBank& bank,
                           const SolverConfig& cfg) {
  if (!(cfg.mu > 0.0)) throw std::invalid_argument("reconstruct_bb: mu must be > 0");
  if (!(cfg.alpha > 0.0)) throw std::invalid_argument("reconstruct_bb: alpha must be > 0");
  if (cfg.outer_iters < 1)
    throw std::invalid_argument("reconstruct_bb: outer_iters must be >= 1");
  const auto t0 = clock_type::now();
  OpContext ctx{&data.geo, &data.mask, &bank, bank.n};
  const double l_radon = ensure_norm(cfg, data, bank.n);
  const std::size_t npix = ctx.img_dim();
  const auto& K = kernels::active();

  ImageResult out;
  std::vector<double> theta(ctx.coeff_dim(), 0.0);
  std::vector<double> u(npix, 0.0);
  std::vector<double> w_img(npix, 0.0);
  auto v = std::make_shared<const std::vector<double>>(data.v);
  std::vector<double> sino_scratch(ctx.sino_dim());

  for (int n_out = 0; n_out < cfg.outer_iters; ++n_out) {
    // theta-step: data term plus image-space proximity to the current u.
    {
      std::vector<CpBlock> blocks;
      blocks.push_back(ctx.radon_synthesis_block(1.0, v));
      auto u_rhs = std::make_shared<const std::vector<double>>(u);
      blocks.push_back(ctx.synthesis_quad_block(cfg.mu, u_rhs));
      const double alpha = cfg.alpha;
      const double mu = cfg.mu;
      auto obj = [alpha, mu, v, u_rhs, &theta](const double* x,
                                               const std::vector<std::vector<double>>& kx) {
        (void)x;
        return half_sq_dist(kx[0], *v) + mu * half_sq_dist(kx[1], *u_rhs) +
               alpha * kernels::active().asum(theta.size(), theta.data());
      };
      auto res = [v](const std::vector<std::vector<double>>& kx) {
        return l2_dist(kx[0], *v);
      };
      const std::size_t dim = ctx.coeff_dim();
      auto prox = [alpha, dim](double* x, double tau) {
        kernels::active().soft_threshold(dim, tau * alpha, x, x);
      };
      CpOptions opt;
      opt.iters = cfg.inner_iters_l1;
      opt.L = std::sqrt(l_radon * l_radon + 1.0);
      opt.step_ratio = cfg.step_ratio;
      chambolle_pock(blocks, prox, obj, res, theta, opt, out.report);
    }
    synthesis_into(theta.data(), bank, w_img.data());

    // u-step: proximal TV of w (beta = 0 passes w through exactly).
    const double beta_n = cfg.beta * std::pow(cfg.beta_schedule, n_out);
    if (beta_n == 0.0) {
      u = w_img;
    } else {
      auto w_rhs = std::make_shared<const std::vector<double>>(w_img);
      rof_core(ctx, cfg.mu, w_rhs, beta_n, cfg.inner_iters_tv, cfg.step_ratio, u,
               out.report);
    }

    std::vector<double> diff(npix);
    for (std::size_t i = 0; i < npix; ++i) diff[i] = u[i] - w_img[i];
    radon_forward_into(diff.data(), bank.n, data.geo, &data.mask, sino_scratch.data());
    out.report.outer_coupling.push_back(
        std::sqrt(K.nrm2sq(sino_scratch.size(), sino_scratch.data())));
  }

  out.u = image_from_flat(u, bank.n);
  record_params(out.report, cfg, l_radon);
  out.report.seconds = elapsed(t0);
  return out;
}

ComplementaryResult reconstruct_complementary(const Sinogram& data,
                                              const WindowBank& bank,
                                              const SolverConfig& cfg) {
  if (!(cfg.alpha > 0.0))
    throw std::invalid_argument("reconstruct_complementary: alpha must be > 0");
  if (cfg.mu < 0.0 || cfg.beta < 0.0)
    throw std::invalid_argument("reconstruct_complementary: weights must be >= 0");
  if (cfg.outer_iters < 1)
    throw std::invalid_argument("reconstruct_complementary: outer_iters must be >= 1");
  const auto t0 = clock_type::now();
  OpContext ctx{&data.geo, &data.mask, &bank, bank.n};
  const double l_radon = ensure_norm(cfg, data, bank.n);
  const std::size_t npix = ctx.img_dim();
  const auto& K = kernels::active();

  ComplementaryResult out;
  std::vector<double> theta(ctx.coeff_dim(), 0.0);
  std::vector<double> u(npix, 0.0), aux(npix, 0.0), aux_prev(npix, 0.0);
  std::vector<double> sino_scratch(ctx.sino_dim());
  auto v = std::make_shared<const std::vector<double>>(data.v);

  for (int n_out = 0; n_out < cfg.outer_iters; ++n_out) {
    // theta-step: the data term and the data-proximity term share the
    // operator K∘synth, so they merge into one least-squares block with
    // weight (1+mu) and rhs (v + mu*K u_n)/(1+mu).
    RhsPtr b_eff;
    double w_eff;
    if (cfg.mu > 0.0) {
      radon_forward_into(u.data(), bank.n, data.geo, &data.mask, sino_scratch.data());
      auto merged = std::make_shared<std::vector<double>>(ctx.sino_dim());
      const double inv = 1.0 / (1.0 + cfg.mu);
      for (std::size_t i = 0; i < merged->size(); ++i)
        (*merged)[i] = ((*v)[i] + cfg.mu * sino_scratch[i]) * inv;
      b_eff = merged;
      w_eff = 1.0 + cfg.mu;
    } else {
      b_eff = v;
      w_eff = 1.0;
    }
    l1_synthesis_core(ctx, w_eff, b_eff, v, cfg.alpha, cfg.inner_iters_l1, l_radon,
                      cfg.step_ratio, theta, out.report);
    synthesis_into(theta.data(), bank, aux.data());

    // u-step against the fresh theta update (or the previous one when the
    // literal Jacobi reading is requested).
    const std::vector<double>& aux_used = cfg.jacobi_coupling ? aux_prev : aux;
    const double beta_n = cfg.beta * std::pow(cfg.beta_schedule, n_out);
    if (cfg.mu == 0.0) {
      u = aux;  // coupling removed: the method degenerates to l1-synthesis
    } else if (beta_n == 0.0) {
      kernels::active().clamp_min0(npix, aux_used.data(), u.data());
    } else {
      radon_forward_into(aux_used.data(), bank.n, data.geo, &data.mask,
                         sino_scratch.data());
      auto c = std::make_shared<const std::vector<double>>(sino_scratch);
      tv_core(ctx, cfg.mu, c, v, beta_n, cfg.inner_iters_tv, l_radon, cfg.step_ratio, u,
              out.report);
    }

    std::vector<double> diff(npix);
    for (std::size_t i = 0; i < npix; ++i) diff[i] = u[i] - aux[i];
    radon_forward_into(diff.data(), bank.n, data.geo, &data.mask, sino_scratch.data());
    out.report.outer_coupling.push_back(
        std::sqrt(K.nrm2sq(sino_scratch.size(), sino_scratch.data())));
    aux_prev = aux;
  }

  out.theta = FrameCoeffs(bank.n, bank.planes());
  out.theta.v = std::move(theta);
  out.u = image_from_flat(u, bank.n);
  out.aux = image_from_flat(aux, bank.n);
  record_params(out.report, cfg, l_radon);
  out.report.seconds = elapsed(t0);
  return out;
}

}  // namespace tomo
