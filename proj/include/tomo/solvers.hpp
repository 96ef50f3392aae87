#pragma once

#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tomo/frames.hpp"
#include "tomo/grid.hpp"
#include "tomo/radon.hpp"

// Generic Chambolle-Pock saddle-point solver and the reconstruction methods
// built on it: l1-curvelet synthesis, TV, hybrid l1-TV, backward-backward
// splitting with image-space coupling, and the complementary l1-TV scheme
// whose two stages are coupled through data proximity.

namespace tomo {

struct SolverConfig {
  double alpha = 0.0;          // l1 weight
  double beta = 0.0;           // TV weight
  double mu = 0.0;             // coupling weight
  int outer_iters = 10;        // two-stage methods
  int inner_iters_l1 = 200;
  int inner_iters_tv = 500;
  double beta_schedule = 2.0;  // beta(n) = beta_schedule^n * beta
  double step_ratio = 1.0;     // tau = step_ratio/L, sigma = 1/(step_ratio*L)
  double op_norm_hint = 0.0;   // ||K_Omega||; 0 = estimate internally
  bool jacobi_coupling = false;  // u-step reads the previous theta update
};

struct SolveReport {
  std::vector<double> objective;  // per inner iteration (concatenated stages)
  std::vector<double> residual;   // active stage's data-fidelity norm
  std::vector<double> outer_coupling;  // ||K(u_n - synth(theta_n))||, two-stage only
  double seconds = 0.0;
  std::vector<std::pair<std::string, double>> params;

  void write_csv(const std::filesystem::path& path) const;
};

class divergence_error : public std::runtime_error {
 public:
  explicit divergence_error(const std::string& what) : std::runtime_error(what) {}
};

using LinearFn = std::function<void(const double* in, double* out)>;

// Largest singular value via power iteration on A^T A from a fixed seeded
// start vector, inflated by 1% as a step-size safety margin.
double power_method(const LinearFn& apply, const LinearFn& apply_adjoint,
                    std::size_t dim_domain, std::size_t dim_codomain, int iters = 30);

// One dual block of the saddle-point problem min_x G(x) + sum_i F_i(K_i x).
struct CpBlock {
  std::size_t dim = 0;
  LinearFn apply;
  LinearFn adjoint;
  std::function<void(double* y, double sigma)> dual_prox;
};

struct CpOptions {
  int iters = 100;
  double L = 1.0;  // >= operator norm of the stacked blocks
  double step_ratio = 1.0;
};

// Standard primal-dual iteration with steps sigma*tau*L^2 = 1 and
// over-relaxation parameter 1. objective/residual are evaluated at each new
// primal iterate from the already-computed block outputs (no extra operator
// applications) and appended to the report. Throws divergence_error on a
// nonfinite objective. Returns with x holding the final primal iterate.
void chambolle_pock(
    const std::vector<CpBlock>& blocks,
    const std::function<void(double* x, double tau)>& prox_g,
    const std::function<double(const double* x, const std::vector<std::vector<double>>& kx)>& objective,
    const std::function<double(const std::vector<std::vector<double>>& kx)>& residual,
    std::vector<double>& x, const CpOptions& opt, SolveReport& report);

struct L1SynthesisResult {
  Image u;
  FrameCoeffs theta;
  SolveReport report;
};
L1SynthesisResult reconstruct_l1_synthesis(const Sinogram& data, const WindowBank& bank,
                                           const SolverConfig& cfg);

struct ImageResult {
  Image u;
  SolveReport report;
};
ImageResult reconstruct_tv(const Sinogram& data, const SolverConfig& cfg, int n);
ImageResult reconstruct_hybrid(const Sinogram& data, const WindowBank& bank,
                               const SolverConfig& cfg);
// Backward-backward baseline: same two stages as the complementary method but
// coupled in image space; the ablation partner for the data-proximity scheme.
ImageResult reconstruct_bb(const Sinogram& data, const WindowBank& bank,
                           const SolverConfig& cfg);

struct ComplementaryResult {
  Image u;     // primary reconstruction (TV stage)
  Image aux;   // noise-suppressed auxiliary reconstruction synth(theta)
  FrameCoeffs theta;
  SolveReport report;
};
ComplementaryResult reconstruct_complementary(const Sinogram& data,
                                              const WindowBank& bank,
                                              const SolverConfig& cfg);

// ||K_Omega|| for this data layout (power method unless hinted in cfg).
double radon_op_norm(const Geometry& geo, const std::vector<std::uint8_t>& mask, int n,
                     int iters = 30);

}  // namespace tomo
