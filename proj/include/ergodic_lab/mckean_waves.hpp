#pragma once

#include <functional>
#include <span>
#include <vector>

#include "ergodic_lab/metrics.hpp"
#include "ergodic_lab/rng.hpp"

namespace ergodic::waves {

/// Coefficients of the scalar advection-diffusion equation
/// dU = (1/2 A(U)'' - B(U)') dt, written through B (flux), b = B' and
/// sigma2 = A' >= 0 on [0,1].
struct FluxDiffusionSpec {
  std::function<double(double)> B;
  std::function<double(double)> b;
  std::function<double(double)> sigma2;
};

/// Shock speed s = (B(w+) - B(w-)) / (w+ - w-).
double rankine_hugoniot(const std::function<double(double)>& B, double w_minus,
                        double w_plus);

struct OleinikResult {
  bool admissible = false;
  double margin = 0.0;  // min over interior grid of B(u) - B(0) - s u
};

/// Entropy admissibility of the (w-, w+) = (0, 1) wave: the flux must
/// stay strictly above its chord at interior points.
OleinikResult check_oleinik(const std::function<double(double)>& B,
                            double w_minus = 0.0, double w_plus = 1.0,
                            int n_grid = 1001);

struct WaveProfile {
  metrics::GridCDF phi;
  double speed = 0.0;
  double q_flux = 0.0;  // B(w-) - s w-
};

/// Integrates the wave ODE phi' = 2 (B(phi) - s phi - q) / sigma2(phi)
/// from the anchor phi(0) = 1/2 in both directions, in logit
/// coordinates with step-doubling RK4. The grid must straddle 0.
WaveProfile solve_wave(const FluxDiffusionSpec& spec,
                       std::span<const double> x_grid);

struct MomentResult {
  bool finite = false;
  double value = 0.0;  // lower bound estimate when divergent
};

/// First-moment criterion: finiteness of
/// int_0^{1/2} u sigma2(u)/(B(u)-B(0)-su) du + the symmetric piece
/// near 1. Endpoint singularities handled by u = e^{-v} substitution.
MomentResult moment_condition(const FluxDiffusionSpec& spec,
                              double quad_tol = 1e-10);

/// Phase shift delta = int (u0 - phi) dx, exact trapezoid on the merged
/// grids, normalized so that int (u0(x) - phi(x + delta)) dx = 0.
double phase_shift_delta(const metrics::GridCDF& u0,
                         const metrics::GridCDF& phi);

using Sampler = std::function<double(RngStream&)>;

/// Sorted particle snapshots at the requested times.
struct ParticleTrajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> snapshots;
};

/// Euler-Maruyama for the rank-based system: particle j sees drift
/// b((rank_j - 1/2)/N) and diffusion sigma2 at the same argument, with
/// ranks recomputed every step. Noise for particle j comes from the
/// derived stream (seed, stream_ids[j]); permuting initial positions
/// together with stream_ids leaves the sorted snapshots bitwise
/// unchanged.
ParticleTrajectory simulate_ranked_from(const FluxDiffusionSpec& spec,
                                        std::vector<double> positions,
                                        std::span<const std::uint64_t> stream_ids,
                                        std::span<const double> record_times,
                                        double dt, std::uint64_t seed);

/// Convenience wrapper: initial positions drawn from `init`, identity
/// stream ids.
ParticleTrajectory simulate_ranked_particles(const FluxDiffusionSpec& spec,
                                             int N, const Sampler& init,
                                             std::span<const double> record_times,
                                             double dt, std::uint64_t seed);

struct WpTable {
  std::vector<double> times;
  std::vector<double> wp;
};

/// Runs two ranked systems under the order-statistics coupling (one
/// Gaussian draw per sorted slot per step, shared by both systems) and
/// reports W_p between the empirical laws at each recorded time.
WpTable check_contraction(const FluxDiffusionSpec& spec, const Sampler& u0,
                          const Sampler& v0, double p,
                          std::span<const double> t_grid, int N, double dt,
                          std::uint64_t seed);

/// Quantile-form dissipation of W_p^p between two solutions:
/// -(p(p-1)/2) int sigma2(w) |U-V|^{p-2} (U'-V')^2 / (U' V') dw,
/// with U, V the quantile functions of u, v. Derivatives are centered
/// differences of a kernel-smoothed quantile (width 2/n_quantiles).
double dissipation_rate(const metrics::GridCDF& u, const metrics::GridCDF& v,
                        const FluxDiffusionSpec& spec, double p,
                        int n_quantiles = 512);

struct ConvergenceTable {
  std::vector<double> times;
  std::vector<double> orders;
  std::vector<std::vector<double>> wq;  // wq[order][time]
  double delta = 0.0;                   // phase shift of the limit wave
  double delta_residual = 0.0;          // leftover CDF-difference integral
  double speed = 0.0;
  std::vector<double> delta_t;          // per-time expectation re-anchoring
};

/// Distance to the traveling wave with matched expectation, measured in
/// the moving frame: W_q(u_t, phi(. + delta - s t)) for each q.
ConvergenceTable convergence_to_wave(const FluxDiffusionSpec& spec,
                                     const Sampler& u0,
                                     std::span<const double> t_schedule, int N,
                                     double dt,
                                     std::span<const double> p_orders,
                                     std::uint64_t seed);

}  // namespace ergodic::waves
