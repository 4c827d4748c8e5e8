#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "ergodic_lab/rng.hpp"

namespace ergodic::kuramoto {

constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Wraps an angle to [0, 2 pi).
double wrap_angle(double phi);

/// N phases on the torus with their coupling strength.
struct RotatorEnsemble {
  std::vector<double> phases;  // wrapped to [0, 2 pi)
  double coupling = 0.0;

  static RotatorEnsemble make(std::vector<double> phases, double coupling);
};

/// Order parameter R e^{i psi} = (1/N) sum e^{i phi_j}.
/// Returns (R, psi) with R in [0,1] and psi in [0, 2 pi).
std::pair<double, double> order_parameter(std::span<const double> phases);

/// Fixed-point function of the synchronized profiles,
/// Psi(x) = int cos(t) e^{x cos t} dt / int e^{x cos t} dt over the torus.
double psi_function(double x);

/// Unique nonnegative solution of r = Psi(2 K r): 0 for K <= 1, the
/// positive root for K > 1 (residual below 1e-10).
double solve_fixed_point(double K);

/// Normalized density exp(2 K r cos(theta - psi)) on a torus grid.
std::vector<double> stationary_profile(double K, double r, double psi,
                                       std::span<const double> grid);

/// Truncated Fourier density on the torus. The constant mode is fixed
/// to 1/(2 pi); a[k-1], b[k-1] are the cos(k theta), sin(k theta)
/// coefficients.
struct FourierDensity {
  std::vector<double> a;
  std::vector<double> b;

  int modes() const { return static_cast<int>(a.size()); }
  static FourierDensity uniform(int modes);
  double value_at(double theta) const;
};

/// Fourier coefficients of the stationary profile q_{psi, r} (computed
/// by trapezoid quadrature on a dense torus grid, spectrally accurate).
FourierDensity profile_coefficients(double K, double r, double psi, int modes);

/// L2 distance on the torus between two truncated densities (Parseval).
double l2_distance(const FourierDensity& p, const FourierDensity& q);

/// Spectrum of the linearized generator at the uniform state:
/// -(1-K)/2 with multiplicity 2, then -k^2/2 with multiplicity 2 for
/// k = 2..modes.
std::vector<std::pair<double, int>> linearized_spectrum_uniform(double K,
                                                                int modes);

/// Semi-implicit pseudo-spectral step of the mean-field Fokker-Planck
/// evolution. The interaction kernel has a single Fourier mode, so the
/// convolution term is exact given (a_1, b_1); the constant mode is
/// untouched (exact mass conservation).
void pde_step(FourierDensity& p, double K, double dt);

/// Evolves p0 over [0, T]; optional observer is called after every
/// recorded step (every `observe_every` steps, 0 disables).
FourierDensity solve_pde(
    const FourierDensity& p0, double K, double T, double dt,
    int observe_every = 0,
    const std::function<void(double, const FourierDensity&)>& observer = {});

using PhaseSampler = std::function<double(RngStream&)>;

/// iid sampler from the synchronized profile q_{psi, r} (rejection from
/// the uniform envelope).
PhaseSampler profile_sampler(double K, double r, double psi);

/// Euler-Maruyama for the rotator system; phases are kept unwrapped.
/// Drift is computed through the order parameter, O(N) per step.
/// Optional observer is called every observe_every steps with
/// (t, phases).
void evolve_rotators(
    std::vector<double>& phases, double K, double t_len, double dt,
    RngStream& rng, int observe_every = 0,
    const std::function<void(double, std::span<const double>)>& observer = {});

/// Circular W1 distance between an empirical phase cloud and the
/// profile q_{psi, r} (optimal rotation of the CDF difference).
double circular_w1_to_profile(std::span<const double> phases, double K,
                              double r, double psi, int n_grid = 256);

struct PhaseDiffusionResult {
  std::vector<double> tau;       // rescaled times
  std::vector<double> var_psi;   // Var(psi) across replicas at each tau
  double slope = 0.0;            // linear fit through the origin
  double r_squared = 0.0;
  int excluded = 0;              // replicas flagged for desynchronization
  double frac_near_manifold = 0.0;  // time fraction with circular W1 < 0.1
};

/// Timescale-N phase diffusion experiment: simulates to physical times
/// tau * N, extracts the unwrapped synchronization center, and fits
/// Var(psi) against tau.
PhaseDiffusionResult phase_diffusion_experiment(int N, double K, double tau_f,
                                                int n_replicas, double dt,
                                                int n_tau, std::uint64_t seed);

}  // namespace ergodic::kuramoto
