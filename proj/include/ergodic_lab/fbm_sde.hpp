#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "ergodic_lab/rng.hpp"

namespace ergodic::fbm {

/// Equally spaced fractional Brownian path on [0, T], one value array
/// per coordinate, starting at 0.
struct FBMPath {
  double hurst;
  std::vector<double> times;                // size n_steps + 1, uniform
  std::vector<std::vector<double>> values;  // values[dim][i]
};

/// Exact-in-distribution fBm increment sampler for a fixed
/// (H, n_steps, T) triple. Uses circulant embedding of the increment
/// covariance; falls back to a dense Cholesky factor when the embedding
/// has negative eigenvalues.
class FbmGenerator {
 public:
  FbmGenerator(double hurst, int n_steps, double T);
  ~FbmGenerator();
  FbmGenerator(const FbmGenerator&) = delete;
  FbmGenerator& operator=(const FbmGenerator&) = delete;

  /// Fills `out` (size n_steps) with one draw of the increments.
  void sample_increments(RngStream& rng, std::span<double> out);

  FBMPath sample_path(int dim, RngStream& rng);

  bool used_cholesky() const { return use_cholesky_; }
  int n_steps() const { return n_; }
  double horizon() const { return T_; }
  double hurst() const { return hurst_; }

 private:
  struct FftState;
  double hurst_;
  int n_;
  double T_;
  bool use_cholesky_ = false;
  std::vector<double> sqrt_eigs_;  // circulant eigenvalue square roots
  std::vector<double> chol_;       // lower-triangular factor, row-major
  std::unique_ptr<FftState> fft_;
};

/// One-shot convenience wrapper around FbmGenerator.
FBMPath generate_fbm(double hurst, int n_steps, double T, int dim,
                     RngStream& rng);

/// Exact covariance Cov(B_s, B_t) = (s^{2H} + t^{2H} - |t-s|^{2H}) / 2.
double fbm_covariance(double hurst, double s, double t);

using Vec = std::vector<double>;
using Mat = std::vector<double>;  // row-major d x d

/// Drift and diffusion fields of dX = b(X) dt + sigma(X) dB.
struct FSDEModel {
  int dim;
  std::function<Vec(const Vec&)> drift;
  std::function<Mat(const Vec&)> diffusion;
};

/// Explicit Euler over the fBm path grid (Young regime, H > 1/2).
/// Throws std::runtime_error if the state exceeds the overflow guard
/// |X| > 1e8.
std::vector<Vec> integrate_fsde(const FSDEModel& model, const Vec& x0,
                                const FBMPath& path);

/// sup over grid pairs of |B_t - B_s| / (t-s)^theta on [a, b].
double holder_norm(std::span<const double> times, std::span<const double> values,
                   double theta, double a, double b);

/// Hoelder norm of a multi-coordinate path (euclidean increments).
double holder_norm(const FBMPath& path, double theta, double a, double b);

struct LyapunovSpec {
  std::function<double(const Vec&)> V;  // positive
  double r = 1.0;                       // exponent
  double theta = 0.6;                   // Hoelder index in (1/2, H)
};

struct LyapunovReport {
  bool feasible = false;
  double rho_hat = 0.0;
  double c_hat = 0.0;
  double violation_rate = 0.0;
};

/// Empirical check of the one-step contraction
/// V^r(X_1) <= rho V^r(x) + C (1 + ||B||_theta) on a radial grid of
/// starting points. Infeasibility (no rho < 1 bounding the envelope) is
/// reported, not thrown.
LyapunovReport check_lyapunov_contraction(const FSDEModel& model,
                                          const LyapunovSpec& spec,
                                          double hurst, int n_paths,
                                          int n_steps, double max_radius,
                                          RngStream& rng);

/// Planar drift b(z) = -z - rho cos(theta_z) z_perp, with b(0) = 0.
std::function<Vec(const Vec&)> rotation_drift(double rho);

/// Memory operator quadrature:
/// integral over the support of g of t^{1/2-H} (T-s)^{H-1/2} / (t+T-s) g(s) ds,
/// g supported in [-support_len, 0]. Adaptive Simpson, abs tol 1e-10.
double evaluate_RT(const std::function<double(double)>& g, double support_len,
                   double T, double t, double hurst);

}  // namespace ergodic::fbm
