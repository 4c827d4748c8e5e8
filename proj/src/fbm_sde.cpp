#include "ergodic_lab/fbm_sde.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>
#include <stdexcept>

namespace ergodic::fbm {

namespace {

std::mutex fftw_plan_mutex;  // FFTW planning is not thread-safe

// autocovariance of unit-spaced fBm increments at lag k, scaled by dt^{2H}
double increment_cov(double hurst, int k, double dt_pow) {
  const double a = std::pow(std::abs(k + 1), 2.0 * hurst);
  const double b = std::pow(std::abs(k), 2.0 * hurst);
  const double c = std::pow(std::abs(k - 1), 2.0 * hurst);
  return 0.5 * (a - 2.0 * b + c) * dt_pow;
}

}  // namespace

struct FbmGenerator::FftState {
  int m = 0;
  fftw_complex* in = nullptr;
  fftw_complex* out = nullptr;
  fftw_plan plan = nullptr;

  explicit FftState(int m_) : m(m_) {
    in = fftw_alloc_complex(m);
    out = fftw_alloc_complex(m);
    std::lock_guard<std::mutex> lock(fftw_plan_mutex);
    plan = fftw_plan_dft_1d(m, in, out, FFTW_FORWARD, FFTW_ESTIMATE);
  }

  ~FftState() {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex);
    fftw_destroy_plan(plan);
    fftw_free(in);
    fftw_free(out);
  }
};

FbmGenerator::FbmGenerator(double hurst, int n_steps, double T)
    : hurst_(hurst), n_(n_steps), T_(T) {
  if (!(hurst > 0.0 && hurst < 1.0))
    throw std::invalid_argument("FbmGenerator: hurst must lie in (0,1)");
  if (n_steps < 2) throw std::invalid_argument("FbmGenerator: n_steps >= 2");
  const double dt_pow = std::pow(T / n_steps, 2.0 * hurst);
  const int m = 2 * n_;
  fft_ = std::make_unique<FftState>(m);

  // circulant embedding of the increment covariance row
  for (int j = 0; j < m; ++j) {
    const int lag = (j <= n_) ? j : m - j;
    fft_->in[j][0] = increment_cov(hurst, lag, dt_pow);
    fft_->in[j][1] = 0.0;
  }
  fftw_execute(fft_->plan);
  sqrt_eigs_.resize(m);
  double max_eig = 0.0, min_eig = 0.0;
  for (int j = 0; j < m; ++j) {
    max_eig = std::max(max_eig, fft_->out[j][0]);
    min_eig = std::min(min_eig, fft_->out[j][0]);
  }
  if (min_eig < -1e-10 * max_eig) {
    use_cholesky_ = true;
  } else {
    for (int j = 0; j < m; ++j)
      sqrt_eigs_[j] = std::sqrt(std::max(0.0, fft_->out[j][0]) / m);
  }

  if (use_cholesky_) {
    // dense factor of the n x n increment covariance
    chol_.assign(static_cast<std::size_t>(n_) * n_, 0.0);
    std::vector<double> cov(n_);
    for (int k = 0; k < n_; ++k) cov[k] = increment_cov(hurst, k, dt_pow);
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j <= i; ++j) {
        double s = cov[i - j];
        for (int k = 0; k < j; ++k)
          s -= chol_[i * n_ + k] * chol_[j * n_ + k];
        if (i == j) {
          if (s <= 0.0)
            throw std::runtime_error("FbmGenerator: covariance not PD");
          chol_[i * n_ + j] = std::sqrt(s);
        } else {
          chol_[i * n_ + j] = s / chol_[j * n_ + j];
        }
      }
    }
  }
}

FbmGenerator::~FbmGenerator() = default;

void FbmGenerator::sample_increments(RngStream& rng, std::span<double> out) {
  if (static_cast<int>(out.size()) != n_)
    throw std::invalid_argument("sample_increments: output size mismatch");
  if (use_cholesky_) {
    std::vector<double> z(n_);
    for (auto& v : z) v = rng.normal();
    for (int i = 0; i < n_; ++i) {
      double s = 0.0;
      for (int k = 0; k <= i; ++k) s += chol_[i * n_ + k] * z[k];
      out[i] = s;
    }
    return;
  }
  const int m = 2 * n_;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  fft_->in[0][0] = sqrt_eigs_[0] * rng.normal();
  fft_->in[0][1] = 0.0;
  fft_->in[n_][0] = sqrt_eigs_[n_] * rng.normal();
  fft_->in[n_][1] = 0.0;
  for (int k = 1; k < n_; ++k) {
    const double re = sqrt_eigs_[k] * inv_sqrt2 * rng.normal();
    const double im = sqrt_eigs_[k] * inv_sqrt2 * rng.normal();
    fft_->in[k][0] = re;
    fft_->in[k][1] = im;
    fft_->in[m - k][0] = re;
    fft_->in[m - k][1] = -im;
  }
  fftw_execute(fft_->plan);
  for (int j = 0; j < n_; ++j) out[j] = fft_->out[j][0];
}

FBMPath FbmGenerator::sample_path(int dim, RngStream& rng) {
  FBMPath path;
  path.hurst = hurst_;
  path.times.resize(n_ + 1);
  const double dt = T_ / n_;
  for (int i = 0; i <= n_; ++i) path.times[i] = i * dt;
  path.values.resize(dim);
  std::vector<double> incr(n_);
  for (int d = 0; d < dim; ++d) {
    sample_increments(rng, incr);
    auto& vals = path.values[d];
    vals.resize(n_ + 1);
    vals[0] = 0.0;
    for (int i = 0; i < n_; ++i) vals[i + 1] = vals[i] + incr[i];
  }
  return path;
}

FBMPath generate_fbm(double hurst, int n_steps, double T, int dim,
                     RngStream& rng) {
  FbmGenerator gen(hurst, n_steps, T);
  return gen.sample_path(dim, rng);
}

double fbm_covariance(double hurst, double s, double t) {
  const double h2 = 2.0 * hurst;
  return 0.5 * (std::pow(s, h2) + std::pow(t, h2) -
                std::pow(std::abs(t - s), h2));
}

std::vector<Vec> integrate_fsde(const FSDEModel& model, const Vec& x0,
                                const FBMPath& path) {
  if (static_cast<int>(x0.size()) != model.dim ||
      static_cast<int>(path.values.size()) != model.dim)
    throw std::invalid_argument("integrate_fsde: dimension mismatch");
  const std::size_t n = path.times.size();
  std::vector<Vec> traj;
  traj.reserve(n);
  Vec x = x0;
  traj.push_back(x);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double dt = path.times[k + 1] - path.times[k];
    const Vec b = model.drift(x);
    const Mat sig = model.diffusion(x);
    Vec next(model.dim);
    double norm2 = 0.0;
    for (int i = 0; i < model.dim; ++i) {
      double noise = 0.0;
      for (int j = 0; j < model.dim; ++j) {
        const double db = path.values[j][k + 1] - path.values[j][k];
        noise += sig[i * model.dim + j] * db;
      }
      next[i] = x[i] + b[i] * dt + noise;
      norm2 += next[i] * next[i];
    }
    if (norm2 > 1e16)
      throw std::runtime_error("integrate_fsde: state blew past 1e8 at t=" +
                               std::to_string(path.times[k + 1]));
    x = std::move(next);
    traj.push_back(x);
  }
  return traj;
}

double holder_norm(std::span<const double> times, std::span<const double> values,
                   double theta, double a, double b) {
  if (!(a < b)) throw std::invalid_argument("holder_norm: need a < b");
  double best = 0.0;
  const std::size_t n = times.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (times[i] < a) continue;
    if (times[i] > b) break;
    for (std::size_t j = i + 1; j < n && times[j] <= b; ++j) {
      const double num = std::abs(values[j] - values[i]);
      best = std::max(best, num / std::pow(times[j] - times[i], theta));
    }
  }
  return best;
}

double holder_norm(const FBMPath& path, double theta, double a, double b) {
  double best = 0.0;
  const std::size_t n = path.times.size();
  const std::size_t d = path.values.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (path.times[i] < a) continue;
    if (path.times[i] > b) break;
    for (std::size_t j = i + 1; j < n && path.times[j] <= b; ++j) {
      double num2 = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double dv = path.values[k][j] - path.values[k][i];
        num2 += dv * dv;
      }
      best = std::max(best, std::sqrt(num2) /
                                std::pow(path.times[j] - path.times[i], theta));
    }
  }
  return best;
}

LyapunovReport check_lyapunov_contraction(const FSDEModel& model,
                                          const LyapunovSpec& spec,
                                          double hurst, int n_paths,
                                          int n_steps, double max_radius,
                                          RngStream& rng) {
  FbmGenerator gen(hurst, n_steps, 1.0);
  std::vector<double> a(n_paths), e(n_paths), bn(n_paths);
  for (int i = 0; i < n_paths; ++i) {
    const double radius = max_radius * (i + 0.5) / n_paths;
    Vec x0(model.dim);
    double norm2 = 0.0;
    for (auto& v : x0) {
      v = rng.normal();
      norm2 += v * v;
    }
    const double scale = radius / std::max(1e-300, std::sqrt(norm2));
    for (auto& v : x0) v *= scale;
    const FBMPath path = gen.sample_path(model.dim, rng);
    const auto traj = integrate_fsde(model, x0, path);
    a[i] = std::pow(spec.V(x0), spec.r);
    e[i] = std::pow(spec.V(traj.back()), spec.r);
    bn[i] = holder_norm(path, spec.theta, 0.0, 1.0);
  }

  // upper-envelope slope over radius bins
  std::vector<int> idx(n_paths);
  for (int i = 0; i < n_paths; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](int i, int j) { return a[i] < a[j]; });
  const int n_bins = std::max(4, std::min(10, n_paths / 10));
  std::vector<double> bin_a(n_bins, 0.0), bin_e(n_bins, 0.0);
  for (int b = 0; b < n_bins; ++b) {
    const int lo = b * n_paths / n_bins, hi = (b + 1) * n_paths / n_bins;
    double amax = 0.0, emax = 0.0;
    for (int k = lo; k < hi; ++k) {
      amax = std::max(amax, a[idx[k]]);
      emax = std::max(emax, e[idx[k]]);
    }
    bin_a[b] = amax;
    bin_e[b] = emax;
  }
  double slope = 0.0;
  for (int b1 = 0; b1 < n_bins; ++b1)
    for (int b2 = b1 + 1; b2 < n_bins; ++b2)
      if (bin_a[b2] > bin_a[b1])
        slope = std::max(slope, (bin_e[b2] - bin_e[b1]) /
                                    (bin_a[b2] - bin_a[b1]));

  LyapunovReport report;
  report.rho_hat = slope;
  if (slope < 1.0) {
    report.feasible = true;
    report.rho_hat = std::clamp(slope, 0.0, 0.999);
    double c = 0.0;
    for (int i = 0; i < n_paths; ++i)
      c = std::max(c, (e[i] - report.rho_hat * a[i]) / (1.0 + bn[i]));
    report.c_hat = std::max(0.0, c);
    int violations = 0;
    for (int i = 0; i < n_paths; ++i)
      if (e[i] > report.rho_hat * a[i] + report.c_hat * (1.0 + bn[i]) + 1e-9)
        ++violations;
    report.violation_rate = static_cast<double>(violations) / n_paths;
  } else {
    // no contractive envelope; report the violation rate of the best
    // constant fitted on the inner half of the radial grid
    report.feasible = false;
    double c = 0.0;
    for (int k = 0; k < n_paths / 2; ++k) {
      const int i = idx[k];
      c = std::max(c, (e[i] - 0.999 * a[i]) / (1.0 + bn[i]));
    }
    report.c_hat = std::max(0.0, c);
    int violations = 0;
    for (int i = 0; i < n_paths; ++i)
      if (e[i] > 0.999 * a[i] + report.c_hat * (1.0 + bn[i]) + 1e-9)
        ++violations;
    report.violation_rate = static_cast<double>(violations) / n_paths;
  }
  return report;
}

std::function<Vec(const Vec&)> rotation_drift(double rho) {
  return [rho](const Vec& z) -> Vec {
    if (z.size() != 2)
      throw std::invalid_argument("rotation_drift: planar field (d = 2)");
    const double r = std::hypot(z[0], z[1]);
    if (r == 0.0) return {0.0, 0.0};
    const double cos_theta = z[0] / r;
    return {-z[0] - rho * cos_theta * (-z[1]), -z[1] - rho * cos_theta * z[0]};
  };
}

namespace {

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double fa, double fm, double fb, double whole,
                        double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 40);
}

}  // namespace

double evaluate_RT(const std::function<double(double)>& g, double support_len,
                   double T, double t, double hurst) {
  if (!(t > 0.0)) throw std::invalid_argument("evaluate_RT: t must be > 0");
  const double t_pref = std::pow(t, 0.5 - hurst);
  auto integrand = [&](double s) {
    return t_pref * std::pow(T - s, hurst - 0.5) / (t + T - s) * g(s);
  };
  return integrate(integrand, -support_len, 0.0, 1e-10);
}

}  // namespace ergodic::fbm
