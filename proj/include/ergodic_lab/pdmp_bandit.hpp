#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "ergodic_lab/rng.hpp"

namespace ergodic::bandit {

/// Parameters of the penalized bandit process in the translated
/// coordinate y = x - (1-p)/p. The jump amplitude is fixed to 1.
struct BanditParams {
  double p;  // win probability of the better arm
  double q;  // win probability of the worse arm, 0 < q < p < 1

  BanditParams(double p_, double q_);

  /// (1-p)/p, the offset of the jump rate q*(y + (1-p)/p).
  double offset() const { return (1.0 - p) / p; }

  /// Jump rate at state y.
  double jump_rate(double y) const { return q * (y + offset()); }

  /// Stationary mean of y, q(1-p)/(p(p-q)).
  double stationary_mean() const { return q * (1.0 - p) / (p * (p - q)); }
};

/// Deterministic flow between jumps: y' = -p y.
double flow(double y, double dt, const BanditParams& params);

/// Integrated jump rate along the flow started at y.
double integrated_rate(double y, double t, const BanditParams& params);

/// Solves integrated_rate(y, t) = e for t (safeguarded Newton, residual
/// below 1e-12). e is a unit-exponential draw.
double next_jump_time(double y, const BanditParams& params, double e);

struct PathEvent {
  double t;  // event time
  double y;  // state immediately after the event
};

/// Event-time trajectory on [0, T]; the first entry is (0, y0) and the
/// last entry is the state flowed to the horizon.
std::vector<PathEvent> simulate_path(const BanditParams& params, double y0,
                                     double T, RngStream& rng);

/// State at a given time from an event trajectory (flows from the last
/// event before t).
double state_at(const std::vector<PathEvent>& path, double t,
                const BanditParams& params);

/// Closed-form mean E[Y_t] started from mean m0.
double mean_at_t(const BanditParams& params, double m0, double t);

constexpr double kNeverCoalesced = std::numeric_limits<double>::infinity();

/// Two bandit states evolved jointly under a named coupling.
struct CoupledBanditPair {
  double t = 0.0;
  double y = 0.0;
  double y_tilde = 0.0;
  bool coalesced = false;
  double tau = kNeverCoalesced;  // coalescence time once it happens
};

/// Advances the pair to its next jump event under the monotone
/// coupling: the higher coordinate jumps alone at rate q|y - y~|, both
/// jump together at rate q(min + (1-p)/p). Preserves the initial order.
void couple_wasserstein_step(CoupledBanditPair& pair,
                             const BanditParams& params, RngStream& rng);

/// Runs couple_wasserstein_step until t_end, then flows both
/// coordinates to exactly t_end.
void couple_wasserstein_until(CoupledBanditPair& pair,
                              const BanditParams& params, double t_end,
                              RngStream& rng);

/// Survival function of the first-jump coalescence window:
/// P(first jump of the shifted copy, mapped through the coalescence
/// relation, exceeds s). Closed form from the jump-rate integral.
double coalescent_survival(double y, double s, double eps,
                           const BanditParams& params);

/// Density of the mapped first-jump time (eps = 0 gives the plain
/// first-jump density from y).
double coalescent_density(double y, double s, double eps,
                          const BanditParams& params);

/// One coalescence attempt via the maximal coupling of the two
/// first-jump laws. On success the post-jump states coincide and the
/// pair is merged; otherwise both copies are advanced past their first
/// jumps (extra jumps of the early copy simulated with the correct
/// marginal dynamics). Returns true on coalescence.
bool couple_coalescent_attempt(CoupledBanditPair& pair,
                               const BanditParams& params, RngStream& rng);

/// Unique positive root of (e^u - 1)/u = p/q. Throws std::domain_error
/// if p <= q.
double solve_uM(const BanditParams& params);

/// log psi(u) of the invariant law on a grid starting at u = 0, by RK4
/// integration of the Laplace-transform ODE. Requires max(u) < u_M.
std::vector<double> laplace_log_psi(const BanditParams& params,
                                    const std::vector<double>& u_grid);

/// Triangular moment ODE hierarchy h_k' = -k(p-q) h_k + q sum C(k,j) h_{j+1}.
struct MomentTable {
  std::vector<double> times;
  std::vector<std::vector<double>> h;  // h[k-1][i] = h_k(times[i])
};

MomentTable moment_system(const BanditParams& params, int n_max,
                          const std::vector<double>& h_init, double T,
                          double dt);

/// Optimal total-variation decay rate v = (p-q) / (2 + p(p-q)/(q(1-p))).
double tv_rate(const BanditParams& params);

using Sampler = std::function<double(RngStream&)>;

struct SurvivalCurve {
  std::vector<double> t;
  std::vector<double> survival;  // empirical P(tau > t)
};

/// Wasserstein coupling on [0, alpha T], then repeated coalescence
/// attempts on [alpha T, T]. Returns the empirical survival curve of
/// the coalescence time over n_pairs replicas.
SurvivalCurve tv_experiment(const BanditParams& params, const Sampler& mu0,
                            const Sampler& nu0, double T, double alpha,
                            int n_pairs, int n_grid, RngStream& rng);

}  // namespace ergodic::bandit
