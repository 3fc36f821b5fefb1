#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mat.hpp"
#include "model.hpp"
#include "schedule.hpp"

namespace ttsa {

/// Matrices of the change of variables that makes the two chains contract
/// autonomously. Starting from l = 0:
///   u_k   = delta - a12 l_k
///   l_next = (l_k - gamma_k a22 l_k + beta_k a22^{-1} a21 u_k)(I - beta_k u_k)^{-1}
///   d_k   = l_next + a22^{-1} a21
///   b11_k = u_k
///   b22_k = (beta_k/gamma_k) d_k a12 + a22
/// The translated fast variable at time k is
///   w_tilde_k = (w_k - w*) + d_{k-1} (theta_k - theta*),   d_{-1} = a22^{-1} a21.
struct DecouplingState {
    Mat l_k;                  // L_k before the step at index k
    Mat u_k, d_k;             // U_k, D_k of the most recent step
    Mat b11_k, b22_k;
    Mat d_prev;               // D_{k-1}, defines w_tilde at the current index
    double l_gain_max = 0.0;  // max over k of ||L_k||_F * gamma_k / beta_k

    DecouplingState(const TtsaProblem& p);

    /// Advances L/U/D/B for step k. The inverse (I - beta_k u_k)^{-1} is
    /// guarded: 1-norm condition above 1e10 aborts the run.
    void advance(const TtsaProblem& p, double beta_k, double gamma_k, std::int64_t k);
};

struct Checkpoint {
    std::int64_t k = 0;
    Vec theta, w;
    Vec theta_bar, w_bar;      // running means over iterates 1..k
    Vec theta_tilde, w_tilde;  // translated coordinates at index k
    double identity_residual = 0.0;
};

struct RunOptions {
    Vec theta0, w0;  // empty means zero start
    bool log_noise = false;
    bool track_decoupling = false;  // evolve the decoupled recursion alongside
    bool track_identity = false;    // per-step slow-chain decomposition residual
    double divergence_limit = 1e12;
    std::vector<std::int64_t> checkpoints;  // strictly increasing, each in [0, n]
};

struct TrajectoryRecord {
    std::int64_t n = 0;
    Vec theta, w;            // final iterates
    Vec theta_bar, w_bar;    // means over iterates 1..n (empty when n = 0)
    std::vector<Checkpoint> checkpoints;
    double identity_residual_max = 0.0;
    double decoupling_dev_max = 0.0;
    double l_gain_max = 0.0;
    int x0 = -1;  // initial chain state for finite-state oracles, -1 otherwise
    std::optional<std::vector<NoiseSample>> noise_log;
};

/// One coupled update with the given observation and step sizes.
void step_coupled(const ObservationData& obs, double beta_k, double gamma_k, Vec& theta, Vec& w);

/// Runs the coupled recursion for `horizon` steps (step k uses beta_k,
/// gamma_k for k = 0..horizon-1) from the options' start point, drawing
/// observations from a fresh sampler addressed by (seed, stream).
/// Deterministic given (inputs, seed, stream).
TrajectoryRecord run(const TtsaProblem& p, const NoiseOracle& oracle, const StepSchedule& s,
                     std::int64_t horizon, std::uint64_t seed, std::uint64_t stream,
                     const RunOptions& opts = {});

/// Replays the autonomous two-chain recursion over a logged noise sequence:
///   theta_tilde' = (I - beta_k b11_k) theta_tilde - beta_k a12 w_tilde + beta_k v_{k+1}
///   w_tilde'     = (I - gamma_k b22_k) w_tilde + beta_k d_k v_{k+1} + gamma_k w_noise_{k+1}
/// Returns the per-index sequences (index 0 holds the start values).
struct DecoupledTrajectory {
    std::vector<Vec> theta_tilde, w_tilde;
    double l_gain_max = 0.0;
};
DecoupledTrajectory replay_decoupled(const TtsaProblem& p, const StepSchedule& s,
                                     const std::vector<NoiseSample>& noise_log, const Vec& theta0,
                                     const Vec& w0);

/// Deterministic products over step indices m..k (empty when m > k):
///   g1 = prod (I - beta_i delta),   g2 = prod (I - gamma_i a22),
///   p1 = prod (1 - beta_i a_delta / 2),   p2 = prod (1 - gamma_i a22_rate / 2),
/// with the contraction rates taken from the Lyapunov certificates of delta
/// and a22. ||g1|| <= sqrt(kappa_delta) * p1 and likewise for g2 whenever the
/// schedule respects the certificates' step limits.
struct MatrixProducts {
    Mat g1, g2;
    double p1 = 1.0, p2 = 1.0;
};
MatrixProducts matrix_products(const TtsaProblem& p, const StepSchedule& s, std::int64_t m,
                               std::int64_t k);

/// The linear part of the final slow-chain error: over steps j = 0..n-1,
///   sum_j beta_j * [prod_{i=j+1}^{n-1} (I - beta_i delta)] * psi_{j+1},
/// with psi_{j+1} = v_{j+1} - a12 a22^{-1} w_noise_{j+1} read from the log.
/// residual = (theta_n - theta*) - statistic; it vanishes identically for
/// additive-only noise with a12 = 0 and zero start.
struct LastIterateStatistic {
    Vec statistic;
    Vec residual;
};
LastIterateStatistic leading_statistic_last(const TtsaProblem& p, const StepSchedule& s,
                                            const std::vector<NoiseSample>& noise_log,
                                            const Vec& theta_final);

/// Per-replication accumulator for the slow-chain decomposition identity
///   delta (theta_k - theta*) = (theta_k - theta_{k+1})/beta_k
///                              - c (w_k - w_{k+1})/gamma_k + v_{k+1} - c w_{k+1}^noise
/// evaluated exactly from one step's inputs; returns the max-abs residual
/// relative to max(1, ||lhs||_inf).
double identity_residual(const TtsaProblem& p, const Vec& theta_before, const Vec& w_before,
                         const Vec& theta_after, const Vec& w_after, double beta_k, double gamma_k,
                         const Vec& v, const Vec& w_noise);

}  // namespace ttsa
