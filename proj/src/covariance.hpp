#pragma once

#include <cstdint>
#include <vector>

#include "mat.hpp"
#include "model.hpp"
#include "schedule.hpp"

namespace ttsa {

/// Covariance of the combined per-step noise psi = eps_V - C eps_W under the
/// oracle's sampling law (the stationary law for finite-state chains, where
/// this is the one-step variance, not the long-run covariance). With
/// strict = true, a state-dependent conditional covariance of psi is
/// rejected (AssumptionViolated) instead of silently averaged.
Mat sigma_eps(const TtsaProblem& p, const NoiseOracle& oracle, bool strict = false);

/// Exact covariance of the leading last-iterate statistic after n steps:
/// S_{k+1} = (I - beta_k Delta) S_k (I - beta_k Delta)^T + beta_k^2 Sigma
/// with S_0 = 0, k = 0..n-1. Equals the double-product sum
/// sum_k beta_k^2 G_{k+1:n-1} Sigma G_{k+1:n-1}^T.
Mat sigma_n_last(const TtsaProblem& p, const StepSchedule& s, const Mat& sigma_source,
                 std::int64_t n);

/// Candidate limit of beta_n^{-1} S_n for decaying steps: the solution of
/// Delta X + X Delta^T = Sigma. Requires -Delta Hurwitz; the returned
/// solution's residual is checked to 1e-10 and PSD to 1e-10.
Mat sigma_limit_last(const TtsaProblem& p, const Mat& sigma_source);

/// Same pipeline with the source set to the chain's long-run covariance of
/// psi (includes autocorrelation, from the poisson machinery).
Mat markov_sigma_limit_last(const TtsaProblem& p, const NoiseOracle& oracle);

struct GapPoint {
    std::int64_t n = 0;
    double gap = 0.0;  // ||beta_n^{-1} S_n - sigma_limit|| (spectral)
};

struct CovarianceReport {
    Mat sigma_eps;
    Mat sigma_source;      // recursion input: sigma_eps, or the long-run
                           // covariance for finite-state chains
    Mat sigma_n_last;      // unnormalized S_n at the largest grid n
    Mat sigma_limit_last;  // Lyapunov candidate for lim beta_n^{-1} S_n
    std::vector<GapPoint> convergence_gaps;
    double gap_slope = 0.0;   // OLS slope of log gap vs log n over the grid
    double lambda_min = 0.0;  // smallest eigenvalue of sigma_limit_last
    // First grid n with lambda_min(beta_n^{-1} S_n) >= lambda_min / 2;
    // -1 when no grid point reaches it. Reported, never assumed.
    std::int64_t lambda_min_threshold_n = -1;
};

/// Runs the normalized finite sums over a strictly increasing grid (>= 2
/// points) and compares them against the Lyapunov candidate.
CovarianceReport covariance_report(const TtsaProblem& p, const StepSchedule& s,
                                   const NoiseOracle& oracle,
                                   const std::vector<std::int64_t>& n_grid,
                                   bool strict = false);

}  // namespace ttsa
