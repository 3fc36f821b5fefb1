#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mat.hpp"
#include "model.hpp"
#include "schedule.hpp"

namespace ttsa {

/// Which scaled error the cloud samples: the averaged-iterate statistic
/// sqrt(n) * delta * (theta_bar_n - theta*) or the final-iterate statistic
/// (theta_n - theta*) / sqrt(beta_n).
enum class CloudTarget { PrAverage, LastIterate };

const char* cloud_target_name(CloudTarget t);
CloudTarget parse_cloud_target(const std::string& name);

struct CloudOptions {
    Vec theta0, w0;  // empty means zero start
    bool whiten = false;
    std::uint64_t stream_base = 0;  // replication rep uses stream_base + rep
    int threads = 1;
    double divergence_limit = 1e12;
};

struct SampleCloud {
    std::int64_t n = 0;
    CloudTarget target = CloudTarget::PrAverage;
    std::size_t replications = 0;  // requested
    std::vector<Vec> points;       // surviving replications, replication order
    std::size_t diverged = 0;
    bool degenerate = false;  // sample covariance numerically rank-deficient
    bool whitened = false;
    Mat whitening_target;  // limit covariance used for whitening; empty otherwise
};

/// Runs `replications` independent trajectories of length n (disjoint RNG
/// streams) and returns the scaled error cloud. Diverged replications are
/// excluded and counted; more than 1% of them aborts. `whiten` multiplies
/// points by the inverse square root of the exact limit covariance, so the
/// reference law becomes standard normal.
SampleCloud collect_cloud(const TtsaProblem& p, const NoiseOracle& oracle, const StepSchedule& s,
                          CloudTarget target, std::int64_t n, std::size_t replications,
                          std::uint64_t seed, const CloudOptions& opts = {});

enum class DistanceMetric { Ks1d, ProjKs, Sw1 };

const char* metric_name(DistanceMetric m);
DistanceMetric parse_metric(const std::string& name);

struct DistanceReport {
    std::int64_t n = 0;
    DistanceMetric metric = DistanceMetric::Ks1d;
    double value = 0.0;
    double std_error = 0.0;  // bootstrap standard error over replications
    std::size_t directions_used = 0;  // 0 for the exact 1d metric
    std::size_t replications = 0;
    double noise_floor = 0.0;  // expected metric level for an exact match
    bool floor_ok = true;      // value >= 3 * noise_floor
    std::vector<double> bootstrap_values;  // resampled statistic, for rate CIs
};

struct DistanceOptions {
    std::size_t directions = 64;  // projection pool for proj-ks / sw1
    std::size_t bootstrap = 200;  // resamples behind std_error and the CIs
    std::uint64_t seed = 0;       // directions/resampling stream seed
};

/// Distance between the cloud's empirical law and N(0, target_cov).
/// "ks1d" (d = 1 only) is the exact Kolmogorov statistic. "proj-ks" is the
/// sup over random unit directions u of the 1d Kolmogorov distance between
/// the projected sample and N(0, u^T target_cov u), a lower bound on the
/// convex-set distance. "sw1" averages the projected Wasserstein-1 distance
/// over the same pool. Directions are deterministic given the seed.
DistanceReport distance_to_gaussian(const SampleCloud& cloud, const Mat& target_cov,
                                    DistanceMetric metric, const DistanceOptions& opts = {});

struct RateFit {
    std::vector<std::pair<double, double>> pairs;  // (log n, log distance)
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    double ci_lo = 0.0, ci_hi = 0.0;  // 95% bootstrap interval, contains slope
};

/// Log-log OLS of distance against n over a geometric grid; needs >= 5
/// reports spanning >= 4 doublings, one metric throughout, positive values.
/// The slope CI resamples replications via the reports' bootstrap values.
RateFit fit_rate(const std::vector<DistanceReport>& reports);

}  // namespace ttsa
