#include "gauss.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <string>

#include "covariance.hpp"
#include "engine.hpp"
#include "errors.hpp"
#include "parallel.hpp"
#include "poisson.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace ttsa {

namespace {

// Stream addresses reserved for the distance machinery; replication streams
// (grid_index << 32) + rep stay below 2^63 so these cannot collide.
constexpr std::uint64_t kDirectionStream = 0xD100000000000001ull;
constexpr std::uint64_t kBootstrapStream = 0xB000000000000001ull;

// Mean of the scaled Kolmogorov statistic under an exact match.
constexpr double kKsNullMean = 0.8687;
// First-order mean of the 1d Wasserstein-1 statistic (per unit target sd).
constexpr double kW1NullMean = 1.29;

}  // namespace

const char* cloud_target_name(CloudTarget t) {
    return t == CloudTarget::PrAverage ? "pr" : "last";
}

CloudTarget parse_cloud_target(const std::string& name) {
    if (name == "pr") return CloudTarget::PrAverage;
    if (name == "last") return CloudTarget::LastIterate;
    throw Error(ErrorCode::ConfigError, "unknown target '" + name + "' (expected pr|last)");
}

const char* metric_name(DistanceMetric m) {
    switch (m) {
    case DistanceMetric::Ks1d: return "ks1d";
    case DistanceMetric::ProjKs: return "proj-ks";
    case DistanceMetric::Sw1: return "sw1";
    }
    return "?";
}

DistanceMetric parse_metric(const std::string& name) {
    if (name == "ks1d") return DistanceMetric::Ks1d;
    if (name == "proj-ks") return DistanceMetric::ProjKs;
    if (name == "sw1") return DistanceMetric::Sw1;
    throw Error(ErrorCode::ConfigError,
                "unknown metric '" + name + "' (expected ks1d|proj-ks|sw1)");
}

SampleCloud collect_cloud(const TtsaProblem& p, const NoiseOracle& oracle, const StepSchedule& s,
                          CloudTarget target, std::int64_t n, std::size_t replications,
                          std::uint64_t seed, const CloudOptions& opts) {
    if (replications == 0)
        throw Error(ErrorCode::DegenerateCloud, "cloud needs at least one replication");
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "horizon must be >= 1");

    SampleCloud cloud;
    cloud.n = n;
    cloud.target = target;
    cloud.replications = replications;

    Mat white;
    if (opts.whiten) {
        const Mat source = oracle.kind == OracleKind::Markov
                               ? markov_asymptotic_covariance(p, oracle)
                               : sigma_eps(p, oracle);
        cloud.whitening_target =
            target == CloudTarget::PrAverage ? source : sigma_limit_last(p, source);
        const auto eig = sym_eig(cloud.whitening_target);
        if (eig.values.empty() || eig.values.front() <= 0.0)
            throw Error(ErrorCode::DegenerateCloud,
                        "whitening needs a nonsingular limit covariance");
        white = inv_sqrt_spd(cloud.whitening_target);
        cloud.whitened = true;
    }

    const double inv_sqrt_bn = 1.0 / std::sqrt(beta(s, n));
    const double sqrt_n = std::sqrt(static_cast<double>(n));

    std::vector<Vec> pts(replications);
    std::vector<char> ok(replications, 0);
    std::atomic<std::size_t> diverged{0};

    parallel_for(replications, opts.threads, [&](std::size_t rep) {
        RunOptions ro;
        ro.theta0 = opts.theta0;
        ro.w0 = opts.w0;
        ro.divergence_limit = opts.divergence_limit;
        try {
            const TrajectoryRecord tr =
                run(p, oracle, s, n, seed, opts.stream_base + rep, ro);
            Vec pt(p.d_theta);
            if (target == CloudTarget::PrAverage) {
                const Vec scaled = p.delta * (tr.theta_bar - p.theta_star);
                for (std::size_t i = 0; i < pt.size(); ++i) pt[i] = sqrt_n * scaled[i];
            } else {
                for (std::size_t i = 0; i < pt.size(); ++i)
                    pt[i] = inv_sqrt_bn * (tr.theta[i] - p.theta_star[i]);
            }
            if (!white.data() || white.rows() == 0) {
                pts[rep] = std::move(pt);
            } else {
                pts[rep] = white * pt;
            }
            ok[rep] = 1;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::Diverged) throw;
            diverged.fetch_add(1, std::memory_order_relaxed);
        }
    });

    cloud.diverged = diverged.load();
    if (100 * cloud.diverged > replications)
        throw Error(ErrorCode::Diverged,
                    std::to_string(cloud.diverged) + " of " + std::to_string(replications) +
                        " replications diverged (over 1%)");
    cloud.points.reserve(replications - cloud.diverged);
    for (std::size_t rep = 0; rep < replications; ++rep)
        if (ok[rep]) cloud.points.push_back(std::move(pts[rep]));

    // Rank check of the sample covariance; a collapsed cloud is flagged, not
    // rejected, so deterministic-bias diagnostics stay runnable.
    const std::size_t d = p.d_theta, r = cloud.points.size();
    if (r < 2) {
        cloud.degenerate = true;
        return cloud;
    }
    Vec mean(d, 0.0);
    for (const auto& x : cloud.points)
        for (std::size_t i = 0; i < d; ++i) mean[i] += x[i];
    for (std::size_t i = 0; i < d; ++i) mean[i] /= static_cast<double>(r);
    Mat cov(d, d);
    for (const auto& x : cloud.points)
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j)
                cov(i, j) += (x[i] - mean[i]) * (x[j] - mean[j]);
    for (std::size_t i = 0; i < d * d; ++i) cov.data()[i] /= static_cast<double>(r - 1);
    const auto eig = sym_eig(cov);
    const double lmax = eig.values.back(), lmin = eig.values.front();
    cloud.degenerate = !(lmax > 0.0) || lmin <= 1e-10 * lmax;
    return cloud;
}

namespace {

// Kolmogorov statistic of a resampled multiset against cdf values f at the
// sorted support points; counts are per sorted position, summing to total.
double ks_from_counts(const std::vector<double>& f, const std::vector<std::uint32_t>& counts,
                      double total) {
    double d = 0.0;
    double cum = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double pre = cum / total;
        cum += counts[i];
        const double post = cum / total;
        d = std::max(d, std::max(f[i] - pre, post - f[i]));
    }
    return d;
}

double w1_from_counts(const std::vector<double>& x, const std::vector<std::uint32_t>& counts,
                      const std::vector<double>& quantiles, double sd) {
    double s = 0.0;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::uint32_t c = 0; c < counts[i]; ++c) s += std::abs(x[i] - sd * quantiles[pos++]);
    return s / static_cast<double>(quantiles.size());
}

}  // namespace

DistanceReport distance_to_gaussian(const SampleCloud& cloud, const Mat& target_cov,
                                    DistanceMetric metric, const DistanceOptions& opts) {
    const std::size_t r = cloud.points.size();
    if (r == 0) throw Error(ErrorCode::DegenerateCloud, "empty cloud");
    const std::size_t d = cloud.points.front().size();
    if (!target_cov.square() || target_cov.rows() != d)
        throw Error(ErrorCode::DimensionMismatch, "target covariance shape mismatch");

    DistanceReport rep;
    rep.n = cloud.n;
    rep.metric = metric;
    rep.replications = r;

    std::vector<Vec> dirs;
    if (metric == DistanceMetric::Ks1d) {
        if (d != 1)
            throw Error(ErrorCode::InvalidArgument, "exact 1d metric needs scalar points");
        dirs.push_back(Vec{1.0});
        rep.directions_used = 0;
    } else {
        if (opts.directions == 0)
            throw Error(ErrorCode::InvalidArgument, "direction pool must be nonempty");
        RngStream dir_rng(opts.seed, kDirectionStream);
        while (dirs.size() < opts.directions) {
            Vec u(d);
            for (std::size_t i = 0; i < d; ++i) u[i] = dir_rng.next_gauss();
            const double nn = norm2(u);
            if (nn < 1e-9) continue;
            for (std::size_t i = 0; i < d; ++i) u[i] /= nn;
            dirs.push_back(std::move(u));
        }
        rep.directions_used = dirs.size();
    }

    const std::size_t m = dirs.size();
    std::vector<double> sig2(m);
    std::vector<std::vector<double>> sorted(m);  // projected values, ascending
    std::vector<std::vector<double>> cdf(m);     // target cdf at sorted values
    // rank[mi][i]: sorted position of point i along direction mi, so a
    // resample drawn once in point space scatters into every direction.
    std::vector<std::vector<std::uint32_t>> rank(m, std::vector<std::uint32_t>(r));
    std::vector<double> raw(r);
    std::vector<std::uint32_t> ord(r);
    for (std::size_t mi = 0; mi < m; ++mi) {
        double s2 = 0.0;
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) s2 += dirs[mi][i] * target_cov(i, j) * dirs[mi][j];
        if (!(s2 > 0.0))
            throw Error(ErrorCode::DegenerateCloud,
                        "target covariance is singular along a projection direction");
        sig2[mi] = s2;
        for (std::size_t i = 0; i < r; ++i) raw[i] = dot(dirs[mi], cloud.points[i]);
        std::iota(ord.begin(), ord.end(), 0u);
        std::stable_sort(ord.begin(), ord.end(),
                         [&](std::uint32_t a, std::uint32_t b) { return raw[a] < raw[b]; });
        auto& v = sorted[mi];
        v.resize(r);
        auto& f = cdf[mi];
        f.resize(r);
        const double inv_sd = 1.0 / std::sqrt(s2);
        for (std::size_t pos = 0; pos < r; ++pos) {
            v[pos] = raw[ord[pos]];
            f[pos] = normal_cdf(v[pos] * inv_sd);
            rank[mi][ord[pos]] = static_cast<std::uint32_t>(pos);
        }
    }

    std::vector<double> quantiles;
    if (metric == DistanceMetric::Sw1) {
        quantiles.resize(r);
        for (std::size_t i = 0; i < r; ++i)
            quantiles[i] = normal_quantile((static_cast<double>(i) + 0.5) / static_cast<double>(r));
    }

    const auto one_direction = [&](std::size_t mi, const std::vector<std::uint32_t>& counts) {
        return metric == DistanceMetric::Sw1
                   ? w1_from_counts(sorted[mi], counts, quantiles, std::sqrt(sig2[mi]))
                   : ks_from_counts(cdf[mi], counts, static_cast<double>(r));
    };
    const auto combine = [&](double acc, double v) {
        return metric == DistanceMetric::Sw1 ? acc + v : std::max(acc, v);
    };

    const std::vector<std::uint32_t> ones(r, 1);
    double full = 0.0;
    for (std::size_t mi = 0; mi < m; ++mi) full = combine(full, one_direction(mi, ones));
    if (metric == DistanceMetric::Sw1) full /= static_cast<double>(m);
    rep.value = full;

    if (metric == DistanceMetric::Sw1) {
        double mean_sd = 0.0;
        for (std::size_t mi = 0; mi < m; ++mi) mean_sd += std::sqrt(sig2[mi]);
        mean_sd /= static_cast<double>(m);
        rep.noise_floor = kW1NullMean * mean_sd / std::sqrt(static_cast<double>(r));
    } else {
        rep.noise_floor = kKsNullMean / std::sqrt(static_cast<double>(r));
    }
    rep.floor_ok = rep.value >= 3.0 * rep.noise_floor;

    // Bootstrap over replications: one resample drawn in point space per
    // round, scattered to each direction's sorted positions through rank,
    // so a round costs O(r) per direction with no re-sorting.
    if (opts.bootstrap > 0 && r > 1) {
        RngStream boot(opts.seed, kBootstrapStream);
        std::vector<std::uint32_t> base_counts(r);  // per original point
        std::vector<std::uint32_t> pos_counts(r);   // per sorted position
        rep.bootstrap_values.reserve(opts.bootstrap);
        for (std::size_t b = 0; b < opts.bootstrap; ++b) {
            std::fill(base_counts.begin(), base_counts.end(), 0u);
            for (std::size_t j = 0; j < r; ++j) {
                auto idx = static_cast<std::size_t>(boot.next_double() * static_cast<double>(r));
                if (idx >= r) idx = r - 1;
                ++base_counts[idx];
            }
            double acc = 0.0;
            for (std::size_t mi = 0; mi < m; ++mi) {
                for (std::size_t i = 0; i < r; ++i) pos_counts[rank[mi][i]] = base_counts[i];
                acc = combine(acc, one_direction(mi, pos_counts));
            }
            if (metric == DistanceMetric::Sw1) acc /= static_cast<double>(m);
            rep.bootstrap_values.push_back(acc);
        }
        double bm = 0.0;
        for (double v : rep.bootstrap_values) bm += v;
        bm /= static_cast<double>(rep.bootstrap_values.size());
        double ss = 0.0;
        for (double v : rep.bootstrap_values) ss += (v - bm) * (v - bm);
        rep.std_error = rep.bootstrap_values.size() > 1
                            ? std::sqrt(ss / static_cast<double>(rep.bootstrap_values.size() - 1))
                            : 0.0;
    }
    return rep;
}

RateFit fit_rate(const std::vector<DistanceReport>& reports) {
    if (reports.size() < 5)
        throw Error(ErrorCode::InsufficientGrid, "rate fit needs at least 5 grid points");
    for (std::size_t i = 1; i < reports.size(); ++i) {
        if (reports[i].n <= reports[i - 1].n)
            throw Error(ErrorCode::InvalidArgument, "grid must be strictly increasing in n");
        if (reports[i].metric != reports[0].metric)
            throw Error(ErrorCode::InvalidArgument, "rate fit needs a single metric");
    }
    const double span = static_cast<double>(reports.back().n) /
                        static_cast<double>(reports.front().n);
    if (span < 16.0 * (1.0 - 1e-12))
        throw Error(ErrorCode::InsufficientGrid, "grid must span at least 4 doublings of n");

    std::vector<double> xs(reports.size()), ys(reports.size());
    for (std::size_t i = 0; i < reports.size(); ++i) {
        if (!(reports[i].value > 0.0))
            throw Error(ErrorCode::InvalidArgument,
                        "distances must be positive for a log-log fit");
        xs[i] = std::log(static_cast<double>(reports[i].n));
        ys[i] = std::log(reports[i].value);
    }
    const LineFit lf = fit_line(xs, ys);

    RateFit rf;
    rf.pairs.reserve(reports.size());
    for (std::size_t i = 0; i < reports.size(); ++i) rf.pairs.emplace_back(xs[i], ys[i]);
    rf.slope = lf.slope;
    rf.intercept = lf.intercept;
    rf.r2 = lf.r2;
    rf.ci_lo = rf.ci_hi = lf.slope;

    std::size_t n_boot = reports[0].bootstrap_values.size();
    for (const auto& r : reports) n_boot = std::min(n_boot, r.bootstrap_values.size());
    if (n_boot >= 2) {
        std::vector<double> slopes;
        slopes.reserve(n_boot);
        std::vector<double> yb(reports.size());
        for (std::size_t b = 0; b < n_boot; ++b) {
            bool usable = true;
            for (std::size_t i = 0; i < reports.size(); ++i) {
                const double v = reports[i].bootstrap_values[b];
                if (!(v > 0.0)) {
                    usable = false;
                    break;
                }
                yb[i] = std::log(v);
            }
            if (usable) slopes.push_back(fit_line(xs, yb).slope);
        }
        if (slopes.size() >= 2) {
            std::sort(slopes.begin(), slopes.end());
            const auto quantile_at = [&](double q) {
                const double pos = q * static_cast<double>(slopes.size() - 1);
                const auto lo = static_cast<std::size_t>(pos);
                const std::size_t hi = std::min(lo + 1, slopes.size() - 1);
                const double frac = pos - static_cast<double>(lo);
                return slopes[lo] * (1.0 - frac) + slopes[hi] * frac;
            };
            rf.ci_lo = std::min(quantile_at(0.025), rf.slope);
            rf.ci_hi = std::max(quantile_at(0.975), rf.slope);
        }
    }
    return rf;
}

}  // namespace ttsa
