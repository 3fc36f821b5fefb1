#include "covariance.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "errors.hpp"
#include "linalg.hpp"
#include "poisson.hpp"

namespace ttsa {

namespace {

void check_psd(const Mat& m, const std::string& label) {
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = i + 1; j < m.cols(); ++j)
            if (std::abs(m(i, j) - m(j, i)) > 1e-10)
                throw Error(ErrorCode::NumericalFailure, label + " not symmetric");
    const auto eig = sym_eig(m);
    if (!eig.values.empty() && eig.values.front() < -1e-10)
        throw Error(ErrorCode::NumericalFailure,
                    label + " has negative eigenvalue " + std::to_string(eig.values.front()));
}

// Conditional covariance of psi given the current chain state must not vary
// across states for the i.i.d.-style covariance to be the CLT target.
double psi_conditional_cov_deviation(const TtsaProblem& p, const NoiseOracle& o) {
    const std::size_t n = o.n_states(), d = p.d_theta;
    std::vector<Vec> psi(n);
    for (std::size_t x = 0; x < n; ++x) {
        EpsPair e = eps_at(p, o.states[x]);
        psi[x] = e.eps_v - p.c * e.eps_w;
    }
    std::vector<Mat> cond(n, Mat(d, d));
    for (std::size_t x = 0; x < n; ++x) {
        Vec mean(d, 0.0);
        for (std::size_t y = 0; y < n; ++y)
            for (std::size_t i = 0; i < d; ++i) mean[i] += o.kernel(x, y) * psi[y][i];
        for (std::size_t y = 0; y < n; ++y)
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j)
                    cond[x](i, j) += o.kernel(x, y) * (psi[y][i] - mean[i]) * (psi[y][j] - mean[j]);
    }
    double dev = 0.0;
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = x + 1; y < n; ++y) dev = std::max(dev, max_abs(cond[x] - cond[y]));
    return dev;
}

}  // namespace

Mat sigma_eps(const TtsaProblem& p, const NoiseOracle& oracle, bool strict) {
    if (strict && oracle.kind == OracleKind::Markov) {
        const double dev = psi_conditional_cov_deviation(p, oracle);
        if (dev > 1e-10)
            throw Error(ErrorCode::AssumptionViolated,
                        "conditional noise covariance varies across chain states (deviation " +
                            std::to_string(dev) + "); the stationary variance is not the "
                            "martingale CLT target");
    }
    const NoiseMoments m = noise_moments(p, oracle);
    const Mat ct = transpose(p.c);
    Mat s = m.sigma_v - m.sigma_vw * ct - p.c * transpose(m.sigma_vw) + p.c * m.sigma_w * ct;
    for (std::size_t i = 0; i < s.rows(); ++i)
        for (std::size_t j = i + 1; j < s.cols(); ++j) {
            const double v = 0.5 * (s(i, j) + s(j, i));
            s(i, j) = v;
            s(j, i) = v;
        }
    check_psd(s, "noise covariance");
    return s;
}

Mat sigma_n_last(const TtsaProblem& p, const StepSchedule& s, const Mat& sigma_source,
                 std::int64_t n) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "horizon must be >= 1");
    if (!sigma_source.square() || sigma_source.rows() != p.d_theta)
        throw Error(ErrorCode::DimensionMismatch, "source covariance must be d_theta x d_theta");
    const std::size_t d = p.d_theta;
    Mat cov(d, d);
    Mat f(d, d);
    for (std::int64_t k = 0; k < n; ++k) {
        const double bk = beta(s, k);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j)
                f(i, j) = (i == j ? 1.0 : 0.0) - bk * p.delta(i, j);
        cov = f * cov * transpose(f);
        const double b2 = bk * bk;
        for (std::size_t i = 0; i < d * d; ++i) cov.data()[i] += b2 * sigma_source.data()[i];
    }
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) {
            const double v = 0.5 * (cov(i, j) + cov(j, i));
            cov(i, j) = v;
            cov(j, i) = v;
        }
    return cov;
}

Mat sigma_limit_last(const TtsaProblem& p, const Mat& sigma_source) {
    if (!sigma_source.square() || sigma_source.rows() != p.d_theta)
        throw Error(ErrorCode::DimensionMismatch, "source covariance must be d_theta x d_theta");
    const HurwitzReport h = eig_check_hurwitz(p.delta);
    if (!h.negated_is_hurwitz)
        throw Error(ErrorCode::NotHurwitz,
                    "slow-system matrix has an eigenvalue with real part " +
                        std::to_string(h.min_real_part) + "; no limiting covariance");
    Mat x = solve_sylvester_symmetric(p.delta, sigma_source);
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = i + 1; j < x.cols(); ++j) {
            const double v = 0.5 * (x(i, j) + x(j, i));
            x(i, j) = v;
            x(j, i) = v;
        }
    const double res = max_abs(p.delta * x + x * transpose(p.delta) - sigma_source);
    if (res > 1e-10)
        throw Error(ErrorCode::NumericalFailure,
                    "limiting-covariance residual " + std::to_string(res) + " exceeds 1e-10");
    check_psd(x, "limiting covariance");
    return x;
}

Mat markov_sigma_limit_last(const TtsaProblem& p, const NoiseOracle& oracle) {
    return sigma_limit_last(p, markov_asymptotic_covariance(p, oracle));
}

CovarianceReport covariance_report(const TtsaProblem& p, const StepSchedule& s,
                                   const NoiseOracle& oracle,
                                   const std::vector<std::int64_t>& n_grid, bool strict) {
    if (n_grid.size() < 2)
        throw Error(ErrorCode::ConfigError, "gap slope needs at least two grid points");
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
        if (n_grid[i] < 1) throw Error(ErrorCode::ConfigError, "grid entries must be >= 1");
        if (i > 0 && n_grid[i] <= n_grid[i - 1])
            throw Error(ErrorCode::ConfigError, "grid must be strictly increasing");
    }

    CovarianceReport rep;
    rep.sigma_eps = sigma_eps(p, oracle, strict);
    rep.sigma_source = oracle.kind == OracleKind::Markov
                           ? markov_asymptotic_covariance(p, oracle)
                           : rep.sigma_eps;
    rep.sigma_limit_last = sigma_limit_last(p, rep.sigma_source);
    const auto limit_eig = sym_eig(rep.sigma_limit_last);
    rep.lambda_min = limit_eig.values.empty() ? 0.0 : limit_eig.values.front();

    // One forward pass, snapshots at the grid points.
    const std::size_t d = p.d_theta;
    Mat cov(d, d), f(d, d);
    std::size_t next = 0;
    for (std::int64_t k = 0; k < n_grid.back(); ++k) {
        const double bk = beta(s, k);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j)
                f(i, j) = (i == j ? 1.0 : 0.0) - bk * p.delta(i, j);
        cov = f * cov * transpose(f);
        const double b2 = bk * bk;
        for (std::size_t i = 0; i < d * d; ++i) cov.data()[i] += b2 * rep.sigma_source.data()[i];
        if (k + 1 == n_grid[next]) {
            const std::int64_t n = n_grid[next];
            const double bn = beta(s, n);
            Mat scaled = (1.0 / bn) * cov;
            rep.convergence_gaps.push_back({n, op_norm(scaled - rep.sigma_limit_last)});
            const auto eig = sym_eig(scaled);
            const double lm = eig.values.empty() ? 0.0 : eig.values.front();
            if (rep.lambda_min_threshold_n < 0 && lm >= 0.5 * rep.lambda_min)
                rep.lambda_min_threshold_n = n;
            if (n == n_grid.back()) rep.sigma_n_last = cov;
            ++next;
        }
    }

    // Log-log OLS over the positive gaps; fewer than two leaves the slope 0.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t m = 0;
    for (const auto& g : rep.convergence_gaps) {
        if (g.gap <= 0.0) continue;
        const double x = std::log(static_cast<double>(g.n)), y = std::log(g.gap);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    if (m >= 2) {
        const double denom = m * sxx - sx * sx;
        if (denom > 0) rep.gap_slope = (m * sxy - sx * sy) / denom;
    }
    return rep;
}

}  // namespace ttsa
