#pragma once

// Reference computations for tests, deliberately built on different
// algorithms than the library: series instead of linear solves, quadrature
// instead of Kronecker systems, brute force instead of closed forms.

#include <cmath>
#include <cstdint>
#include <vector>

#include "errors.hpp"
#include "mat.hpp"
#include "schedule.hpp"

namespace refcalc {

using ttsa::Mat;
using ttsa::Vec;
using ttsa::operator+;  // Vec is std::vector<double>, so the arithmetic
using ttsa::operator-;  // operators are not found by argument lookup here
using ttsa::operator*;

inline Mat mat_exp(const Mat& a) {
    const std::size_t d = a.rows();
    double scale = ttsa::max_abs(a) * static_cast<double>(d);
    int squarings = 0;
    while (scale > 0.5) {
        scale *= 0.5;
        ++squarings;
    }
    const double factor = std::ldexp(1.0, -squarings);
    Mat x = factor * a;
    Mat result = Mat::identity(d);
    Mat term = Mat::identity(d);
    for (int k = 1; k <= 24; ++k) {
        term = (1.0 / k) * (term * x);
        result = result + term;
    }
    for (int s = 0; s < squarings; ++s) result = result * result;
    return result;
}

/// integral_0^inf exp(-a^T t) exp(-a t) dt by composite Simpson with
/// accumulated matrix-exponential powers; valid when -a is Hurwitz.
inline Mat lyapunov_quadrature(const Mat& a) {
    const std::size_t d = a.rows();
    const double anorm = std::max(ttsa::max_abs(a) * static_cast<double>(d), 1e-3);
    const double h = 2e-3 / anorm;
    const Mat eh = mat_exp((-h) * a);

    Mat power = Mat::identity(d);  // exp(-a * k h)
    Mat q(d, d);
    auto integrand = [&](const Mat& m) { return ttsa::transpose(m) * m; };

    Mat f0 = integrand(power);
    double tail = 1.0;
    std::int64_t k = 0;
    while (tail > 1e-16 && k < 40000000) {
        // one Simpson panel over [kh, (k+2)h]
        power = power * eh;
        const Mat f1 = integrand(power);
        power = power * eh;
        const Mat f2 = integrand(power);
        q = q + (h / 3.0) * (f0 + 4.0 * f1 + f2);
        f0 = f2;
        tail = ttsa::max_abs(f2);
        k += 2;
    }
    if (tail > 1e-12)
        throw ttsa::Error(ttsa::ErrorCode::NumericalFailure,
                          "quadrature oracle: integrand did not decay");
    return q;
}

/// Largest singular value by power iteration on b^T b.
inline double power_opnorm(const Mat& b) {
    const std::size_t d = b.cols();
    Vec v(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) v[i] = 1.0 / std::sqrt(static_cast<double>(d) + i);
    double lambda = 0.0;
    for (int it = 0; it < 20000; ++it) {
        Vec bv = b * v;
        Vec w(d, 0.0);
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t i = 0; i < b.rows(); ++i) w[j] += b(i, j) * bv[i];
        const double n = ttsa::norm2(w);
        if (n == 0.0) return 0.0;
        lambda = n;
        v = (1.0 / n) * w;
    }
    return std::sqrt(lambda);
}

/// Stationary law by forward iteration of the row map.
inline Vec stationary_power(const Mat& p) {
    const std::size_t n = p.rows();
    Vec pi(n, 1.0 / static_cast<double>(n));
    for (int it = 0; it < 2000000; ++it) {
        Vec next(n, 0.0);
        for (std::size_t x = 0; x < n; ++x)
            for (std::size_t y = 0; y < n; ++y) next[y] += pi[x] * p(x, y);
        double dev = 0.0;
        for (std::size_t y = 0; y < n; ++y) dev = std::max(dev, std::abs(next[y] - pi[y]));
        pi = next;
        if (dev < 1e-15) break;
    }
    return pi;
}

/// Poisson solution by the telescoping series sum_t P^t (f - pi f).
inline Vec poisson_series(const Mat& p, const Vec& f, int max_terms = 200000) {
    const std::size_t n = p.rows();
    const Vec pi = stationary_power(p);
    double pif = 0.0;
    for (std::size_t x = 0; x < n; ++x) pif += pi[x] * f[x];
    Vec centered(n);
    for (std::size_t x = 0; x < n; ++x) centered[x] = f[x] - pif;
    Vec fh = centered;
    Vec term = centered;
    for (int t = 1; t < max_terms; ++t) {
        term = p * term;
        fh = fh + term;
        if (ttsa::max_abs(term) < 1e-15) return fh;
    }
    throw ttsa::Error(ttsa::ErrorCode::NumericalFailure, "poisson series did not converge");
}

/// Long-run covariance of psi(X_t) under stationarity by the truncated
/// autocovariance series Sigma_0 + sum_t (C_t + C_t^T).
inline Mat autocov_sigma(const Mat& p, const std::vector<Vec>& psi, int max_terms = 200000) {
    const std::size_t n = p.rows();
    const std::size_t d = psi[0].size();
    const Vec pi = stationary_power(p);

    Vec mean(d, 0.0);
    for (std::size_t x = 0; x < n; ++x) mean = mean + pi[x] * psi[x];
    std::vector<Vec> c(n);
    for (std::size_t x = 0; x < n; ++x) c[x] = psi[x] - mean;

    Mat sigma(d, d);
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) sigma(i, j) += pi[x] * c[x][i] * c[x][j];
    const double base = std::max(ttsa::max_abs(sigma), 1e-300);

    std::vector<Vec> pt = c;  // column t-step expectations E[c(X_t) | X_0 = x]
    for (int t = 1; t < max_terms; ++t) {
        std::vector<Vec> next(n, Vec(d, 0.0));
        for (std::size_t x = 0; x < n; ++x)
            for (std::size_t y = 0; y < n; ++y) next[x] = next[x] + p(x, y) * pt[y];
        pt = next;
        Mat ct(d, d);
        for (std::size_t x = 0; x < n; ++x)
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j) ct(i, j) += pi[x] * c[x][i] * pt[x][j];
        sigma = sigma + ct + ttsa::transpose(ct);
        if (ttsa::max_abs(ct) < 1e-16 * base) return sigma;
    }
    throw ttsa::Error(ttsa::ErrorCode::NumericalFailure, "autocovariance series did not converge");
}

inline double tv_distance(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return 0.5 * s;
}

inline double max_pairwise_tv_brute(const Mat& p) {
    double best = 0.0;
    for (std::size_t i = 0; i < p.rows(); ++i)
        for (std::size_t j = 0; j < p.rows(); ++j) {
            Vec ri(p.cols()), rj(p.cols());
            for (std::size_t k = 0; k < p.cols(); ++k) {
                ri[k] = p(i, k);
                rj[k] = p(j, k);
            }
            best = std::max(best, tv_distance(ri, rj));
        }
    return best;
}

inline int mixing_time_brute(const Mat& p, double threshold = 0.25) {
    Mat pt = p;
    for (int t = 1; t < 100000; ++t) {
        if (max_pairwise_tv_brute(pt) <= threshold) return t;
        pt = pt * p;
    }
    throw ttsa::Error(ttsa::ErrorCode::NumericalFailure, "brute mixing time not found");
}

/// Covariance of the last-iterate statistic by the explicit double-product
/// sum: S_n = sum_k beta_k^2 G_{k+1:n-1} Sigma G_{k+1:n-1}^T with the
/// products formed directly (quadratic cost; for small n).
inline Mat double_product_sigma(const Mat& delta, const ttsa::StepSchedule& s, const Mat& sigma,
                                std::int64_t n) {
    const std::size_t d = delta.rows();
    Mat total(d, d);
    for (std::int64_t k = 0; k < n; ++k) {
        Mat g = Mat::identity(d);
        for (std::int64_t i = k + 1; i < n; ++i)
            g = (Mat::identity(d) - ttsa::beta(s, i) * delta) * g;
        const double bk = ttsa::beta(s, k);
        total = total + (bk * bk) * (g * sigma * ttsa::transpose(g));
    }
    return total;
}

inline double kahan_sum(const std::vector<double>& values) {
    double sum = 0.0, comp = 0.0;
    for (double v : values) {
        const double y = v - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum;
}

}  // namespace refcalc
