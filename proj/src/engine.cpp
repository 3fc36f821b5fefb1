#include "engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "errors.hpp"
#include "linalg.hpp"

namespace ttsa {

namespace {

void require(bool cond, ErrorCode code, const std::string& msg) {
    if (!cond) throw Error(code, msg);
}

// out = b - m1*x1 - m2*x2 (hot path: no allocation, plain loops).
inline void drift_into(const Vec& b, const Mat& m1, const double* x1, const Mat& m2,
                       const double* x2, double* out) {
    const std::size_t rows = m1.rows(), c1 = m1.cols(), c2 = m2.cols();
    const double* p1 = m1.data();
    const double* p2 = m2.data();
    for (std::size_t i = 0; i < rows; ++i) {
        double acc = b[i];
        const double* r1 = p1 + i * c1;
        for (std::size_t j = 0; j < c1; ++j) acc -= r1[j] * x1[j];
        const double* r2 = p2 + i * c2;
        for (std::size_t j = 0; j < c2; ++j) acc -= r2[j] * x2[j];
        out[i] = acc;
    }
}

inline void kahan_add(Vec& sum, Vec& comp, const Vec& x) {
    for (std::size_t i = 0; i < sum.size(); ++i) {
        const double y = x[i] - comp[i];
        const double t = sum[i] + y;
        comp[i] = (t - sum[i]) - y;
        sum[i] = t;
    }
}

inline double vec_max_abs(const Vec& x) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace

DecouplingState::DecouplingState(const TtsaProblem& p)
    : l_k(p.d_w, p.d_theta),
      u_k(p.delta),
      d_k(p.a22_inv * p.a21),
      b11_k(p.delta),
      b22_k(p.a22),
      d_prev(d_k) {}

void DecouplingState::advance(const TtsaProblem& p, double beta_k, double gamma_k,
                              std::int64_t k) {
    l_gain_max = std::max(l_gain_max, frobenius_norm(l_k) * gamma_k / beta_k);
    u_k = p.delta - p.a12 * l_k;
    b11_k = u_k;
    const Mat m = Mat::identity(p.d_theta) - beta_k * u_k;
    Lu lu(m);
    const double cond = lu.cond1();
    if (cond > 1e10)
        throw Error(ErrorCode::NumericalFailure,
                    "change-of-variables recursion ill-conditioned at step " + std::to_string(k) +
                        " (cond " + std::to_string(cond) + "); step sizes too aggressive");
    const Mat rhs = l_k - gamma_k * (p.a22 * l_k) + beta_k * (p.a22_inv * (p.a21 * u_k));
    l_k = rhs * lu.inverse();
    d_k = l_k + p.a22_inv * p.a21;
    b22_k = (beta_k / gamma_k) * (d_k * p.a12) + p.a22;
    d_prev = d_k;
}

void step_coupled(const ObservationData& obs, double beta_k, double gamma_k, Vec& theta, Vec& w) {
    Vec dth(theta.size()), dw(w.size());
    drift_into(obs.b1, obs.a11, theta.data(), obs.a12, w.data(), dth.data());
    drift_into(obs.b2, obs.a21, theta.data(), obs.a22, w.data(), dw.data());
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] += beta_k * dth[i];
    for (std::size_t i = 0; i < w.size(); ++i) w[i] += gamma_k * dw[i];
}

double identity_residual(const TtsaProblem& p, const Vec& theta_before, const Vec& w_before,
                         const Vec& theta_after, const Vec& w_after, double beta_k, double gamma_k,
                         const Vec& v, const Vec& w_noise) {
    const Vec lhs = p.delta * (theta_before - p.theta_star);
    Vec rhs(p.d_theta, 0.0);
    const Vec dw = (1.0 / gamma_k) * (w_before - w_after);
    const Vec cw = p.c * dw;
    const Vec cn = p.c * w_noise;
    for (std::size_t i = 0; i < p.d_theta; ++i)
        rhs[i] = (theta_before[i] - theta_after[i]) / beta_k - cw[i] + v[i] - cn[i];
    return vec_max_abs(lhs - rhs) / std::max(1.0, vec_max_abs(lhs));
}

TrajectoryRecord run(const TtsaProblem& p, const NoiseOracle& oracle, const StepSchedule& s,
                     std::int64_t horizon, std::uint64_t seed, std::uint64_t stream,
                     const RunOptions& opts) {
    require(horizon >= 0, ErrorCode::InvalidArgument, "horizon must be nonnegative");
    require(oracle.d_theta == p.d_theta && oracle.d_w == p.d_w, ErrorCode::DimensionMismatch,
            "oracle dimensions do not match the problem");
    for (std::size_t i = 0; i < opts.checkpoints.size(); ++i) {
        require(opts.checkpoints[i] >= 0 && opts.checkpoints[i] <= horizon,
                ErrorCode::InvalidArgument, "checkpoint index outside [0, horizon]");
        if (i > 0)
            require(opts.checkpoints[i] > opts.checkpoints[i - 1], ErrorCode::InvalidArgument,
                    "checkpoint indices must be strictly increasing");
    }

    const std::size_t dt = p.d_theta, dw = p.d_w;
    Vec theta = opts.theta0.empty() ? Vec(dt, 0.0) : opts.theta0;
    Vec w = opts.w0.empty() ? Vec(dw, 0.0) : opts.w0;
    require(theta.size() == dt && w.size() == dw, ErrorCode::DimensionMismatch,
            "start point dimensions do not match the problem");

    TrajectoryRecord rec;
    rec.n = horizon;
    if (opts.log_noise) {
        rec.noise_log.emplace();
        rec.noise_log->reserve(static_cast<std::size_t>(horizon));
    }

    OracleSampler sampler(oracle, seed, stream);
    rec.x0 = sampler.markov_state();

    Vec sum_t(dt, 0.0), comp_t(dt, 0.0), sum_w(dw, 0.0), comp_w(dw, 0.0);
    Vec dth(dt), dwv(dw), mth(dt), mwv(dw), v(dt), wn(dw), err_t(dt), err_w(dw);
    const bool need_noise = opts.log_noise || opts.track_decoupling || opts.track_identity;

    std::optional<DecouplingState> dec;
    Vec tt, wt;
    if (opts.track_decoupling) {
        dec.emplace(p);
        tt = theta - p.theta_star;
        wt = (w - p.w_star) + dec->d_prev * tt;
    }

    auto cp_it = opts.checkpoints.begin();
    double last_ident = 0.0;
    auto emit_checkpoint = [&](std::int64_t idx) {
        Checkpoint cp;
        cp.k = idx;
        cp.theta = theta;
        cp.w = w;
        if (idx > 0) {
            cp.theta_bar = (1.0 / static_cast<double>(idx)) * sum_t;
            cp.w_bar = (1.0 / static_cast<double>(idx)) * sum_w;
        }
        cp.theta_tilde = theta - p.theta_star;
        // The translated fast coordinate needs the change-of-variables matrix;
        // without it the plain difference is recorded.
        cp.w_tilde = dec ? (w - p.w_star) + dec->d_prev * cp.theta_tilde : w - p.w_star;
        cp.identity_residual = last_ident;
        rec.checkpoints.push_back(std::move(cp));
    };
    if (cp_it != opts.checkpoints.end() && *cp_it == 0) {
        emit_checkpoint(0);
        ++cp_it;
    }

    for (std::int64_t k = 0; k < horizon; ++k) {
        const double bk = beta(s, k);
        const double gk = gamma(s, k);
        const ObservationData& obs = sampler.next();
        drift_into(obs.b1, obs.a11, theta.data(), obs.a12, w.data(), dth.data());
        drift_into(obs.b2, obs.a21, theta.data(), obs.a22, w.data(), dwv.data());
        if (need_noise) {
            drift_into(p.b1, p.a11, theta.data(), p.a12, w.data(), mth.data());
            drift_into(p.b2, p.a21, theta.data(), p.a22, w.data(), mwv.data());
            for (std::size_t i = 0; i < dt; ++i) v[i] = dth[i] - mth[i];
            for (std::size_t i = 0; i < dw; ++i) wn[i] = dwv[i] - mwv[i];
            for (std::size_t i = 0; i < dt; ++i) err_t[i] = theta[i] - p.theta_star[i];
            for (std::size_t i = 0; i < dw; ++i) err_w[i] = w[i] - p.w_star[i];
        }
        if (opts.log_noise) {
            NoiseSample ns;
            ns.state = sampler.last_index();
            EpsPair e = eps_at(p, obs);
            ns.eps_v = std::move(e.eps_v);
            ns.eps_w = std::move(e.eps_w);
            ns.v = v;
            ns.w_noise = wn;
            ns.theta_err = err_t;
            ns.w_err = err_w;
            rec.noise_log->push_back(std::move(ns));
        }
        Vec tt_next, wt_next;
        if (dec) {
            dec->advance(p, bk, gk, k);
            tt_next = tt - bk * (dec->b11_k * tt) - bk * (p.a12 * wt) + bk * v;
            wt_next = wt - gk * (dec->b22_k * wt) + bk * (dec->d_k * v) + gk * wn;
        }
        for (std::size_t i = 0; i < dt; ++i) theta[i] += bk * dth[i];
        for (std::size_t i = 0; i < dw; ++i) w[i] += gk * dwv[i];
        if (opts.track_identity) {
            const Vec lhs = p.delta * err_t;
            const Vec cw = p.c * dwv;
            const Vec cn = p.c * wn;
            double num = 0.0;
            for (std::size_t i = 0; i < dt; ++i) {
                const double rhs = -dth[i] + cw[i] + v[i] - cn[i];
                num = std::max(num, std::abs(lhs[i] - rhs));
            }
            last_ident = num / std::max(1.0, vec_max_abs(lhs));
            rec.identity_residual_max = std::max(rec.identity_residual_max, last_ident);
        }
        if (dec) {
            const Vec tt_ref = theta - p.theta_star;
            const Vec wt_ref = (w - p.w_star) + dec->d_k * tt_ref;
            const double scale =
                std::max({1.0, vec_max_abs(tt_ref), vec_max_abs(wt_ref)});
            const double dev =
                std::max(vec_max_abs(tt_next - tt_ref), vec_max_abs(wt_next - wt_ref)) / scale;
            rec.decoupling_dev_max = std::max(rec.decoupling_dev_max, dev);
            tt = std::move(tt_next);
            wt = std::move(wt_next);
        }
        const double m1 = vec_max_abs(theta), m2 = vec_max_abs(w);
        if (!(m1 <= opts.divergence_limit && m2 <= opts.divergence_limit))
            throw Error(ErrorCode::Diverged,
                        "iterate norm exceeded " + std::to_string(opts.divergence_limit) +
                            " at step " + std::to_string(k));
        kahan_add(sum_t, comp_t, theta);
        kahan_add(sum_w, comp_w, w);
        if (cp_it != opts.checkpoints.end() && *cp_it == k + 1) {
            emit_checkpoint(k + 1);
            ++cp_it;
        }
    }

    rec.theta = theta;
    rec.w = w;
    if (horizon > 0) {
        rec.theta_bar = (1.0 / static_cast<double>(horizon)) * sum_t;
        rec.w_bar = (1.0 / static_cast<double>(horizon)) * sum_w;
    }
    if (dec) rec.l_gain_max = dec->l_gain_max;
    return rec;
}

DecoupledTrajectory replay_decoupled(const TtsaProblem& p, const StepSchedule& s,
                                     const std::vector<NoiseSample>& noise_log, const Vec& theta0,
                                     const Vec& w0) {
    require(theta0.size() == p.d_theta && w0.size() == p.d_w, ErrorCode::DimensionMismatch,
            "start point dimensions do not match the problem");
    DecouplingState dec(p);
    DecoupledTrajectory out;
    Vec tt = theta0 - p.theta_star;
    Vec wt = (w0 - p.w_star) + dec.d_prev * tt;
    out.theta_tilde.push_back(tt);
    out.w_tilde.push_back(wt);
    for (std::size_t k = 0; k < noise_log.size(); ++k) {
        const double bk = beta(s, static_cast<std::int64_t>(k));
        const double gk = gamma(s, static_cast<std::int64_t>(k));
        dec.advance(p, bk, gk, static_cast<std::int64_t>(k));
        const Vec& v = noise_log[k].v;
        const Vec& wn = noise_log[k].w_noise;
        Vec tt_next = tt - bk * (dec.b11_k * tt) - bk * (p.a12 * wt) + bk * v;
        Vec wt_next = wt - gk * (dec.b22_k * wt) + bk * (dec.d_k * v) + gk * wn;
        tt = std::move(tt_next);
        wt = std::move(wt_next);
        out.theta_tilde.push_back(tt);
        out.w_tilde.push_back(wt);
    }
    out.l_gain_max = dec.l_gain_max;
    return out;
}

MatrixProducts matrix_products(const TtsaProblem& p, const StepSchedule& s, std::int64_t m,
                               std::int64_t k) {
    require(m <= k + 1, ErrorCode::InvalidArgument, "product range needs m <= k+1");
    MatrixProducts out;
    out.g1 = Mat::identity(p.d_theta);
    out.g2 = Mat::identity(p.d_w);
    if (m > k) return out;
    const LyapunovCertificate cert_d = solve_lyapunov(p.delta);
    const LyapunovCertificate cert22 = solve_lyapunov(p.a22);
    const Mat eye_t = Mat::identity(p.d_theta);
    const Mat eye_w = Mat::identity(p.d_w);
    for (std::int64_t i = m; i <= k; ++i) {
        const double bi = beta(s, i);
        const double gi = gamma(s, i);
        out.g1 = (eye_t - bi * p.delta) * out.g1;
        out.g2 = (eye_w - gi * p.a22) * out.g2;
        out.p1 *= 1.0 - 0.5 * bi * cert_d.contraction_rate;
        out.p2 *= 1.0 - 0.5 * gi * cert22.contraction_rate;
    }
    return out;
}

LastIterateStatistic leading_statistic_last(const TtsaProblem& p, const StepSchedule& s,
                                            const std::vector<NoiseSample>& noise_log,
                                            const Vec& theta_final) {
    if (noise_log.empty())
        throw Error(ErrorCode::MissingNoiseLog,
                    "the last-iterate statistic needs a recorded noise sequence");
    require(theta_final.size() == p.d_theta, ErrorCode::DimensionMismatch,
            "final iterate dimension mismatch");
    const Mat eye = Mat::identity(p.d_theta);
    Vec stat(p.d_theta, 0.0);
    for (std::size_t j = 0; j < noise_log.size(); ++j) {
        const double bj = beta(s, static_cast<std::int64_t>(j));
        // psi_{j+1} built from the solution-evaluated noise; the centered-matrix
        // contributions stay in the residual.
        const Vec psi = noise_log[j].eps_v - p.c * noise_log[j].eps_w;
        stat = (eye - bj * p.delta) * stat + bj * psi;
    }
    LastIterateStatistic out;
    out.statistic = stat;
    out.residual = (theta_final - p.theta_star) - stat;
    return out;
}

}  // namespace ttsa
