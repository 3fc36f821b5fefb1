#include "model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ttsa {

namespace {

void require(bool cond, ErrorCode code, const std::string& msg) {
    if (!cond) throw Error(code, msg);
}

void check_obs_dims(const ObservationData& o, std::size_t dt, std::size_t dw,
                    const std::string& what) {
    require(o.a11.rows() == dt && o.a11.cols() == dt, ErrorCode::DimensionMismatch, what + ".a11");
    require(o.a12.rows() == dt && o.a12.cols() == dw, ErrorCode::DimensionMismatch, what + ".a12");
    require(o.a21.rows() == dw && o.a21.cols() == dt, ErrorCode::DimensionMismatch, what + ".a21");
    require(o.a22.rows() == dw && o.a22.cols() == dw, ErrorCode::DimensionMismatch, what + ".a22");
    require(o.b1.size() == dt, ErrorCode::DimensionMismatch, what + ".b1");
    require(o.b2.size() == dw, ErrorCode::DimensionMismatch, what + ".b2");
    require(o.a11.all_finite() && o.a12.all_finite() && o.a21.all_finite() && o.a22.all_finite(),
            ErrorCode::InvalidArgument, what + " has non-finite entries");
}

double entry_variance(double amp, EntryDist dist) {
    return dist == EntryDist::Rademacher ? amp * amp : amp * amp / 3.0;
}

// Weighted covariance of eps vectors: sum_i w_i (x_i - m)(y_i - m')^T.
Mat weighted_cov(const std::vector<Vec>& xs, const std::vector<Vec>& ys, const Vec& w,
                 const Vec& mx, const Vec& my) {
    Mat s(mx.size(), my.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t r = 0; r < mx.size(); ++r) {
            const double xr = xs[i][r] - mx[r];
            if (xr == 0.0) continue;
            for (std::size_t c = 0; c < my.size(); ++c)
                s(r, c) += w[i] * xr * (ys[i][c] - my[c]);
        }
    }
    return s;
}

}  // namespace

TtsaProblem make_problem(Mat a11, Mat a12, Mat a21, Mat a22, Vec b1, Vec b2) {
    TtsaProblem p;
    p.d_theta = a11.rows();
    p.d_w = a22.rows();
    p.a11 = std::move(a11);
    p.a12 = std::move(a12);
    p.a21 = std::move(a21);
    p.a22 = std::move(a22);
    p.b1 = std::move(b1);
    p.b2 = std::move(b2);
    ObservationData view{p.a11, p.a12, p.a21, p.a22, p.b1, p.b2};
    check_obs_dims(view, p.d_theta, p.d_w, "problem");

    Lu lu22(p.a22);
    if (lu22.cond1() > 1e12)
        throw Error(ErrorCode::Singular, "a22 condition number exceeds 1e12");
    p.a22_inv = lu22.inverse();
    p.c = p.a12 * p.a22_inv;
    p.delta = p.a11 - p.c * p.a21;

    Lu lud(p.delta);
    if (lud.cond1() > 1e12)
        throw Error(ErrorCode::Singular, "delta condition number exceeds 1e12");
    p.theta_star = lud.solve(p.b1 - p.c * p.b2);
    p.w_star = lu22.solve(p.b2 - p.a21 * p.theta_star);

    const double r1 = max_abs(p.a11 * p.theta_star + p.a12 * p.w_star - p.b1);
    const double r2 = max_abs(p.a21 * p.theta_star + p.a22 * p.w_star - p.b2);
    if (std::max(r1, r2) > 1e-10)
        throw Error(ErrorCode::NumericalFailure,
                    "solution residual " + std::to_string(std::max(r1, r2)) + " exceeds 1e-10");
    return p;
}

Solution solve_exact(const TtsaProblem& p) { return Solution{p.theta_star, p.w_star}; }

NoiseOracle make_deterministic_oracle(const TtsaProblem& p) {
    MixtureComponent comp;
    comp.weight = 1.0;
    comp.obs = ObservationData{p.a11, p.a12, p.a21, p.a22, p.b1, p.b2};
    return make_mixture_oracle({comp});
}

NoiseOracle make_mixture_oracle(std::vector<MixtureComponent> components) {
    require(!components.empty(), ErrorCode::ConfigError, "mixture oracle needs components");
    NoiseOracle o;
    o.kind = OracleKind::Mixture;
    o.d_theta = components.front().obs.a11.rows();
    o.d_w = components.front().obs.a22.rows();
    double total = 0.0;
    for (std::size_t i = 0; i < components.size(); ++i) {
        check_obs_dims(components[i].obs, o.d_theta, o.d_w,
                       "mixture component " + std::to_string(i));
        require(components[i].weight > 0.0, ErrorCode::ConfigError,
                "mixture weights must be positive");
        total += components[i].weight;
    }
    require(std::abs(total - 1.0) <= 1e-9, ErrorCode::ConfigError,
            "mixture weights must sum to 1");
    o.components = std::move(components);
    o.cum_weights.resize(o.components.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < o.components.size(); ++i) {
        acc += o.components[i].weight;
        o.cum_weights[i] = acc;
    }
    o.cum_weights.back() = 1.0;
    return o;
}

NoiseOracle make_perturbation_oracle(const TtsaProblem& p, PerturbationAmps amps, EntryDist dist) {
    require(amps.a11 >= 0 && amps.a12 >= 0 && amps.a21 >= 0 && amps.a22 >= 0 && amps.b1 >= 0 &&
                amps.b2 >= 0,
            ErrorCode::ConfigError, "perturbation amplitudes must be nonnegative");
    NoiseOracle o;
    o.kind = OracleKind::Perturbation;
    o.d_theta = p.d_theta;
    o.d_w = p.d_w;
    o.base = ObservationData{p.a11, p.a12, p.a21, p.a22, p.b1, p.b2};
    o.amps = amps;
    o.entry_dist = dist;
    return o;
}

NoiseOracle make_markov_oracle(Mat kernel, std::vector<ObservationData> states) {
    require(kernel.square(), ErrorCode::ConfigError, "markov kernel must be square");
    require(kernel.rows() == states.size(), ErrorCode::ConfigError,
            "markov kernel size must match the number of state observations");
    require(!states.empty(), ErrorCode::ConfigError, "markov oracle needs states");
    const std::size_t n = kernel.rows();
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            require(kernel(i, j) >= 0.0, ErrorCode::ConfigError,
                    "markov kernel entries must be nonnegative");
            row += kernel(i, j);
        }
        require(std::abs(row - 1.0) <= 1e-12, ErrorCode::ConfigError,
                "markov kernel row " + std::to_string(i) + " does not sum to 1");
    }
    NoiseOracle o;
    o.kind = OracleKind::Markov;
    o.d_theta = states.front().a11.rows();
    o.d_w = states.front().a22.rows();
    for (std::size_t i = 0; i < states.size(); ++i)
        check_obs_dims(states[i], o.d_theta, o.d_w, "markov state " + std::to_string(i));
    o.kernel = std::move(kernel);
    o.states = std::move(states);
    o.pi = stationary_distribution(o.kernel);
    const Mat kt = transpose(o.kernel);
    if (max_abs(kt * o.pi - o.pi) > 1e-10)
        throw Error(ErrorCode::NumericalFailure, "stationary law residual exceeds 1e-10");
    o.cum_rows.resize(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            acc += o.kernel(i, j);
            o.cum_rows[i * n + j] = acc;
        }
        o.cum_rows[i * n + n - 1] = 1.0;
    }
    return o;
}

Vec stationary_distribution(const Mat& kernel) {
    const std::size_t n = kernel.rows();
    Mat m = transpose(kernel) - Mat::identity(n);
    for (std::size_t j = 0; j < n; ++j) m(n - 1, j) = 1.0;
    Vec rhs(n, 0.0);
    rhs[n - 1] = 1.0;
    Vec pi;
    try {
        pi = Lu(m).solve(rhs);
    } catch (const Error&) {
        throw Error(ErrorCode::NotErgodic, "no unique stationary law (singular balance system)");
    }
    for (double v : pi)
        if (v < -1e-10 || !std::isfinite(v))
            throw Error(ErrorCode::NotErgodic, "stationary law has negative mass");
    return pi;
}

double max_pairwise_tv(const Mat& kernel) {
    const std::size_t n = kernel.rows();
    double worst = 0.0;
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = x + 1; y < n; ++y) {
            double tv = 0.0;
            for (std::size_t j = 0; j < n; ++j) tv += std::abs(kernel(x, j) - kernel(y, j));
            worst = std::max(worst, 0.5 * tv);
        }
    return worst;
}

int mixing_time(const Mat& kernel, double threshold) {
    require(kernel.square(), ErrorCode::DimensionMismatch, "mixing_time needs a square kernel");
    require(threshold > 0.0 && threshold < 1.0, ErrorCode::InvalidArgument,
            "mixing threshold must lie in (0,1)");
    const std::size_t n = kernel.rows();
    const long cap = static_cast<long>(10.0 * static_cast<double>(n) * static_cast<double>(n) *
                                       std::log(std::max<double>(n, 2))) +
                     1000;
    Mat power = kernel;
    long t = -1;
    double prev_tv = 2.0;
    for (long k = 1; k <= cap; ++k) {
        const double tv = max_pairwise_tv(power);
        if (tv <= threshold) {
            t = k;
            break;
        }
        prev_tv = tv;
        power = power * kernel;
    }
    if (t < 0)
        throw Error(ErrorCode::NotErgodic,
                    "pairwise TV still above threshold after " + std::to_string(cap) + " steps");
    if (t > 1 && prev_tv <= threshold)
        throw Error(ErrorCode::Internal, "mixing time minimality violated");
    // Geometric decay at multiples of t: TV(P^{mt}) <= threshold^m.
    Mat base_t = power;  // P^t
    Mat acc = base_t;
    for (int m = 2; m <= 4; ++m) {
        acc = acc * base_t;
        if (max_pairwise_tv(acc) > std::pow(threshold, m) + 1e-12)
            throw Error(ErrorCode::NumericalFailure,
                        "geometric TV decay violated at multiple " + std::to_string(m));
    }
    return static_cast<int>(t);
}

OracleSampler::OracleSampler(const NoiseOracle& oracle, std::uint64_t seed, std::uint64_t stream)
    : oracle_(&oracle), rng_(seed, stream) {
    if (oracle.kind == OracleKind::Markov) {
        // Stationary start: X_0 ~ pi, so targets computed under pi are exact.
        const double u = rng_.next_double();
        double acc = 0.0;
        state_ = static_cast<int>(oracle.n_states()) - 1;
        for (std::size_t i = 0; i < oracle.n_states(); ++i) {
            acc += oracle.pi[i];
            if (u < acc) {
                state_ = static_cast<int>(i);
                break;
            }
        }
    }
    if (oracle.kind == OracleKind::Perturbation) scratch_ = oracle.base;
}

const ObservationData& OracleSampler::next() {
    switch (oracle_->kind) {
    case OracleKind::Mixture: {
        const double u = rng_.next_double();
        std::size_t lo = 0, hi = oracle_->cum_weights.size() - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (u < oracle_->cum_weights[mid])
                hi = mid;
            else
                lo = mid + 1;
        }
        last_index_ = static_cast<int>(lo);
        return oracle_->components[lo].obs;
    }
    case OracleKind::Perturbation: {
        const auto fill = [&](Mat& dst, const Mat& base, double amp) {
            if (amp == 0.0) {
                if (&dst != &base) dst = base;
                return;
            }
            for (std::size_t i = 0; i < dst.rows() * dst.cols(); ++i) {
                const double u = oracle_->entry_dist == EntryDist::Rademacher
                                     ? (rng_.next_double() < 0.5 ? -amp : amp)
                                     : amp * (2.0 * rng_.next_double() - 1.0);
                dst.data()[i] = base.data()[i] + u;
            }
        };
        const auto fill_vec = [&](Vec& dst, const Vec& base, double amp) {
            for (std::size_t i = 0; i < dst.size(); ++i) {
                const double u = amp == 0.0 ? 0.0
                                 : oracle_->entry_dist == EntryDist::Rademacher
                                     ? (rng_.next_double() < 0.5 ? -amp : amp)
                                     : amp * (2.0 * rng_.next_double() - 1.0);
                dst[i] = base[i] + u;
            }
        };
        fill(scratch_.a11, oracle_->base.a11, oracle_->amps.a11);
        fill(scratch_.a12, oracle_->base.a12, oracle_->amps.a12);
        fill(scratch_.a21, oracle_->base.a21, oracle_->amps.a21);
        fill(scratch_.a22, oracle_->base.a22, oracle_->amps.a22);
        fill_vec(scratch_.b1, oracle_->base.b1, oracle_->amps.b1);
        fill_vec(scratch_.b2, oracle_->base.b2, oracle_->amps.b2);
        last_index_ = -1;
        return scratch_;
    }
    case OracleKind::Markov: {
        const std::size_t n = oracle_->n_states();
        const double u = rng_.next_double();
        const double* row = oracle_->cum_rows.data() + static_cast<std::size_t>(state_) * n;
        std::size_t j = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
            if (u < row[i]) {
                j = i;
                break;
            }
        }
        state_ = static_cast<int>(j);
        last_index_ = state_;
        return oracle_->states[j];
    }
    }
    throw Error(ErrorCode::Internal, "unknown oracle kind");
}

EpsPair eps_at(const TtsaProblem& p, const ObservationData& obs) {
    EpsPair e;
    e.eps_v = obs.b1 - obs.a11 * p.theta_star - obs.a12 * p.w_star;
    e.eps_w = obs.b2 - obs.a21 * p.theta_star - obs.a22 * p.w_star;
    return e;
}

NoiseMoments noise_moments(const TtsaProblem& p, const NoiseOracle& oracle) {
    NoiseMoments m;
    if (oracle.kind == OracleKind::Perturbation) {
        // Independent zero-mean entries: eps blocks are uncorrelated across
        // the V/W rows and have diagonal covariance.
        m.mean_eps_v = Vec(p.d_theta, 0.0);
        m.mean_eps_w = Vec(p.d_w, 0.0);
        double quad_theta = 0.0, quad_w = 0.0;
        for (double t : p.theta_star) quad_theta += t * t;
        for (double w : p.w_star) quad_w += w * w;
        const double vv = entry_variance(oracle.amps.b1, oracle.entry_dist) +
                          entry_variance(oracle.amps.a11, oracle.entry_dist) * quad_theta +
                          entry_variance(oracle.amps.a12, oracle.entry_dist) * quad_w;
        const double vw = entry_variance(oracle.amps.b2, oracle.entry_dist) +
                          entry_variance(oracle.amps.a21, oracle.entry_dist) * quad_theta +
                          entry_variance(oracle.amps.a22, oracle.entry_dist) * quad_w;
        m.sigma_v = Mat(p.d_theta, p.d_theta);
        m.sigma_w = Mat(p.d_w, p.d_w);
        m.sigma_vw = Mat(p.d_theta, p.d_w);
        for (std::size_t i = 0; i < p.d_theta; ++i) m.sigma_v(i, i) = vv;
        for (std::size_t i = 0; i < p.d_w; ++i) m.sigma_w(i, i) = vw;
        return m;
    }
    std::vector<Vec> evs, ews;
    Vec weights;
    if (oracle.kind == OracleKind::Mixture) {
        for (const auto& comp : oracle.components) {
            EpsPair e = eps_at(p, comp.obs);
            evs.push_back(std::move(e.eps_v));
            ews.push_back(std::move(e.eps_w));
            weights.push_back(comp.weight);
        }
    } else {
        for (std::size_t i = 0; i < oracle.n_states(); ++i) {
            EpsPair e = eps_at(p, oracle.states[i]);
            evs.push_back(std::move(e.eps_v));
            ews.push_back(std::move(e.eps_w));
            weights.push_back(oracle.pi[i]);
        }
    }
    m.mean_eps_v = Vec(p.d_theta, 0.0);
    m.mean_eps_w = Vec(p.d_w, 0.0);
    for (std::size_t i = 0; i < evs.size(); ++i) {
        for (std::size_t r = 0; r < p.d_theta; ++r) m.mean_eps_v[r] += weights[i] * evs[i][r];
        for (std::size_t r = 0; r < p.d_w; ++r) m.mean_eps_w[r] += weights[i] * ews[i][r];
    }
    m.sigma_v = weighted_cov(evs, evs, weights, m.mean_eps_v, m.mean_eps_v);
    m.sigma_w = weighted_cov(ews, ews, weights, m.mean_eps_w, m.mean_eps_w);
    m.sigma_vw = weighted_cov(evs, ews, weights, m.mean_eps_v, m.mean_eps_w);
    return m;
}

bool ValidationReport::all_passed(bool ignore_expected) const {
    for (const auto& c : checks)
        if (!c.passed && !(ignore_expected && c.expected_fail)) return false;
    return true;
}

namespace {

ObservationData oracle_mean(const NoiseOracle& o) {
    if (o.kind == OracleKind::Perturbation) return o.base;
    ObservationData m;
    auto add = [](Mat& acc, const Mat& x, double w) {
        if (acc.rows() == 0)
            acc = w * x;
        else
            acc = acc + w * x;
    };
    auto add_vec = [](Vec& acc, const Vec& x, double w) {
        if (acc.empty()) acc = Vec(x.size(), 0.0);
        for (std::size_t i = 0; i < x.size(); ++i) acc[i] += w * x[i];
    };
    if (o.kind == OracleKind::Mixture) {
        for (const auto& comp : o.components) {
            add(m.a11, comp.obs.a11, comp.weight);
            add(m.a12, comp.obs.a12, comp.weight);
            add(m.a21, comp.obs.a21, comp.weight);
            add(m.a22, comp.obs.a22, comp.weight);
            add_vec(m.b1, comp.obs.b1, comp.weight);
            add_vec(m.b2, comp.obs.b2, comp.weight);
        }
    } else {
        for (std::size_t i = 0; i < o.states.size(); ++i) {
            add(m.a11, o.states[i].a11, o.pi[i]);
            add(m.a12, o.states[i].a12, o.pi[i]);
            add(m.a21, o.states[i].a21, o.pi[i]);
            add(m.a22, o.states[i].a22, o.pi[i]);
            add_vec(m.b1, o.states[i].b1, o.pi[i]);
            add_vec(m.b2, o.states[i].b2, o.pi[i]);
        }
    }
    return m;
}

double mean_centering_deviation(const TtsaProblem& p, const NoiseOracle& o) {
    ObservationData m = oracle_mean(o);
    double dev = 0.0;
    dev = std::max(dev, max_abs(m.a11 - p.a11));
    dev = std::max(dev, max_abs(m.a12 - p.a12));
    dev = std::max(dev, max_abs(m.a21 - p.a21));
    dev = std::max(dev, max_abs(m.a22 - p.a22));
    dev = std::max(dev, max_abs(m.b1 - p.b1));
    dev = std::max(dev, max_abs(m.b2 - p.b2));
    return dev;
}

double sup_block_bound(const NoiseOracle& o, const TtsaProblem& p, bool centered) {
    auto block = [&](const Mat& x, const Mat& base) {
        return centered ? op_norm(x - base) : op_norm(x);
    };
    if (o.kind == OracleKind::Perturbation) {
        // ||U||_2 <= ||U||_F <= amp * sqrt(rows*cols) for entrywise-bounded U.
        auto bound = [&](const Mat& base, double amp) {
            const double pert =
                amp * std::sqrt(static_cast<double>(base.rows() * base.cols()));
            return centered ? pert : op_norm(base) + pert;
        };
        double b = 0.0;
        b = std::max(b, bound(o.base.a11, o.amps.a11));
        b = std::max(b, bound(o.base.a12, o.amps.a12));
        b = std::max(b, bound(o.base.a21, o.amps.a21));
        b = std::max(b, bound(o.base.a22, o.amps.a22));
        return b;
    }
    double b = 0.0;
    auto scan = [&](const ObservationData& obs) {
        b = std::max(b, block(obs.a11, p.a11));
        b = std::max(b, block(obs.a12, p.a12));
        b = std::max(b, block(obs.a21, p.a21));
        b = std::max(b, block(obs.a22, p.a22));
    };
    if (o.kind == OracleKind::Mixture)
        for (const auto& comp : o.components) scan(comp.obs);
    else
        for (const auto& s : o.states) scan(s);
    return b;
}

}  // namespace

ValidationReport validate_assumptions(const TtsaProblem& p, const NoiseOracle& oracle) {
    ValidationReport rep;
    const bool markov = oracle.kind == OracleKind::Markov;

    {  // Zero-mean observations under the sampling law (stationary law for chains).
        AssumptionCheck c;
        c.id = markov ? "B1-mean" : "A1";
        c.name = markov ? "stationary-mean observations match the problem matrices"
                        : "observations are mean-centered at the problem matrices";
        c.deviation = mean_centering_deviation(p, oracle);
        c.passed = c.deviation <= 1e-10;
        c.detail = "max deviation " + std::to_string(c.deviation);
        rep.checks.push_back(std::move(c));
    }

    {  // Bounded noise implies finite higher moments.
        AssumptionCheck c;
        c.id = "A2";
        c.name = "noise has finite higher moments (bounded families)";
        c.passed = true;
        c.detail = "all built-in oracle families are bounded";
        rep.checks.push_back(std::move(c));
    }

    {  // Constant conditional covariance of (eps_v, eps_w).
        AssumptionCheck c;
        c.id = "A3";
        c.name = "conditional eps covariance is state-independent";
        if (!markov) {
            c.passed = true;
            c.deviation = 0.0;
            c.detail = "draws are i.i.d.; the conditional law does not depend on the past";
        } else {
            c.expected_fail = true;
            const std::size_t n = oracle.n_states();
            const std::size_t d = p.d_theta + p.d_w;
            std::vector<Vec> eps(n);
            for (std::size_t x = 0; x < n; ++x) {
                EpsPair e = eps_at(p, oracle.states[x]);
                eps[x] = e.eps_v;
                eps[x].insert(eps[x].end(), e.eps_w.begin(), e.eps_w.end());
            }
            std::vector<Mat> cond(n, Mat(d, d));
            for (std::size_t x = 0; x < n; ++x) {
                Vec mean(d, 0.0);
                for (std::size_t y = 0; y < n; ++y)
                    for (std::size_t i = 0; i < d; ++i) mean[i] += oracle.kernel(x, y) * eps[y][i];
                for (std::size_t y = 0; y < n; ++y)
                    for (std::size_t i = 0; i < d; ++i)
                        for (std::size_t j = 0; j < d; ++j)
                            cond[x](i, j) += oracle.kernel(x, y) * (eps[y][i] - mean[i]) *
                                             (eps[y][j] - mean[j]);
            }
            double dev = 0.0;
            for (std::size_t x = 0; x < n; ++x)
                for (std::size_t y = x + 1; y < n; ++y)
                    dev = std::max(dev, max_abs(cond[x] - cond[y]));
            c.deviation = dev;
            c.passed = dev <= 1e-10;
            c.detail = c.passed ? "conditional covariance constant across states"
                                : "not constant; max deviation " + std::to_string(dev) +
                                      " (expected for state-dependent chains)";
        }
        rep.checks.push_back(std::move(c));
    }

    {  // Stability of the deterministic part.
        AssumptionCheck c;
        c.id = "A4";
        c.name = "-a22 and -delta are Hurwitz";
        HurwitzReport h22 = eig_check_hurwitz(p.a22);
        HurwitzReport hd = eig_check_hurwitz(p.delta);
        c.passed = h22.negated_is_hurwitz && hd.negated_is_hurwitz;
        c.deviation = std::min(h22.min_real_part, hd.min_real_part);
        c.detail = "min real parts: a22 " + std::to_string(h22.min_real_part) + ", delta " +
                   std::to_string(hd.min_real_part);
        rep.checks.push_back(std::move(c));
    }

    {  // Sup-norm bounds on observation blocks.
        AssumptionCheck c;
        c.id = "A6";
        c.name = "observation blocks are uniformly bounded";
        const double raw = sup_block_bound(oracle, p, false);
        const double centered = sup_block_bound(oracle, p, true);
        c.passed = std::isfinite(raw) && std::isfinite(centered);
        c.deviation = std::max(raw, centered);
        c.detail = "b_A = " + std::to_string(std::max(raw, centered));
        rep.checks.push_back(std::move(c));
    }

    if (markov) {  // Uniform geometric ergodicity via the mixing time.
        AssumptionCheck c;
        c.id = "B1-uge";
        c.name = "kernel is uniformly geometrically ergodic";
        try {
            const int t = mixing_time(oracle.kernel);
            c.passed = true;
            c.detail = "t_mix = " + std::to_string(t);
        } catch (const Error& e) {
            c.passed = false;
            c.detail = e.what();
        }
        rep.checks.push_back(std::move(c));
    }

    return rep;
}

}  // namespace ttsa
