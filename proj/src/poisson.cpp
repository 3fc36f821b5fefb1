#include "poisson.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "errors.hpp"
#include "linalg.hpp"

namespace ttsa {

namespace {

void require(bool cond, ErrorCode code, const std::string& msg) {
    if (!cond) throw Error(code, msg);
}

const NoiseOracle& require_markov(const NoiseOracle& o) {
    require(o.kind == OracleKind::Markov, ErrorCode::InvalidArgument,
            "operation needs a finite-state chain oracle");
    return o;
}

}  // namespace

PoissonOperator::PoissonOperator(Mat kernel) : kernel_(std::move(kernel)) {
    require(kernel_.square() && kernel_.rows() > 0, ErrorCode::DimensionMismatch,
            "kernel must be square");
    const std::size_t n = kernel_.rows();
    pi_ = stationary_distribution(kernel_);
    // Spectral gap from the second-largest eigenvalue modulus; the Perron
    // root of a stochastic matrix is exactly 1, so a second modulus near 1
    // flags a reducible or periodic chain.
    std::vector<double> moduli;
    for (const auto& ev : eig_general(kernel_)) moduli.push_back(std::abs(ev));
    std::sort(moduli.rbegin(), moduli.rend());
    if (std::abs(moduli.front() - 1.0) > 1e-8)
        throw Error(ErrorCode::NumericalFailure,
                    "leading eigenvalue " + std::to_string(moduli.front()) +
                        " of a stochastic kernel is off 1");
    gap_ = moduli.size() > 1 ? 1.0 - moduli[1] : 1.0;
    if (gap_ < 1e-6)
        throw Error(ErrorCode::NotErgodic,
                    "spectral gap " + std::to_string(gap_) + " below 1e-6");
    t_mix_ = mixing_time(kernel_);
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            m(i, j) = (i == j ? 1.0 : 0.0) - kernel_(i, j) + pi_[j];
    Lu lu(m);
    if (lu.cond1() > 1e12)
        throw Error(ErrorCode::NotErgodic, "fundamental matrix numerically singular");
    z_ = lu.inverse();
}

double PoissonOperator::pi_mean(const Vec& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < pi_.size(); ++i) s += pi_[i] * f[i];
    return s;
}

Vec PoissonOperator::solve_scalar(const Vec& f) const {
    require(f.size() == pi_.size(), ErrorCode::DimensionMismatch,
            "per-state table size mismatch");
    const double mean = pi_mean(f);
    Vec centered(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) centered[i] = f[i] - mean;
    return z_ * centered;
}

Vec PoissonOperator::apply_kernel(const Vec& f) const {
    require(f.size() == pi_.size(), ErrorCode::DimensionMismatch,
            "per-state table size mismatch");
    return kernel_ * f;
}

PoissonSolution solve_poisson(const Mat& kernel, const std::vector<Vec>& f) {
    PoissonOperator op(kernel);
    const std::size_t n = kernel.rows();
    require(f.size() == n, ErrorCode::DimensionMismatch,
            "one table entry per state is required");
    const std::size_t m = f.empty() ? 0 : f.front().size();
    for (const auto& row : f)
        require(row.size() == m, ErrorCode::DimensionMismatch,
                "per-state values must share one dimension");

    PoissonSolution sol;
    sol.f_hat.assign(n, Vec(m, 0.0));
    sol.p_f_hat.assign(n, Vec(m, 0.0));
    sol.pi_f.assign(m, 0.0);
    Vec table(n);
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t x = 0; x < n; ++x) table[x] = f[x][j];
        sol.pi_f[j] = op.pi_mean(table);
        const Vec hat = op.solve_scalar(table);
        const Vec p_hat = op.apply_kernel(hat);
        for (std::size_t x = 0; x < n; ++x) {
            sol.f_hat[x][j] = hat[x];
            sol.p_f_hat[x][j] = p_hat[x];
        }
    }

    double sup_f = 0.0, sup_hat = 0.0, worst_residual = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
        for (std::size_t j = 0; j < m; ++j) {
            sup_f = std::max(sup_f, std::abs(f[x][j]));
            sup_hat = std::max(sup_hat, std::abs(sol.f_hat[x][j]));
            const double res =
                sol.f_hat[x][j] - sol.p_f_hat[x][j] - (f[x][j] - sol.pi_f[j]);
            worst_residual = std::max(worst_residual, std::abs(res));
        }
    }
    if (worst_residual > 1e-10)
        throw Error(ErrorCode::NumericalFailure,
                    "balance-equation residual " + std::to_string(worst_residual) +
                        " exceeds 1e-10");
    const double bound = (8.0 / 3.0) * op.t_mix() * sup_f;
    if (sup_hat > bound + 1e-12)
        throw Error(ErrorCode::NumericalFailure,
                    "solution sup-norm " + std::to_string(sup_hat) +
                        " exceeds the mixing-time bound " + std::to_string(bound));
    return sol;
}

PoissonSolution solve_poisson(const NoiseOracle& oracle, const std::vector<Vec>& f) {
    return solve_poisson(require_markov(oracle).kernel, f);
}

namespace {

// Flattens a per-state matrix-valued function into per-state vectors so the
// coordinatewise solver applies.
std::vector<Vec> flatten_blocks(const NoiseOracle& o, const Mat& mean,
                                const Mat ObservationData::*block) {
    std::vector<Vec> out(o.n_states());
    for (std::size_t x = 0; x < o.n_states(); ++x) {
        const Mat& m = o.states[x].*block;
        Vec row(m.rows() * m.cols());
        for (std::size_t i = 0; i < row.size(); ++i) row[i] = m.data()[i] - mean.data()[i];
        out[x] = std::move(row);
    }
    return out;
}

// y = y + sign * reshape(flat_tables[state], r x c) * x
void add_block_times(Vec& y, const Vec& flat, std::size_t rows, std::size_t cols, const Vec& x,
                     double sign) {
    for (std::size_t i = 0; i < rows; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < cols; ++j) acc += flat[i * cols + j] * x[j];
        y[i] += sign * acc;
    }
}

}  // namespace

std::vector<NoiseSplit> split_noise(const TtsaProblem& p, const NoiseOracle& oracle,
                                    const std::vector<NoiseSample>& noise_log, int x0) {
    require_markov(oracle);
    if (noise_log.empty())
        throw Error(ErrorCode::MissingNoiseLog, "noise split needs a recorded noise sequence");
    const std::size_t n = oracle.n_states();
    require(x0 >= 0 && static_cast<std::size_t>(x0) < n, ErrorCode::InvalidArgument,
            "initial chain state out of range");

    std::vector<Vec> eps_v_tab(n), eps_w_tab(n);
    for (std::size_t x = 0; x < n; ++x) {
        EpsPair e = eps_at(p, oracle.states[x]);
        eps_v_tab[x] = std::move(e.eps_v);
        eps_w_tab[x] = std::move(e.eps_w);
    }
    const PoissonSolution hv = solve_poisson(oracle.kernel, eps_v_tab);
    const PoissonSolution hw = solve_poisson(oracle.kernel, eps_w_tab);
    const PoissonSolution h11 = solve_poisson(oracle.kernel, flatten_blocks(oracle, p.a11, &ObservationData::a11));
    const PoissonSolution h12 = solve_poisson(oracle.kernel, flatten_blocks(oracle, p.a12, &ObservationData::a12));
    const PoissonSolution h21 = solve_poisson(oracle.kernel, flatten_blocks(oracle, p.a21, &ObservationData::a21));
    const PoissonSolution h22 = solve_poisson(oracle.kernel, flatten_blocks(oracle, p.a22, &ObservationData::a22));

    const std::size_t dt = p.d_theta, dw = p.d_w;
    std::vector<NoiseSplit> out(noise_log.size());
    int prev = x0;
    for (std::size_t k = 0; k < noise_log.size(); ++k) {
        const NoiseSample& ns = noise_log[k];
        require(ns.state >= 0 && static_cast<std::size_t>(ns.state) < n,
                ErrorCode::InvalidArgument, "logged state out of range");
        const std::size_t cur = static_cast<std::size_t>(ns.state);
        const std::size_t pre = static_cast<std::size_t>(prev);
        NoiseSplit& sp = out[k];
        sp.v0.assign(dt, 0.0);
        sp.v1.assign(dt, 0.0);
        sp.w0.assign(dw, 0.0);
        sp.w1.assign(dw, 0.0);
        for (std::size_t i = 0; i < dt; ++i) {
            sp.v0[i] = hv.f_hat[cur][i] - hv.p_f_hat[pre][i];
            sp.v1[i] = hv.p_f_hat[pre][i] - hv.p_f_hat[cur][i];
        }
        for (std::size_t i = 0; i < dw; ++i) {
            sp.w0[i] = hw.f_hat[cur][i] - hw.p_f_hat[pre][i];
            sp.w1[i] = hw.p_f_hat[pre][i] - hw.p_f_hat[cur][i];
        }
        // Centered-matrix contributions, with the kernel-averaged tables
        // carrying the same martingale/remainder split.
        auto block_terms = [&](const PoissonSolution& h, std::size_t rows, std::size_t cols,
                               const Vec& err, Vec& part0, Vec& part1) {
            Vec cur_minus_prev(rows * cols), pcur_minus_pprev(rows * cols);
            for (std::size_t i = 0; i < rows * cols; ++i) {
                cur_minus_prev[i] = h.f_hat[cur][i] - h.p_f_hat[pre][i];
                pcur_minus_pprev[i] = h.p_f_hat[cur][i] - h.p_f_hat[pre][i];
            }
            add_block_times(part0, cur_minus_prev, rows, cols, err, -1.0);
            add_block_times(part1, pcur_minus_pprev, rows, cols, err, 1.0);
        };
        block_terms(h11, dt, dt, ns.theta_err, sp.v0, sp.v1);
        block_terms(h12, dt, dw, ns.w_err, sp.v0, sp.v1);
        block_terms(h21, dw, dt, ns.theta_err, sp.w0, sp.w1);
        block_terms(h22, dw, dw, ns.w_err, sp.w0, sp.w1);
        prev = ns.state;
    }
    return out;
}

Mat markov_asymptotic_covariance(const TtsaProblem& p, const NoiseOracle& oracle) {
    require_markov(oracle);
    const std::size_t n = oracle.n_states();
    std::vector<Vec> psi(n);
    for (std::size_t x = 0; x < n; ++x) {
        EpsPair e = eps_at(p, oracle.states[x]);
        psi[x] = e.eps_v - p.c * e.eps_w;
    }
    const PoissonSolution hat = solve_poisson(oracle.kernel, psi);
    const std::size_t d = p.d_theta;
    Mat sigma(d, d);
    for (std::size_t x = 0; x < n; ++x) {
        for (std::size_t y = 0; y < n; ++y) {
            const double wxy = oracle.pi[x] * oracle.kernel(x, y);
            if (wxy == 0.0) continue;
            for (std::size_t i = 0; i < d; ++i) {
                const double di = hat.f_hat[y][i] - hat.p_f_hat[x][i];
                for (std::size_t j = 0; j < d; ++j)
                    sigma(i, j) += wxy * di * (hat.f_hat[y][j] - hat.p_f_hat[x][j]);
            }
        }
    }
    // Exact symmetry up to roundoff; symmetrize so downstream SPD checks are clean.
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) {
            const double s = 0.5 * (sigma(i, j) + sigma(j, i));
            sigma(i, j) = s;
            sigma(j, i) = s;
        }
    return sigma;
}

}  // namespace ttsa
