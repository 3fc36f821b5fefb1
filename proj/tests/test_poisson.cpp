#include "doctest.h"

#include <cmath>

#include "engine.hpp"
#include "errors.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "poisson.hpp"

using namespace ttsa;

namespace {

Mat kernel_three() { return Mat{{0.2, 0.5, 0.3}, {0.4, 0.4, 0.2}, {0.1, 0.3, 0.6}}; }

/// Markov oracle on kernel_fast with state-dependent a11 and b1; the
/// stationary means of both blocks recover the problem blocks.
NoiseOracle markov_matrix_oracle(const TtsaProblem& p) {
    ObservationData s0{Mat{{1.4}}, p.a12, p.a21, p.a22, Vec{2.0}, Vec{0.6}};
    ObservationData s1{Mat{{0.8}}, p.a12, p.a21, p.a22, Vec{0.5}, Vec{0.3}};
    return make_markov_oracle(fixtures::kernel_fast(), {s0, s1});
}

}  // namespace

TEST_CASE("stationary law, spectral gap, and mixing time accessors") {
    PoissonOperator fast(fixtures::kernel_fast());
    CHECK(fast.pi()[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(fast.pi()[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(fast.t_mix() == 1);
    CHECK(fast.t_mix() == refcalc::mixing_time_brute(fixtures::kernel_fast()));
    CHECK(fast.spectral_gap() == doctest::Approx(0.75).epsilon(1e-12));

    PoissonOperator slow(fixtures::kernel_slow());
    CHECK(slow.pi()[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(slow.t_mix() == 4);
    CHECK(slow.t_mix() == refcalc::mixing_time_brute(fixtures::kernel_slow()));
    CHECK(slow.spectral_gap() == doctest::Approx(0.3).epsilon(1e-12));

    const Vec pi3 = PoissonOperator(kernel_three()).pi();
    const Vec ref = refcalc::stationary_power(kernel_three());
    for (std::size_t x = 0; x < 3; ++x) CHECK(pi3[x] == doctest::Approx(ref[x]).epsilon(1e-10));
}

TEST_CASE("scalar solve on a two-state kernel has closed-form values") {
    PoissonOperator op(fixtures::kernel_fast());
    const Vec f{1.0, 3.0};
    CHECK(op.pi_mean(f) == doctest::Approx(7.0 / 3.0).epsilon(1e-13));

    // mean-zero functions are eigenfunctions here, so g = (f - pi f)/(1 - 1/4)
    const Vec g = op.solve_scalar(f);
    CHECK(g[0] == doctest::Approx(-16.0 / 9.0).epsilon(1e-12));
    CHECK(g[1] == doctest::Approx(8.0 / 9.0).epsilon(1e-12));

    const Vec series = refcalc::poisson_series(fixtures::kernel_fast(), f);
    CHECK(ttsa::max_abs(g - series) < 1e-10);

    // defining identity and normalization
    const Vec pg = op.apply_kernel(g);
    for (std::size_t x = 0; x < 2; ++x)
        CHECK(g[x] - pg[x] == doctest::Approx(f[x] - 7.0 / 3.0).epsilon(1e-12));
    CHECK(std::abs(op.pi_mean(g)) < 1e-12);
}

TEST_CASE("vector solve matches the telescoping series coordinatewise") {
    const Mat kernel = kernel_three();
    const std::vector<Vec> f = {Vec{1.0, 2.0}, Vec{0.0, -1.0}, Vec{3.0, 1.0}};
    const PoissonSolution sol = solve_poisson(kernel, f);
    REQUIRE(sol.f_hat.size() == 3);
    REQUIRE(sol.pi_f.size() == 2);

    const Vec pi = refcalc::stationary_power(kernel);
    for (std::size_t c = 0; c < 2; ++c) {
        Vec fc(3);
        for (std::size_t x = 0; x < 3; ++x) fc[x] = f[x][c];
        const Vec ref = refcalc::poisson_series(kernel, fc);
        double pif = 0.0;
        for (std::size_t x = 0; x < 3; ++x) pif += pi[x] * fc[x];
        CHECK(sol.pi_f[c] == doctest::Approx(pif).epsilon(1e-10));
        for (std::size_t x = 0; x < 3; ++x) {
            CHECK(sol.f_hat[x][c] == doctest::Approx(ref[x]).epsilon(1e-9));
            // p_f_hat really is the one-step kernel average of f_hat
            double avg = 0.0;
            for (std::size_t y = 0; y < 3; ++y) avg += kernel(x, y) * sol.f_hat[y][c];
            CHECK(sol.p_f_hat[x][c] == doctest::Approx(avg).epsilon(1e-12));
            // residual identity per state and coordinate
            CHECK(sol.f_hat[x][c] - sol.p_f_hat[x][c] ==
                  doctest::Approx(fc[x] - pif).epsilon(1e-10));
        }
    }
}

TEST_CASE("kernels without a spectral gap are rejected") {
    CHECK_THROWS_AS(PoissonOperator(Mat::identity(2)), Error);
    CHECK_THROWS_AS(PoissonOperator(Mat{{0.0, 1.0}, {1.0, 0.0}}), Error);
    try {
        PoissonOperator(Mat::identity(3));
        FAIL("expected a rejection");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotErgodic);
    }
    const std::vector<Vec> f = {Vec{1.0}, Vec{2.0}};
    CHECK_THROWS_AS(solve_poisson(Mat::identity(2), f), Error);
}

TEST_CASE("long-run covariance of the slow-chain noise, scalar instances") {
    TtsaProblem p = fixtures::scalar_problem();

    const Mat fast = markov_asymptotic_covariance(p, fixtures::markov_fast_oracle(p));
    CHECK(fast(0, 0) == doctest::Approx(27.0 / 40.0).epsilon(1e-12));
    const Mat fast_ref =
        refcalc::autocov_sigma(fixtures::kernel_fast(), {Vec{0.9}, Vec{-0.45}});
    CHECK(fast(0, 0) == doctest::Approx(fast_ref(0, 0)).epsilon(1e-10));

    const Mat slow = markov_asymptotic_covariance(p, fixtures::markov_slow_oracle(p));
    CHECK(slow(0, 0) == doctest::Approx(51.0 / 32.0).epsilon(1e-12));
    const Mat slow_ref =
        refcalc::autocov_sigma(fixtures::kernel_slow(), {Vec{0.375}, Vec{-0.75}});
    CHECK(slow(0, 0) == doctest::Approx(slow_ref(0, 0)).epsilon(1e-10));
}

TEST_CASE("long-run covariance of a two-dimensional slow chain") {
    TtsaProblem p = make_problem(Mat{{1.0, 0.2}, {0.0, 0.8}}, Mat{{0.1}, {0.05}},
                                 Mat{{0.1, 0.0}}, Mat{{1.0}}, Vec{1.0, 0.5}, Vec{0.3});
    // state offsets with stationary mean zero under pi = (2/3, 1/3)
    ObservationData s0{p.a11, p.a12, p.a21, p.a22, Vec{1.3, 0.35}, Vec{0.36}};
    ObservationData s1{p.a11, p.a12, p.a21, p.a22, Vec{0.4, 0.8}, Vec{0.18}};
    NoiseOracle o = make_markov_oracle(fixtures::kernel_slow(), {s0, s1});

    const Mat sigma = markov_asymptotic_covariance(p, o);
    // psi(1) = -2 psi(0), so sigma = (34/3) psi(0) psi(0)^T exactly
    CHECK(sigma(0, 0) == doctest::Approx(0.979608).epsilon(1e-12));
    CHECK(sigma(0, 1) == doctest::Approx(-0.509796).epsilon(1e-12));
    CHECK(sigma(1, 0) == doctest::Approx(sigma(0, 1)).epsilon(1e-13));
    CHECK(sigma(1, 1) == doctest::Approx(0.265302).epsilon(1e-12));

    Vec psi0{0.294, -0.153}, psi1{-0.588, 0.306};
    const Mat ref = refcalc::autocov_sigma(fixtures::kernel_slow(), {psi0, psi1});
    CHECK(ttsa::max_abs(sigma - ref) < 1e-10);
    // PSD: rank-one with positive trace
    CHECK(sigma(0, 0) > 0.0);
    CHECK(sigma(0, 0) * sigma(1, 1) - sigma(0, 1) * sigma(1, 0) ==
          doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("noise split adds back exactly and telescopes") {
    TtsaProblem p = fixtures::scalar_problem();
    NoiseOracle o = fixtures::markov_fast_oracle(p);
    StepSchedule s = make_schedule(0.6, 0.8, 0.5, 0.5, 4);
    RunOptions opts;
    opts.log_noise = true;
    TrajectoryRecord rec = run(p, o, s, 300, 11, 3, opts);
    REQUIRE(rec.x0 >= 0);

    const std::vector<NoiseSplit> parts = split_noise(p, o, *rec.noise_log, rec.x0);
    REQUIRE(parts.size() == 300);

    // closed forms for the additive fixture: eps_v_hat = (4/3, -2/3) and
    // its kernel average (1/3, -1/6)
    const double ev_hat[2] = {4.0 / 3.0, -2.0 / 3.0};
    const double pev_hat[2] = {1.0 / 3.0, -1.0 / 6.0};
    int prev = rec.x0;
    double v1_sum = 0.0;
    for (std::size_t k = 0; k < parts.size(); ++k) {
        const NoiseSample& ns = (*rec.noise_log)[k];
        const NoiseSplit& sp = parts[k];
        CHECK(sp.v0[0] + sp.v1[0] == doctest::Approx(ns.v[0]).epsilon(1e-12));
        CHECK(sp.w0[0] + sp.w1[0] == doctest::Approx(ns.w_noise[0]).epsilon(1e-12));
        CHECK(sp.v0[0] == doctest::Approx(ev_hat[ns.state] - pev_hat[prev]).epsilon(1e-12));
        v1_sum += sp.v1[0];
        prev = ns.state;
    }
    CHECK(v1_sum == doctest::Approx(pev_hat[rec.x0] - pev_hat[prev]).epsilon(1e-10));
}

TEST_CASE("noise split covers state-dependent update matrices") {
    TtsaProblem p = fixtures::scalar_problem();
    NoiseOracle o = markov_matrix_oracle(p);
    StepSchedule s = make_schedule(0.6, 0.8, 0.5, 0.5, 4);
    RunOptions opts;
    opts.log_noise = true;
    TrajectoryRecord rec = run(p, o, s, 300, 13, 5, opts);

    const std::vector<NoiseSplit> parts = split_noise(p, o, *rec.noise_log, rec.x0);
    for (std::size_t k = 0; k < parts.size(); ++k) {
        const NoiseSample& ns = (*rec.noise_log)[k];
        CHECK(parts[k].v0[0] + parts[k].v1[0] == doctest::Approx(ns.v[0]).epsilon(1e-12));
        CHECK(parts[k].w0[0] + parts[k].w1[0] ==
              doctest::Approx(ns.w_noise[0]).epsilon(1e-12));
    }
}

TEST_CASE("noise split rejects bad inputs") {
    TtsaProblem p = fixtures::scalar_problem();
    NoiseOracle markov = fixtures::markov_fast_oracle(p);
    NoiseOracle mixture = fixtures::mixture_oracle(p);
    StepSchedule s = make_schedule(0.6, 0.8, 0.5, 0.5, 4);
    RunOptions opts;
    opts.log_noise = true;
    TrajectoryRecord rec = run(p, markov, s, 10, 1, 0, opts);

    CHECK_THROWS_AS(split_noise(p, markov, *rec.noise_log, -1), Error);
    CHECK_THROWS_AS(split_noise(p, mixture, *rec.noise_log, 0), Error);
    CHECK_THROWS_AS(split_noise(p, markov, {}, rec.x0), Error);
}
