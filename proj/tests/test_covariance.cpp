#include "doctest.h"

#include <cmath>

#include "covariance.hpp"
#include "errors.hpp"
#include "fixtures.hpp"
#include "linalg.hpp"
#include "oracles.hpp"
#include "poisson.hpp"

using namespace ttsa;

namespace {

StepSchedule plain_schedule() { return make_schedule(0.6, 0.75, 1.0, 1.0, 1); }

}  // namespace

TEST_CASE("one-step noise covariance under each sampling law") {
    TtsaProblem p = fixtures::scalar_problem();
    CHECK(sigma_eps(p, fixtures::mixture_oracle(p))(0, 0) ==
          doctest::Approx(0.49).epsilon(1e-13));
    CHECK(sigma_eps(p, fixtures::perturbation_oracle(p))(0, 0) ==
          doctest::Approx(5.0 / 16.0).epsilon(1e-13));

    // stationary one-step variance of psi = (0.9, -0.45) under pi = (1/3, 2/3),
    // distinct from the long-run value 27/40
    const Mat one_step = sigma_eps(p, fixtures::markov_fast_oracle(p));
    CHECK(one_step(0, 0) == doctest::Approx(0.405).epsilon(1e-13));
    CHECK(markov_asymptotic_covariance(p, fixtures::markov_fast_oracle(p))(0, 0) >
          one_step(0, 0));

    // a state-dependent conditional law is tolerated by default, rejected
    // in strict mode
    CHECK_NOTHROW(sigma_eps(p, fixtures::markov_fast_oracle(p), false));
    CHECK_THROWS_AS(sigma_eps(p, fixtures::markov_fast_oracle(p), true), Error);
}

TEST_CASE("finite-horizon statistic covariance matches the double-product sum") {
    TtsaProblem p = fixtures::scalar_problem();
    StepSchedule s = plain_schedule();
    const Mat sigma = sigma_eps(p, fixtures::perturbation_oracle(p));
    for (std::int64_t n : {1, 7, 64}) {
        const Mat direct = refcalc::double_product_sigma(p.delta, s, sigma, n);
        const Mat rec = sigma_n_last(p, s, sigma, n);
        CHECK(rec(0, 0) == doctest::Approx(direct(0, 0)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(sigma_n_last(p, s, sigma, 0), Error);
    CHECK_THROWS_AS(sigma_n_last(p, s, Mat(2, 2), 4), Error);
}

TEST_CASE("candidate limit solves the stationarity equation") {
    TtsaProblem p = fixtures::scalar_problem();
    const Mat sigma = sigma_eps(p, fixtures::mixture_oracle(p));
    const Mat lim = sigma_limit_last(p, sigma);
    // scalar case: 2 delta x = sigma
    CHECK(lim(0, 0) == doctest::Approx(0.49 / (2.0 * 0.85)).epsilon(1e-12));

    // normalized recursion values approach it from below the grid
    StepSchedule s = plain_schedule();
    const double g1 = max_abs((1.0 / beta(s, 1 << 10)) * sigma_n_last(p, s, sigma, 1 << 10) - lim);
    const double g2 = max_abs((1.0 / beta(s, 1 << 14)) * sigma_n_last(p, s, sigma, 1 << 14) - lim);
    CHECK(g2 < g1);
    // gap shrinks by about 2^{-(1-b)} per doubling: four doublings at b = 3/4
    CHECK(g2 / g1 == doctest::Approx(std::pow(2.0, -4.0 * 0.25)).epsilon(0.15));

    // an unstable delta has no PSD solution
    TtsaProblem bad = make_problem(Mat{{-1.0}}, Mat{{0.0}}, Mat{{0.3}}, Mat{{1.0}}, Vec{1.0},
                                   Vec{0.4});
    CHECK_THROWS_AS(sigma_limit_last(bad, sigma), Error);
}

TEST_CASE("chain version feeds the long-run covariance into the same solve") {
    TtsaProblem p = fixtures::scalar_problem();
    NoiseOracle o = fixtures::markov_slow_oracle(p);
    const Mat via_chain = markov_sigma_limit_last(p, o);
    const Mat direct = sigma_limit_last(p, markov_asymptotic_covariance(p, o));
    CHECK(via_chain(0, 0) == doctest::Approx(direct(0, 0)).epsilon(1e-13));
    CHECK(via_chain(0, 0) == doctest::Approx((51.0 / 32.0) / (2.0 * 0.85)).epsilon(1e-12));
}

TEST_CASE("normalized-gap decay follows the step-size exponent") {
    TtsaProblem p = fixtures::scalar_problem();
    StepSchedule s = plain_schedule();
    NoiseOracle o = fixtures::perturbation_oracle(p);
    std::vector<std::int64_t> grid;
    for (int e = 10; e <= 18; e += 2) grid.push_back(std::int64_t{1} << e);

    const CovarianceReport rep = covariance_report(p, s, o, grid);
    REQUIRE(rep.convergence_gaps.size() == grid.size());
    for (std::size_t i = 1; i < rep.convergence_gaps.size(); ++i)
        CHECK(rep.convergence_gaps[i].gap < rep.convergence_gaps[i - 1].gap);
    // the gap decays like n^{-(1-b)}, not n^{-b}
    CHECK(rep.gap_slope == doctest::Approx(-(1.0 - 0.75)).epsilon(0.4));
    CHECK(std::abs(rep.gap_slope - (-0.75)) > 0.3);

    CHECK(rep.sigma_eps(0, 0) == doctest::Approx(5.0 / 16.0).epsilon(1e-12));
    CHECK(rep.sigma_source(0, 0) == doctest::Approx(rep.sigma_eps(0, 0)).epsilon(1e-13));
    CHECK(rep.lambda_min == doctest::Approx((5.0 / 16.0) / (2.0 * 0.85)).epsilon(1e-10));
    // the normalized sums reach half the limiting floor somewhere on the grid
    CHECK(rep.lambda_min_threshold_n >= grid.front());
    CHECK(rep.lambda_min_threshold_n <= grid.back());
}

TEST_CASE("chain instances report the long-run source") {
    TtsaProblem p = fixtures::scalar_problem();
    StepSchedule s = plain_schedule();
    NoiseOracle o = fixtures::markov_fast_oracle(p);
    const CovarianceReport rep = covariance_report(p, s, o, {1 << 10, 1 << 12});
    CHECK(rep.sigma_eps(0, 0) == doctest::Approx(0.405).epsilon(1e-12));
    CHECK(rep.sigma_source(0, 0) == doctest::Approx(27.0 / 40.0).epsilon(1e-12));
}

TEST_CASE("grid validation") {
    TtsaProblem p = fixtures::scalar_problem();
    StepSchedule s = plain_schedule();
    NoiseOracle o = fixtures::perturbation_oracle(p);
    CHECK_THROWS_AS(covariance_report(p, s, o, {1024}), Error);
    CHECK_THROWS_AS(covariance_report(p, s, o, {1024, 512}), Error);
    CHECK_THROWS_AS(covariance_report(p, s, o, {0, 1024}), Error);
}
