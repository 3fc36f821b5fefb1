#include "doctest.h"

#include <array>
#include <cmath>

#include "engine.hpp"
#include "errors.hpp"
#include "linalg.hpp"
#include "oracles.hpp"
#include "rlapps.hpp"

using namespace ttsa;

namespace {

/// Three states, two actions, all policy entries positive; transition[0]
/// has exactly one structural zero, so 17 of the 18 tuples are reachable.
FiniteMdp small_mdp() {
    FiniteMdp mdp;
    mdp.n_states = 3;
    mdp.n_actions = 2;
    mdp.transition = {Mat{{0.5, 0.5, 0.0}, {0.2, 0.3, 0.5}, {0.4, 0.1, 0.5}},
                      Mat{{0.1, 0.2, 0.7}, {0.6, 0.2, 0.2}, {0.3, 0.3, 0.4}}};
    mdp.reward = Mat{{0.2, 0.8}, {0.5, 0.1}, {0.9, 0.4}};
    mdp.discount = 0.9;
    mdp.policy = Mat{{0.6, 0.4}, {0.3, 0.7}, {0.5, 0.5}};
    return mdp;
}

FeatureMap tabular_features(std::size_t n) {
    FeatureMap f;
    for (std::size_t s = 0; s < n; ++s) {
        Vec phi(n, 0.0);
        phi[s] = 1.0;
        f.phi.push_back(std::move(phi));
    }
    return f;
}

FeatureMap compressed_features() {
    FeatureMap f;
    f.phi = {Vec{1.0, 0.0}, Vec{0.6, 0.4}, Vec{0.0, 1.0}};
    return f;
}

Vec bellman_fixed_point(const FiniteMdp& mdp) {
    const Mat pk = policy_kernel(mdp);
    const Vec r = policy_reward(mdp);
    return solve(Mat::identity(mdp.n_states) - mdp.discount * pk, r);
}

}  // namespace

TEST_CASE("policy kernel and reward averaging") {
    FiniteMdp mdp = small_mdp();
    FeatureMap f = tabular_features(3);
    CHECK_NOTHROW(validate_mdp(mdp, f));

    const Mat pk = policy_kernel(mdp);
    for (std::size_t s = 0; s < 3; ++s) {
        double row = 0.0;
        for (std::size_t t = 0; t < 3; ++t) row += pk(s, t);
        CHECK(row == doctest::Approx(1.0).epsilon(1e-13));
    }
    // pk(0, 2) = 0.6 * 0.0 + 0.4 * 0.7
    CHECK(pk(0, 2) == doctest::Approx(0.28).epsilon(1e-13));
    const Vec r = policy_reward(mdp);
    CHECK(r[0] == doctest::Approx(0.6 * 0.2 + 0.4 * 0.8).epsilon(1e-13));
}

TEST_CASE("mdp validation rejects structural defects") {
    FeatureMap f = tabular_features(3);

    FiniteMdp broken = small_mdp();
    broken.transition[0](1, 1) += 0.1;
    CHECK_THROWS_AS(validate_mdp(broken, f), Error);

    broken = small_mdp();
    broken.reward(2, 0) = 1.2;
    CHECK_THROWS_AS(validate_mdp(broken, f), Error);

    broken = small_mdp();
    broken.discount = 1.0;
    CHECK_THROWS_AS(validate_mdp(broken, f), Error);

    broken = small_mdp();
    broken.policy(0, 0) = 0.9;
    CHECK_THROWS_AS(validate_mdp(broken, f), Error);

    FeatureMap big = tabular_features(3);
    big.phi[1][1] = 1.5;
    CHECK_THROWS_AS(validate_mdp(small_mdp(), big), Error);

    FeatureMap wrong_count = tabular_features(2);
    CHECK_THROWS_AS(validate_mdp(small_mdp(), wrong_count), Error);

    CHECK_THROWS_AS(build_gtd(broken, f), Error);
}

TEST_CASE("tabular features recover the exact value function") {
    FiniteMdp mdp = small_mdp();
    FeatureMap f = tabular_features(3);
    const Vec v = bellman_fixed_point(mdp);

    for (TdAlgorithm alg : {TdAlgorithm::Gtd, TdAlgorithm::Tdc}) {
        const PolicyEvaluation ev = evaluate_policy_exact(mdp, f, alg);
        CHECK(max_abs(ev.v_pi - v) < 1e-11);
        CHECK(ev.value_error_max < 1e-10);
        CHECK(ev.bellman_residual < 1e-10);
        CHECK(max_abs(ev.theta_star - v) < 1e-10);
        CHECK(max_abs(ev.v_theta - v) < 1e-10);
    }
}

TEST_CASE("both constructions park the auxiliary weights at zero") {
    FiniteMdp mdp = small_mdp();
    FeatureMap f = tabular_features(3);
    CHECK(max_abs(build_gtd(mdp, f).problem.w_star) < 1e-11);
    CHECK(max_abs(build_tdc(mdp, f).problem.w_star) < 1e-11);
}

TEST_CASE("gradient-TD blocks: zero drift data, symmetric positive slow system") {
    FiniteMdp mdp = small_mdp();
    FeatureMap f = compressed_features();
    RlInstance inst = build_gtd(mdp, f);
    const TtsaProblem& p = inst.problem;

    CHECK(max_abs(p.a11) == 0.0);
    CHECK(max_abs(p.b1) == 0.0);
    CHECK(max_abs(p.a22 - Mat::identity(2)) == 0.0);
    CHECK(max_abs(p.a21 - (-1.0) * transpose(p.a12)) < 1e-13);
    // delta = a21^T a21 is symmetric positive definite
    CHECK(max_abs(p.delta - transpose(p.a21) * p.a21) < 1e-12);
    CHECK(is_symmetric(p.delta, 1e-12));
    CHECK(sym_eig(p.delta).values.front() > 0.0);
    CHECK(eig_check_hurwitz(p.delta).negated_is_hurwitz);
}

TEST_CASE("gradient-correction blocks satisfy their structural identities") {
    FiniteMdp mdp = small_mdp();
    FeatureMap f = compressed_features();
    RlInstance inst = build_tdc(mdp, f);
    const TtsaProblem& p = inst.problem;

    CHECK(max_abs(p.a11 - p.a21) == 0.0);
    CHECK(max_abs(p.b1 - p.b2) == 0.0);
    CHECK(max_abs(p.a12 - (p.a22 - transpose(p.a11))) < 1e-13);
    CHECK(is_symmetric(p.a22, 1e-13));
    CHECK(sym_eig(p.a22).values.front() > 0.0);

    // same projected fixed point as the gradient-TD construction
    RlInstance gtd = build_gtd(mdp, f);
    CHECK(max_abs(p.theta_star - gtd.problem.theta_star) < 1e-10);
    // and it solves the projected equation exactly
    const PolicyEvaluation ev = evaluate_policy_exact(mdp, f, TdAlgorithm::Tdc);
    CHECK(ev.bellman_residual < 1e-10);
    CHECK(ev.value_error_max > 1e-4);  // compressed features cannot represent v
}

TEST_CASE("tuple chain enumerates reachable tuples with the product law") {
    FiniteMdp mdp = small_mdp();
    FeatureMap f = tabular_features(3);
    RlInstance inst = build_gtd(mdp, f);

    CHECK(inst.oracle.kind == OracleKind::Markov);
    REQUIRE(inst.tuple_states.size() == 17);  // 18 tuples, one structural zero
    CHECK(inst.oracle.n_states() == 17);

    const Vec mu_ref = refcalc::stationary_power(policy_kernel(mdp));
    REQUIRE(inst.mu.size() == 3);
    for (std::size_t s = 0; s < 3; ++s)
        CHECK(inst.mu[s] == doctest::Approx(mu_ref[s]).epsilon(1e-10));

    for (std::size_t i = 0; i < inst.tuple_states.size(); ++i) {
        const auto [s, a, s2] = inst.tuple_states[i];
        CHECK(mdp.policy(s, a) > 0.0);
        CHECK(mdp.transition[a](s, s2) > 0.0);
        const double law = inst.mu[s] * mdp.policy(s, a) * mdp.transition[a](s, s2);
        CHECK(inst.oracle.pi[i] == doctest::Approx(law).epsilon(1e-9));
    }
}

TEST_CASE("generative variant draws the same tuples independently") {
    FiniteMdp mdp = small_mdp();
    FeatureMap f = tabular_features(3);
    RlInstance chain = build_gtd(mdp, f, false);
    RlInstance gen = build_gtd(mdp, f, true);

    CHECK(gen.oracle.kind == OracleKind::Mixture);
    REQUIRE(gen.oracle.components.size() == 17);
    double total = 0.0;
    for (const auto& c : gen.oracle.components) total += c.weight;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    // identical expected blocks, hence the identical problem
    CHECK(max_abs(gen.problem.delta - chain.problem.delta) < 1e-12);
    CHECK(max_abs(gen.problem.theta_star - chain.problem.theta_star) < 1e-11);
}

TEST_CASE("observation tuples reproduce the textbook updates") {
    FiniteMdp mdp = small_mdp();
    FeatureMap f = compressed_features();
    const double lam = mdp.discount;
    const Vec theta{0.1, -0.2};
    const Vec w{0.05, 0.4};
    const double bk = 0.01, gk = 0.02;

    RlInstance gtd = build_gtd(mdp, f);
    for (std::size_t i = 0; i < gtd.tuple_states.size(); ++i) {
        const auto [s, a, s2] = gtd.tuple_states[i];
        const Vec& phi = f.phi[static_cast<std::size_t>(s)];
        const Vec& phi2 = f.phi[static_cast<std::size_t>(s2)];
        const double r = mdp.reward(s, a);
        const double td = r + lam * dot(phi2, theta) - dot(phi, theta);

        Vec th = theta, ww = w;
        step_coupled(gtd.oracle.states[i], bk, gk, th, ww);
        const Vec th_ref = theta + bk * dot(phi, w) * (phi - lam * phi2);
        const Vec ww_ref = w + gk * (td * phi - w);
        CHECK(max_abs(th - th_ref) < 1e-14);
        CHECK(max_abs(ww - ww_ref) < 1e-14);
    }

    RlInstance tdc = build_tdc(mdp, f);
    for (std::size_t i = 0; i < tdc.tuple_states.size(); ++i) {
        const auto [s, a, s2] = tdc.tuple_states[i];
        const Vec& phi = f.phi[static_cast<std::size_t>(s)];
        const Vec& phi2 = f.phi[static_cast<std::size_t>(s2)];
        const double r = mdp.reward(s, a);
        const double td = r + lam * dot(phi2, theta) - dot(phi, theta);

        Vec th = theta, ww = w;
        step_coupled(tdc.oracle.states[i], bk, gk, th, ww);
        const Vec th_ref = theta + bk * (td * phi - lam * dot(phi, w) * phi2);
        const Vec ww_ref = w + gk * (td - dot(phi, w)) * phi;
        CHECK(max_abs(th - th_ref) < 1e-14);
        CHECK(max_abs(ww - ww_ref) < 1e-14);
    }
}

TEST_CASE("rank-deficient feature second moment is rejected") {
    FiniteMdp mdp = small_mdp();
    FeatureMap flat;
    flat.phi = {Vec{1.0, 0.0}, Vec{1.0, 0.0}, Vec{1.0, 0.0}};
    try {
        build_tdc(mdp, flat);
        FAIL("expected a rejection");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SingularFeatureGram);
    }
    CHECK_THROWS_AS(build_gtd(mdp, flat), Error);
}
