#pragma once

// Shared test instances with exactly known statistics.

#include "model.hpp"

namespace fixtures {

using ttsa::Mat;
using ttsa::MixtureComponent;
using ttsa::NoiseOracle;
using ttsa::ObservationData;
using ttsa::TtsaProblem;
using ttsa::Vec;

/// Scalar coupled system with theta* = 16/17, w* = 2/17, delta = 17/20,
/// coupling c = 1/2.
inline TtsaProblem scalar_problem() {
    return ttsa::make_problem(Mat{{1.0}}, Mat{{0.5}}, Mat{{0.3}}, Mat{{1.0}}, Vec{1.0}, Vec{0.4});
}

/// Two-state kernel with stationary law (1/3, 2/3), second eigenvalue 1/4,
/// mixing time 1.
inline Mat kernel_fast() { return Mat{{0.5, 0.5}, {0.25, 0.75}}; }

/// Two-state kernel with stationary law (2/3, 1/3), second eigenvalue 7/10,
/// mixing time 4.
inline Mat kernel_slow() { return Mat{{0.9, 0.1}, {0.2, 0.8}}; }

/// Additive chain noise on kernel_fast over scalar_problem: per-state
/// eps_v = (1, -1/2), eps_w = (0.2, -0.1), so psi = eps_v - c eps_w takes
/// values (0.9, -0.45) and the long-run variance of psi is exactly 27/40.
/// Mean-zero functions of a two-state chain are eigenfunctions, so the
/// autocovariance decays exactly geometrically.
inline NoiseOracle markov_fast_oracle(const TtsaProblem& p) {
    ObservationData s0{p.a11, p.a12, p.a21, p.a22, Vec{2.0}, Vec{0.6}};
    ObservationData s1{p.a11, p.a12, p.a21, p.a22, Vec{0.5}, Vec{0.3}};
    return ttsa::make_markov_oracle(kernel_fast(), {s0, s1});
}

/// Same construction on kernel_slow: eps_v = (0.3, -0.6), eps_w =
/// (-0.15, 0.3), psi = (0.375, -0.75), long-run variance exactly 51/32.
inline NoiseOracle markov_slow_oracle(const TtsaProblem& p) {
    ObservationData s0{p.a11, p.a12, p.a21, p.a22, Vec{1.3}, Vec{0.25}};
    ObservationData s1{p.a11, p.a12, p.a21, p.a22, Vec{0.4}, Vec{0.7}};
    return ttsa::make_markov_oracle(kernel_slow(), {s0, s1});
}

/// Symmetric two-point mixture over scalar_problem: eps_v = +-0.6 and
/// eps_w = -+0.2 move together, so psi = +-0.7 and var(psi) = 0.49,
/// cov(eps_v, eps_w) = -0.12.
inline NoiseOracle mixture_oracle(const TtsaProblem& p) {
    MixtureComponent up, down;
    up.weight = 0.5;
    up.obs = ObservationData{p.a11, p.a12, p.a21, p.a22, Vec{1.6}, Vec{0.2}};
    down.weight = 0.5;
    down.obs = ObservationData{p.a11, p.a12, p.a21, p.a22, Vec{0.4}, Vec{0.6}};
    return ttsa::make_mixture_oracle({up, down});
}

/// Additive Rademacher perturbations of 0.5 on both intercepts:
/// var(eps_v) = var(eps_w) = 1/4 independently, var(psi) = 5/16.
inline NoiseOracle perturbation_oracle(const TtsaProblem& p) {
    ttsa::PerturbationAmps amps;
    amps.b1 = 0.5;
    amps.b2 = 0.5;
    return ttsa::make_perturbation_oracle(p, amps, ttsa::EntryDist::Rademacher);
}

}  // namespace fixtures
