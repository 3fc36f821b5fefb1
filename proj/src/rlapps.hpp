#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "mat.hpp"
#include "model.hpp"

namespace ttsa {

/// Finite discounted MDP with a fixed behavior policy. transition[a](s, s')
/// is the next-state law of action a; reward(s, a) is deterministic in
/// [0, 1]; policy(s, a) is the probability of action a in state s.
struct FiniteMdp {
    std::size_t n_states = 0, n_actions = 0;
    std::vector<Mat> transition;
    Mat reward;
    double discount = 0.0;
    Mat policy;
};

/// Per-state feature vectors, all of one dimension, each with norm <= 1.
struct FeatureMap {
    std::vector<Vec> phi;

    std::size_t dim() const { return phi.empty() ? 0 : phi.front().size(); }
};

/// Throws ConfigError on structural defects (non-stochastic rows, rewards
/// outside [0,1], discount outside (0,1), feature norms above 1).
void validate_mdp(const FiniteMdp& mdp, const FeatureMap& features);

/// State-to-state kernel under the behavior policy:
/// p(s, s') = sum_a policy(s, a) transition[a](s, s').
Mat policy_kernel(const FiniteMdp& mdp);

/// Expected one-step reward per state under the policy.
Vec policy_reward(const FiniteMdp& mdp);

/// The linear two-timescale instantiation of a temporal-difference method on
/// an MDP: the observation chain walks transition tuples (s, a, s') with
/// positive probability, and the problem matrices are exact expectations
/// under the stationary tuple law.
struct RlInstance {
    TtsaProblem problem;
    NoiseOracle oracle;
    std::vector<std::array<int, 3>> tuple_states;  // oracle state -> (s, a, s')
    Vec mu;        // stationary law of the state chain under the policy
    Mat p_policy;  // state chain kernel
};

/// Gradient-TD with auxiliary weights: observation blocks
/// b1 = 0, a11 = 0, a12 = -(phi - lambda phi') phi^T, b2 = r phi,
/// a21 = phi (phi - lambda phi')^T, a22 = I. With generative = true the
/// tuple chain is replaced by i.i.d. draws from its stationary law.
RlInstance build_gtd(const FiniteMdp& mdp, const FeatureMap& features, bool generative = false);

/// TD with gradient correction: b1 = b2 = r phi,
/// a11 = a21 = phi (phi - lambda phi')^T, a12 = lambda phi' phi^T,
/// a22 = phi phi^T. Verifies the structural identities a11 = a21 and
/// a12 = a22 - a11^T on the expected blocks; a singular feature second
/// moment is rejected (SingularFeatureGram).
RlInstance build_tdc(const FiniteMdp& mdp, const FeatureMap& features, bool generative = false);

enum class TdAlgorithm { Gtd, Tdc };

struct PolicyEvaluation {
    Vec v_pi;                      // (I - lambda P_pi)^{-1} r_pi
    Vec theta_star;                // exact solution of the built instance
    Vec v_theta;                   // phi^T theta* per state
    double bellman_residual = 0;   // ||E[phi(phi - lambda phi')^T] theta* - E[r phi]||_inf
    double value_error_max = 0;    // max_s |v_theta(s) - v_pi(s)|
};

/// Builds the chosen method, solves it exactly, and compares phi^T theta*
/// with the true value function (equal for full-rank tabular features).
PolicyEvaluation evaluate_policy_exact(const FiniteMdp& mdp, const FeatureMap& features,
                                       TdAlgorithm alg);

}  // namespace ttsa
