#pragma once

#include <optional>
#include <string>
#include <vector>

#include "linalg.hpp"
#include "mat.hpp"
#include "rng.hpp"

namespace ttsa {

/// One observation tuple: the random matrices/vectors driving a single update.
struct ObservationData {
    Mat a11, a12, a21, a22;
    Vec b1, b2;
};

/// Linear two-timescale problem. Derived quantities are cached at
/// construction: delta = a11 - a12 a22^{-1} a21, the coupling matrix
/// c = a12 a22^{-1}, and the exact solution (theta_star, w_star).
struct TtsaProblem {
    std::size_t d_theta = 0, d_w = 0;
    Mat a11, a12, a21, a22;
    Vec b1, b2;

    Mat delta;
    Mat a22_inv;
    Mat c;  // a12 * a22^{-1}
    Vec theta_star, w_star;
};

struct Solution {
    Vec theta_star, w_star;
};

/// Validates shapes/finiteness, requires a22 and delta numerically
/// nonsingular (cond <= 1e12), caches the solution. Stability (Hurwitz)
/// is diagnosed by validate_assumptions, not enforced here, so that
/// deliberately violating instances can still be simulated.
TtsaProblem make_problem(Mat a11, Mat a12, Mat a21, Mat a22, Vec b1, Vec b2);

/// Exact solution of the coupled linear system; residuals checked to 1e-10.
Solution solve_exact(const TtsaProblem& p);

enum class OracleKind { Mixture, Perturbation, Markov };
enum class EntryDist { Rademacher, Uniform };

struct MixtureComponent {
    double weight = 0.0;
    ObservationData obs;
};

/// Per-block perturbation amplitudes for the bounded-perturbation family
/// (independent zero-mean entries added to the deterministic tuple).
struct PerturbationAmps {
    double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0, b1 = 0.0, b2 = 0.0;
};

struct NoiseOracle {
    OracleKind kind = OracleKind::Mixture;
    std::size_t d_theta = 0, d_w = 0;

    // Mixture family (a single component = deterministic oracle).
    std::vector<MixtureComponent> components;
    std::vector<double> cum_weights;

    // Bounded-perturbation family.
    ObservationData base;
    PerturbationAmps amps;
    EntryDist entry_dist = EntryDist::Rademacher;

    // Finite-state Markov family.
    Mat kernel;
    std::vector<ObservationData> states;
    Vec pi;
    std::vector<double> cum_rows;  // row-wise cumulative kernel, flattened

    std::size_t n_states() const { return states.size(); }
};

NoiseOracle make_deterministic_oracle(const TtsaProblem& p);
NoiseOracle make_mixture_oracle(std::vector<MixtureComponent> components);
NoiseOracle make_perturbation_oracle(const TtsaProblem& p, PerturbationAmps amps, EntryDist dist);
NoiseOracle make_markov_oracle(Mat kernel, std::vector<ObservationData> states);

/// Stationary law of a row-stochastic kernel via the left null space of
/// P^T - I with sum-to-one normalization. Throws NotErgodic when the
/// system is singular (no unique stationary law).
Vec stationary_distribution(const Mat& kernel);

/// Largest pairwise total-variation distance between rows of the kernel.
double max_pairwise_tv(const Mat& kernel);

/// Smallest t with max-pairwise TV of P^t <= threshold. Checks minimality
/// and geometric decay of the TV at multiples m*t for m <= 4; throws
/// NotErgodic when the TV has not dropped below threshold by
/// 10*n^2*log(n) + 1000 steps.
int mixing_time(const Mat& kernel, double threshold = 0.25);

/// Per-replication sampling state: owns an RNG stream and, for Markov
/// oracles, the current chain state.
class OracleSampler {
public:
    OracleSampler(const NoiseOracle& oracle, std::uint64_t seed, std::uint64_t stream);

    /// Draws the next observation; the returned reference is valid until the
    /// next call. Advances the Markov chain state for Markov oracles.
    const ObservationData& next();

    /// Observation index drawn by the latest next(): component id for
    /// mixtures, chain state for Markov oracles, -1 for perturbations.
    int last_index() const { return last_index_; }

    int markov_state() const { return state_; }

private:
    const NoiseOracle* oracle_;
    RngStream rng_;
    int state_ = -1;
    int last_index_ = -1;
    ObservationData scratch_;
};

/// Exact second moments of (eps_v, eps_w) under the oracle's sampling law
/// (mixture weights / stationary law / closed-form perturbation variances).
struct NoiseMoments {
    Vec mean_eps_v, mean_eps_w;
    Mat sigma_v, sigma_w, sigma_vw;
};
NoiseMoments noise_moments(const TtsaProblem& p, const NoiseOracle& oracle);

/// eps pair at one state/component, evaluated at the problem solution.
struct EpsPair {
    Vec eps_v, eps_w;
};
EpsPair eps_at(const TtsaProblem& p, const ObservationData& obs);

struct AssumptionCheck {
    std::string id;        // "A1", "A3", ...
    std::string name;
    bool passed = false;
    bool expected_fail = false;
    double deviation = 0.0;
    std::string detail;
};

struct ValidationReport {
    std::vector<AssumptionCheck> checks;
    bool all_passed(bool ignore_expected = true) const;
};

ValidationReport validate_assumptions(const TtsaProblem& p, const NoiseOracle& oracle);

/// Noise recorded at one engine step; v/w_noise are the realized
/// observation-minus-mean drift terms and eps the tuple evaluated at the
/// solution, so v reconstructs as eps_v minus the centered-matrix terms.
struct NoiseSample {
    int state = -1;
    Vec eps_v, eps_w;
    Vec v, w_noise;
    Vec theta_err, w_err;  // iterate error before the step
};

}  // namespace ttsa
