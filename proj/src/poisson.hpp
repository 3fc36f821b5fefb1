#pragma once

#include <vector>

#include "mat.hpp"
#include "model.hpp"

namespace ttsa {

/// Fundamental-matrix machinery bound to one ergodic row-stochastic kernel:
/// z = (I - P + 1 pi^T)^{-1}. Construction rejects kernels whose spectral
/// gap 1 - |lambda_2| is below 1e-6 or whose fundamental matrix is
/// numerically singular.
class PoissonOperator {
public:
    explicit PoissonOperator(Mat kernel);

    const Mat& kernel() const { return kernel_; }
    const Vec& pi() const { return pi_; }
    int t_mix() const { return t_mix_; }
    double spectral_gap() const { return gap_; }

    /// Solution of g - Pg = f - pi(f) per state, normalized so pi(g) = 0.
    Vec solve_scalar(const Vec& f) const;

    /// (Pf)(x) per state.
    Vec apply_kernel(const Vec& f) const;

    double pi_mean(const Vec& f) const;

private:
    Mat kernel_, z_;
    Vec pi_;
    int t_mix_ = 0;
    double gap_ = 0.0;
};

/// Per-state solution of the vector equation f_hat - P f_hat = f - pi(f),
/// solved coordinatewise. The residual identity is checked to 1e-10 per
/// state and the sup-norm bound ||f_hat||_inf <= (8/3) t_mix ||f||_inf is
/// enforced on every solve.
struct PoissonSolution {
    std::vector<Vec> f_hat;
    std::vector<Vec> p_f_hat;  // (P f_hat)(x)
    Vec pi_f;
};
PoissonSolution solve_poisson(const Mat& kernel, const std::vector<Vec>& f);
PoissonSolution solve_poisson(const NoiseOracle& oracle, const std::vector<Vec>& f);

/// Exact split of the logged noise into a martingale part (zero conditional
/// mean given the previous state, by construction from the kernel) and a
/// Markovian remainder; the two parts add back to the logged noise exactly.
struct NoiseSplit {
    Vec v0, v1, w0, w1;
};
std::vector<NoiseSplit> split_noise(const TtsaProblem& p, const NoiseOracle& oracle,
                                    const std::vector<NoiseSample>& noise_log, int x0);

/// Long-run covariance of the slow-chain noise function
/// psi(x) = eps_v(x) - a12 a22^{-1} eps_w(x) along the chain:
///   sum_x pi(x) sum_y P(x,y) (psi_hat(y) - (P psi_hat)(x)) (...)^T
/// with psi_hat the Poisson solution. Equals Var_pi[psi] plus twice the
/// summed autocovariances; symmetric PSD by construction.
Mat markov_asymptotic_covariance(const TtsaProblem& p, const NoiseOracle& oracle);

}  // namespace ttsa
