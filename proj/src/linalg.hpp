#pragma once

#include "mat.hpp"

namespace ttsa {

/// Stability certificate for a matrix a with -a Hurwitz: q solves
/// a^T q + q a = I, contraction_rate = 1/(2*||q||), and any step size
/// alpha in (0, max_step] satisfies ||I - alpha*a||_q^2 <= 1 - alpha*contraction_rate.
struct LyapunovCertificate {
    Mat q;
    double contraction_rate = 0.0;
    double max_step = 0.0;
    double q_norm_op = 0.0;     // ||q|| (spectral)
    double a_norm_q = 0.0;      // ||a||_q
    double kappa = 0.0;         // cond(q) = lambda_max/lambda_min
    double residual_max = 0.0;  // ||a^T q + q a - I||_max
};

struct HurwitzReport {
    bool negated_is_hurwitz = false;  // all eigenvalues of a have real part > tol
    double min_real_part = 0.0;
};

/// True iff every eigenvalue of a has real part > tol (i.e. -a is Hurwitz).
HurwitzReport eig_check_hurwitz(const Mat& a, double tol = 1e-9);

/// Solve a^T q + q a = I by Kronecker vectorization with dense LU.
/// Throws NotHurwitz when some eigenvalue of a has real part <= tol.
LyapunovCertificate solve_lyapunov(const Mat& a, double tol = 1e-9);

/// sqrt(x^T q x) for symmetric positive definite q.
double q_norm(const Vec& x, const Mat& q);

/// Operator norm sup ||b x||_q / ||x||_q = largest singular value of
/// q^{1/2} b q^{-1/2}.
double q_op_norm(const Mat& b, const Mat& q);

/// Solve m x + x m^T = rhs (m square, rhs same shape) by vectorization.
/// Throws Singular when the Kronecker system is singular.
Mat solve_sylvester_symmetric(const Mat& m, const Mat& rhs);

}  // namespace ttsa
