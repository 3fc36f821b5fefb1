#include "linalg.hpp"

#include <cmath>
#include <string>

namespace ttsa {

namespace {

// Column-stacked vec; converts between the row-major Mat layout and the
// Kronecker-identity convention vec(AXB) = (B^T (x) A) vec(X).
Vec vec_col(const Mat& x) {
    Vec v(x.rows() * x.cols());
    for (std::size_t j = 0; j < x.cols(); ++j)
        for (std::size_t i = 0; i < x.rows(); ++i) v[j * x.rows() + i] = x(i, j);
    return v;
}

Mat unvec_col(const Vec& v, std::size_t rows, std::size_t cols) {
    Mat x(rows, cols);
    for (std::size_t j = 0; j < cols; ++j)
        for (std::size_t i = 0; i < rows; ++i) x(i, j) = v[j * rows + i];
    return x;
}

}  // namespace

HurwitzReport eig_check_hurwitz(const Mat& a, double tol) {
    if (!a.square()) throw Error(ErrorCode::DimensionMismatch, "hurwitz check needs a square matrix");
    HurwitzReport r;
    auto eigs = eig_general(a);
    r.min_real_part = eigs.empty() ? 0.0 : eigs.front().real();
    for (const auto& e : eigs) r.min_real_part = std::min(r.min_real_part, e.real());
    r.negated_is_hurwitz = r.min_real_part > tol;
    return r;
}

LyapunovCertificate solve_lyapunov(const Mat& a, double tol) {
    if (!a.square()) throw Error(ErrorCode::DimensionMismatch, "lyapunov solve needs a square matrix");
    const std::size_t n = a.rows();
    HurwitzReport h = eig_check_hurwitz(a, tol);
    if (!h.negated_is_hurwitz)
        throw Error(ErrorCode::NotHurwitz,
                    "minimum eigenvalue real part " + std::to_string(h.min_real_part) +
                        " is not > " + std::to_string(tol));

    const Mat at = transpose(a);
    const Mat id = Mat::identity(n);
    Mat k = kron(id, at) + kron(at, id);
    Vec q_vec = Lu(k).solve(vec_col(id));
    Mat q = unvec_col(q_vec, n, n);
    // The exact solution is symmetric; symmetrize to remove roundoff skew.
    q = 0.5 * (q + transpose(q));

    LyapunovCertificate cert;
    cert.q = q;
    cert.residual_max = max_abs(at * q + q * a - id);
    if (cert.residual_max > 1e-10)
        throw Error(ErrorCode::NumericalFailure,
                    "lyapunov residual " + std::to_string(cert.residual_max) + " exceeds 1e-10");
    SymEig e = sym_eig(q);
    const double lmin = e.values.front(), lmax = e.values.back();
    if (lmin <= 0.0)
        throw Error(ErrorCode::NumericalFailure, "lyapunov solution is not positive definite");
    cert.q_norm_op = lmax;
    cert.kappa = lmax / lmin;
    cert.contraction_rate = 1.0 / (2.0 * lmax);
    cert.a_norm_q = q_op_norm(a, q);
    cert.max_step = 1.0 / (2.0 * lmax * cert.a_norm_q * cert.a_norm_q);
    return cert;
}

double q_norm(const Vec& x, const Mat& q) {
    if (q.rows() != x.size() || q.cols() != x.size())
        throw Error(ErrorCode::DimensionMismatch, "q_norm dimensions");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < x.size(); ++j) s += x[i] * q(i, j) * x[j];
    return std::sqrt(std::max(s, 0.0));
}

double q_op_norm(const Mat& b, const Mat& q) {
    if (!b.square() || !q.square() || b.rows() != q.rows())
        throw Error(ErrorCode::DimensionMismatch, "q_op_norm dimensions");
    Mat s = sqrt_spd(q) * b * inv_sqrt_spd(q);
    return op_norm(s);
}

Mat solve_sylvester_symmetric(const Mat& m, const Mat& rhs) {
    if (!m.square() || rhs.rows() != m.rows() || rhs.cols() != m.cols())
        throw Error(ErrorCode::DimensionMismatch, "sylvester dimensions");
    const std::size_t n = m.rows();
    const Mat id = Mat::identity(n);
    Mat k = kron(id, m) + kron(m, id);
    Vec x = Lu(k).solve(vec_col(rhs));
    return unvec_col(x, n, n);
}

}  // namespace ttsa
