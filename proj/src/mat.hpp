#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include "errors.hpp"

namespace ttsa {

using Vec = std::vector<double>;

/// Dense row-major matrix. Sized for the small systems this lab works with
/// (d <= 32); all algorithms prefer exactness and determinism over scale.
class Mat {
public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), a_(rows * cols, fill) {}
    Mat(std::initializer_list<std::initializer_list<double>> rows);

    static Mat identity(std::size_t n);
    static Mat diag(const Vec& d);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

    double* data() { return a_.data(); }
    const double* data() const { return a_.data(); }

    bool all_finite() const;

private:
    std::size_t rows_ = 0, cols_ = 0;
    Vec a_;
};

Mat operator+(const Mat& x, const Mat& y);
Mat operator-(const Mat& x, const Mat& y);
Mat operator*(const Mat& x, const Mat& y);
Mat operator*(double s, const Mat& x);
Vec operator*(const Mat& x, const Vec& v);
Vec operator+(const Vec& x, const Vec& y);
Vec operator-(const Vec& x, const Vec& y);
Vec operator*(double s, const Vec& x);

Mat transpose(const Mat& x);
Mat kron(const Mat& x, const Mat& y);

double dot(const Vec& x, const Vec& y);
double norm2(const Vec& x);
double max_abs(const Vec& x);
double max_abs(const Mat& x);
double frobenius_norm(const Mat& x);

/// Largest singular value (spectral norm).
double op_norm(const Mat& x);

/// LU factorization with partial pivoting of a square matrix.
/// Throws Error(Singular) when a pivot collapses to zero.
class Lu {
public:
    explicit Lu(const Mat& a);

    Vec solve(const Vec& b) const;
    Mat solve(const Mat& b) const;
    Mat inverse() const;
    /// 1-norm condition number via the explicit inverse; exact for the
    /// small dimensions in scope.
    double cond1() const;

private:
    Mat lu_;
    std::vector<std::size_t> piv_;
    double a_norm1_;
};

Vec solve(const Mat& a, const Vec& b);
Mat solve(const Mat& a, const Mat& b);
Mat inverse(const Mat& a);
double cond1(const Mat& a);

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues ascending; vectors has eigenvectors as columns.
struct SymEig {
    Vec values;
    Mat vectors;
};
SymEig sym_eig(const Mat& a);

/// Symmetric positive (semi)definite square root; throws NotHurwitz-class
/// NumericalFailure if an eigenvalue is below -tol.
Mat sqrt_spd(const Mat& a);
Mat inv_sqrt_spd(const Mat& a);

/// All eigenvalues of a general real square matrix: Householder reduction to
/// Hessenberg form followed by shifted double-step QR iteration.
std::vector<std::complex<double>> eig_general(const Mat& a);

bool is_symmetric(const Mat& a, double tol);

}  // namespace ttsa
