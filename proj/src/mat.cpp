#include "mat.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace ttsa {

namespace {

void require(bool cond, ErrorCode code, const char* msg) {
    if (!cond) throw Error(code, msg);
}

}  // namespace

Mat::Mat(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    a_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        require(r.size() == cols_, ErrorCode::DimensionMismatch, "ragged initializer");
        a_.insert(a_.end(), r.begin(), r.end());
    }
}

Mat Mat::identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Mat Mat::diag(const Vec& d) {
    Mat m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

bool Mat::all_finite() const {
    return std::all_of(a_.begin(), a_.end(), [](double v) { return std::isfinite(v); });
}

Mat operator+(const Mat& x, const Mat& y) {
    require(x.rows() == y.rows() && x.cols() == y.cols(), ErrorCode::DimensionMismatch, "mat add");
    Mat r(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows() * x.cols(); ++i) r.data()[i] = x.data()[i] + y.data()[i];
    return r;
}

Mat operator-(const Mat& x, const Mat& y) {
    require(x.rows() == y.rows() && x.cols() == y.cols(), ErrorCode::DimensionMismatch, "mat sub");
    Mat r(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows() * x.cols(); ++i) r.data()[i] = x.data()[i] - y.data()[i];
    return r;
}

Mat operator*(const Mat& x, const Mat& y) {
    require(x.cols() == y.rows(), ErrorCode::DimensionMismatch, "mat mul");
    Mat r(x.rows(), y.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t k = 0; k < x.cols(); ++k) {
            const double xv = x(i, k);
            if (xv == 0.0) continue;
            for (std::size_t j = 0; j < y.cols(); ++j) r(i, j) += xv * y(k, j);
        }
    }
    return r;
}

Mat operator*(double s, const Mat& x) {
    Mat r(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows() * x.cols(); ++i) r.data()[i] = s * x.data()[i];
    return r;
}

Vec operator*(const Mat& x, const Vec& v) {
    require(x.cols() == v.size(), ErrorCode::DimensionMismatch, "mat-vec mul");
    Vec r(x.rows(), 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < x.cols(); ++j) s += x(i, j) * v[j];
        r[i] = s;
    }
    return r;
}

Vec operator+(const Vec& x, const Vec& y) {
    require(x.size() == y.size(), ErrorCode::DimensionMismatch, "vec add");
    Vec r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] + y[i];
    return r;
}

Vec operator-(const Vec& x, const Vec& y) {
    require(x.size() == y.size(), ErrorCode::DimensionMismatch, "vec sub");
    Vec r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] - y[i];
    return r;
}

Vec operator*(double s, const Vec& x) {
    Vec r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = s * x[i];
    return r;
}

Mat transpose(const Mat& x) {
    Mat r(x.cols(), x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) r(j, i) = x(i, j);
    return r;
}

Mat kron(const Mat& x, const Mat& y) {
    Mat r(x.rows() * y.rows(), x.cols() * y.cols());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) {
            const double xv = x(i, j);
            if (xv == 0.0) continue;
            for (std::size_t k = 0; k < y.rows(); ++k)
                for (std::size_t l = 0; l < y.cols(); ++l)
                    r(i * y.rows() + k, j * y.cols() + l) = xv * y(k, l);
        }
    return r;
}

double dot(const Vec& x, const Vec& y) {
    require(x.size() == y.size(), ErrorCode::DimensionMismatch, "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

double norm2(const Vec& x) { return std::sqrt(dot(x, x)); }

double max_abs(const Vec& x) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
}

double max_abs(const Mat& x) {
    double m = 0.0;
    for (std::size_t i = 0; i < x.rows() * x.cols(); ++i) m = std::max(m, std::abs(x.data()[i]));
    return m;
}

double frobenius_norm(const Mat& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.rows() * x.cols(); ++i) s += x.data()[i] * x.data()[i];
    return std::sqrt(s);
}

double op_norm(const Mat& x) {
    if (x.rows() == 0 || x.cols() == 0) return 0.0;
    // Largest eigenvalue of x^T x; symmetric by construction.
    Mat g = transpose(x) * x;
    SymEig e = sym_eig(g);
    double lmax = e.values.back();
    return lmax > 0.0 ? std::sqrt(lmax) : 0.0;
}

Lu::Lu(const Mat& a) : lu_(a), piv_(a.rows()) {
    require(a.square(), ErrorCode::DimensionMismatch, "LU needs a square matrix");
    const std::size_t n = a.rows();
    a_norm1_ = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double c = 0.0;
        for (std::size_t i = 0; i < n; ++i) c += std::abs(a(i, j));
        a_norm1_ = std::max(a_norm1_, c);
    }
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        double best = std::abs(lu_(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double v = std::abs(lu_(i, k));
            if (v > best) { best = v; p = i; }
        }
        if (best == 0.0) throw Error(ErrorCode::Singular, "zero pivot in LU factorization");
        piv_[k] = p;
        if (p != k)
            for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(p, j));
        const double inv_piv = 1.0 / lu_(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double m = lu_(i, k) * inv_piv;
            lu_(i, k) = m;
            if (m == 0.0) continue;
            for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= m * lu_(k, j);
        }
    }
}

Vec Lu::solve(const Vec& b) const {
    const std::size_t n = lu_.rows();
    require(b.size() == n, ErrorCode::DimensionMismatch, "LU solve rhs size");
    Vec x = b;
    // all row swaps first: the stored multipliers are those of the fully
    // permuted factorization, so interleaving swaps with elimination would
    // pair them with the wrong entries
    for (std::size_t k = 0; k < n; ++k)
        if (piv_[k] != k) std::swap(x[k], x[piv_[k]]);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = k + 1; i < n; ++i) x[i] -= lu_(i, k) * x[k];
    for (std::size_t ii = n; ii-- > 0;) {
        for (std::size_t j = ii + 1; j < n; ++j) x[ii] -= lu_(ii, j) * x[j];
        x[ii] /= lu_(ii, ii);
    }
    return x;
}

Mat Lu::solve(const Mat& b) const {
    require(b.rows() == lu_.rows(), ErrorCode::DimensionMismatch, "LU solve rhs rows");
    Mat x(b.rows(), b.cols());
    Vec col(b.rows());
    for (std::size_t j = 0; j < b.cols(); ++j) {
        for (std::size_t i = 0; i < b.rows(); ++i) col[i] = b(i, j);
        Vec s = solve(col);
        for (std::size_t i = 0; i < b.rows(); ++i) x(i, j) = s[i];
    }
    return x;
}

Mat Lu::inverse() const { return solve(Mat::identity(lu_.rows())); }

double Lu::cond1() const {
    Mat inv = inverse();
    double inv_norm1 = 0.0;
    for (std::size_t j = 0; j < inv.cols(); ++j) {
        double c = 0.0;
        for (std::size_t i = 0; i < inv.rows(); ++i) c += std::abs(inv(i, j));
        inv_norm1 = std::max(inv_norm1, c);
    }
    return a_norm1_ * inv_norm1;
}

Vec solve(const Mat& a, const Vec& b) { return Lu(a).solve(b); }
Mat solve(const Mat& a, const Mat& b) { return Lu(a).solve(b); }
Mat inverse(const Mat& a) { return Lu(a).inverse(); }
double cond1(const Mat& a) { return Lu(a).cond1(); }

SymEig sym_eig(const Mat& a) {
    require(a.square(), ErrorCode::DimensionMismatch, "sym_eig needs a square matrix");
    const std::size_t n = a.rows();
    Mat d = a;
    Mat v = Mat::identity(n);
    const int max_sweeps = 64;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += d(i, j) * d(i, j);
        if (off < 1e-300) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = d(p, q);
                if (std::abs(apq) < 1e-300) continue;
                const double app = d(p, p), aqq = d(q, q);
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double dkp = d(k, p), dkq = d(k, q);
                    d(k, p) = c * dkp - s * dkq;
                    d(k, q) = s * dkp + c * dkq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double dpk = d(p, k), dqk = d(q, k);
                    d(p, k) = c * dpk - s * dqk;
                    d(q, k) = s * dpk + c * dqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    // Sort ascending, carrying eigenvector columns.
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return d(i, i) < d(j, j); });
    SymEig out;
    out.values.resize(n);
    out.vectors = Mat(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = d(order[j], order[j]);
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
    }
    return out;
}

namespace {

Mat spd_power(const Mat& a, double exponent) {
    SymEig e = sym_eig(a);
    const std::size_t n = a.rows();
    const double scale = std::max(1.0, std::abs(e.values.back()));
    Mat r(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        double lam = e.values[k];
        if (lam < -1e-10 * scale)
            throw Error(ErrorCode::NumericalFailure, "matrix power of a non-PSD matrix");
        lam = std::max(lam, 0.0);
        if (lam == 0.0 && exponent < 0.0)
            throw Error(ErrorCode::Singular, "inverse power of a singular matrix");
        const double f = std::pow(lam, exponent);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) r(i, j) += f * e.vectors(i, k) * e.vectors(j, k);
    }
    return r;
}

}  // namespace

Mat sqrt_spd(const Mat& a) { return spd_power(a, 0.5); }
Mat inv_sqrt_spd(const Mat& a) { return spd_power(a, -0.5); }

bool is_symmetric(const Mat& a, double tol) {
    if (!a.square()) return false;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = i + 1; j < a.cols(); ++j)
            if (std::abs(a(i, j) - a(j, i)) > tol) return false;
    return true;
}

namespace {

// Householder reduction to upper Hessenberg form (in place).
void to_hessenberg(Mat& h) {
    const std::size_t n = h.rows();
    if (n < 3) return;
    for (std::size_t k = 0; k + 2 < n; ++k) {
        double scale = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) scale += std::abs(h(i, k));
        if (scale == 0.0) continue;
        double sigma = 0.0;
        Vec u(n, 0.0);
        for (std::size_t i = k + 1; i < n; ++i) {
            u[i] = h(i, k) / scale;
            sigma += u[i] * u[i];
        }
        double alpha = std::sqrt(sigma);
        if (u[k + 1] > 0.0) alpha = -alpha;
        sigma -= u[k + 1] * alpha;
        u[k + 1] -= alpha;
        if (sigma == 0.0) continue;
        // H <- P H P with P = I - u u^T / sigma acting on rows/cols k+1..n-1.
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t i = k + 1; i < n; ++i) s += u[i] * h(i, j);
            s /= sigma;
            for (std::size_t i = k + 1; i < n; ++i) h(i, j) -= s * u[i];
        }
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = k + 1; j < n; ++j) s += h(i, j) * u[j];
            s /= sigma;
            for (std::size_t j = k + 1; j < n; ++j) h(i, j) -= s * u[j];
        }
        h(k + 1, k) = scale * alpha;
        for (std::size_t i = k + 2; i < n; ++i) h(i, k) = 0.0;
    }
}

inline double sign_with(double magnitude, double sign_of) {
    return sign_of >= 0.0 ? std::abs(magnitude) : -std::abs(magnitude);
}

// Shifted double-step QR iteration on an upper Hessenberg matrix; classic
// real-Schur eigenvalue extraction with exceptional shifts.
std::vector<std::complex<double>> hessenberg_eigenvalues(Mat& h) {
    const std::size_t dim = h.rows();
    std::vector<std::complex<double>> out;
    out.reserve(dim);
    if (dim == 0) return out;
    const double eps = 2.22e-16;
    double anorm = 0.0;
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = (i == 0 ? 0 : i - 1); j < dim; ++j) anorm += std::abs(h(i, j));
    if (anorm == 0.0) anorm = 1.0;

    long nn = static_cast<long>(dim) - 1;
    double t = 0.0;
    while (nn >= 0) {
        int its = 0;
        long l;
        do {
            for (l = nn; l >= 1; --l) {
                const double s = std::abs(h(l - 1, l - 1)) + std::abs(h(l, l));
                const double s2 = (s == 0.0) ? anorm : s;
                if (std::abs(h(l, l - 1)) <= eps * s2) {
                    h(l, l - 1) = 0.0;
                    break;
                }
            }
            double x = h(nn, nn);
            if (l == nn) {
                out.emplace_back(x + t, 0.0);
                --nn;
            } else {
                double y = h(nn - 1, nn - 1);
                double w = h(nn, nn - 1) * h(nn - 1, nn);
                if (l == nn - 1) {
                    double p = 0.5 * (y - x);
                    double q = p * p + w;
                    double z = std::sqrt(std::abs(q));
                    x += t;
                    if (q >= 0.0) {
                        z = p + sign_with(z, p);
                        out.emplace_back(x + z, 0.0);
                        out.emplace_back(z != 0.0 ? x - w / z : x + z, 0.0);
                    } else {
                        out.emplace_back(x + p, z);
                        out.emplace_back(x + p, -z);
                    }
                    nn -= 2;
                } else {
                    if (its == 60)
                        throw Error(ErrorCode::NumericalFailure,
                                    "eigenvalue QR iteration did not converge");
                    double p = 0.0, q = 0.0, r = 0.0, z = 0.0;
                    if (its == 10 || its == 20 || its == 30 || its == 40 || its == 50) {
                        t += x;
                        for (long i = 0; i <= nn; ++i) h(i, i) -= x;
                        const double s = std::abs(h(nn, nn - 1)) + std::abs(h(nn - 1, nn - 2));
                        y = x = 0.75 * s;
                        w = -0.4375 * s * s;
                    }
                    ++its;
                    long m;
                    for (m = nn - 2; m >= l; --m) {
                        z = h(m, m);
                        const double r1 = x - z;
                        const double s1 = y - z;
                        p = (r1 * s1 - w) / h(m + 1, m) + h(m, m + 1);
                        q = h(m + 1, m + 1) - z - r1 - s1;
                        r = h(m + 2, m + 1);
                        const double s = std::abs(p) + std::abs(q) + std::abs(r);
                        p /= s;
                        q /= s;
                        r /= s;
                        if (m == l) break;
                        const double u = std::abs(h(m, m - 1)) * (std::abs(q) + std::abs(r));
                        const double v = std::abs(p) * (std::abs(h(m - 1, m - 1)) + std::abs(z) +
                                                        std::abs(h(m + 1, m + 1)));
                        if (u <= eps * v) break;
                    }
                    for (long i = m + 2; i <= nn; ++i) {
                        h(i, i - 2) = 0.0;
                        if (i != m + 2) h(i, i - 3) = 0.0;
                    }
                    for (long k = m; k <= nn - 1; ++k) {
                        if (k != m) {
                            p = h(k, k - 1);
                            q = h(k + 1, k - 1);
                            r = (k != nn - 1) ? h(k + 2, k - 1) : 0.0;
                            x = std::abs(p) + std::abs(q) + std::abs(r);
                            if (x != 0.0) {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        double s = sign_with(std::sqrt(p * p + q * q + r * r), p);
                        if (s == 0.0) continue;
                        if (k == m) {
                            if (l != m) h(k, k - 1) = -h(k, k - 1);
                        } else {
                            h(k, k - 1) = -s * x;
                        }
                        p += s;
                        x = p / s;
                        double yy = q / s;
                        z = r / s;
                        q /= p;
                        r /= p;
                        for (long j = k; j <= nn; ++j) {
                            double pp = h(k, j) + q * h(k + 1, j);
                            if (k != nn - 1) {
                                pp += r * h(k + 2, j);
                                h(k + 2, j) -= pp * z;
                            }
                            h(k + 1, j) -= pp * yy;
                            h(k, j) -= pp * x;
                        }
                        const long mmin = (nn < k + 3) ? nn : k + 3;
                        for (long i = l; i <= mmin; ++i) {
                            double pp = x * h(i, k) + yy * h(i, k + 1);
                            if (k != nn - 1) {
                                pp += z * h(i, k + 2);
                                h(i, k + 2) -= pp * r;
                            }
                            h(i, k + 1) -= pp * q;
                            h(i, k) -= pp;
                        }
                    }
                }
            }
        } while (l < nn - 1);
    }
    return out;
}

}  // namespace

std::vector<std::complex<double>> eig_general(const Mat& a) {
    require(a.square(), ErrorCode::DimensionMismatch, "eig_general needs a square matrix");
    require(a.all_finite(), ErrorCode::InvalidArgument, "eig_general needs finite entries");
    Mat h = a;
    to_hessenberg(h);
    auto eigs = hessenberg_eigenvalues(h);
    // Deterministic order: by real part, then imaginary part.
    std::sort(eigs.begin(), eigs.end(), [](const auto& x, const auto& y) {
        if (x.real() != y.real()) return x.real() < y.real();
        return x.imag() < y.imag();
    });
    return eigs;
}

}  // namespace ttsa
