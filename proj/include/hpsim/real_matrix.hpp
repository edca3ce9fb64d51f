#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "hpsim/errors.hpp"

namespace hpsim {

/// Dense real matrix, row-major.  Workhorse of the eigensolver and the
/// SDP engine; kept deliberately minimal.
struct RealMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    RealMatrix() = default;
    RealMatrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}

    double& at(int i, int j) { return data[static_cast<size_t>(i) * cols + j]; }
    double at(int i, int j) const { return data[static_cast<size_t>(i) * cols + j]; }

    static RealMatrix identity(int n) {
        RealMatrix m(n, n);
        for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
        return m;
    }
};

inline RealMatrix operator+(const RealMatrix& a, const RealMatrix& b) {
    RealMatrix r = a;
    for (size_t i = 0; i < r.data.size(); ++i) r.data[i] += b.data[i];
    return r;
}

inline RealMatrix operator-(const RealMatrix& a, const RealMatrix& b) {
    RealMatrix r = a;
    for (size_t i = 0; i < r.data.size(); ++i) r.data[i] -= b.data[i];
    return r;
}

inline RealMatrix operator*(double s, const RealMatrix& a) {
    RealMatrix r = a;
    for (auto& v : r.data) v *= s;
    return r;
}

inline void matmul_into(const RealMatrix& a, const RealMatrix& b, RealMatrix& out) {
    out.rows = a.rows;
    out.cols = b.cols;
    out.data.assign(static_cast<size_t>(a.rows) * b.cols, 0.0);
    const int n = a.cols;
    for (int i = 0; i < a.rows; ++i) {
        const double* arow = &a.data[static_cast<size_t>(i) * n];
        double* orow = &out.data[static_cast<size_t>(i) * b.cols];
        for (int k = 0; k < n; ++k) {
            double aik = arow[k];
            if (aik == 0.0) continue;
            const double* brow = &b.data[static_cast<size_t>(k) * b.cols];
            for (int j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
        }
    }
}

inline RealMatrix operator*(const RealMatrix& a, const RealMatrix& b) {
    RealMatrix r;
    matmul_into(a, b, r);
    return r;
}

inline RealMatrix transpose_of(const RealMatrix& a) {
    RealMatrix r(a.cols, a.rows);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) r.at(j, i) = a.at(i, j);
    return r;
}

inline double frobenius_norm(const RealMatrix& a) {
    double s = 0.0;
    for (double v : a.data) s += v * v;
    return std::sqrt(s);
}

inline double trace_of(const RealMatrix& a) {
    double t = 0.0;
    for (int i = 0; i < std::min(a.rows, a.cols); ++i) t += a.at(i, i);
    return t;
}

inline void symmetrize(RealMatrix& a) {
    for (int i = 0; i < a.rows; ++i)
        for (int j = i + 1; j < a.cols; ++j) {
            double v = 0.5 * (a.at(i, j) + a.at(j, i));
            a.at(i, j) = v;
            a.at(j, i) = v;
        }
}

/// In-place lower Cholesky of a symmetric matrix.  Returns false on a
/// non-positive pivot (matrix not positive definite within `shift`).
inline bool cholesky_in_place(RealMatrix& a, double shift = 0.0) {
    const int n = a.rows;
    for (int j = 0; j < n; ++j) {
        double d = a.at(j, j) + shift;
        const double* rowj = &a.data[static_cast<size_t>(j) * n];
        for (int k = 0; k < j; ++k) d -= rowj[k] * rowj[k];
        if (d <= 0.0 || !std::isfinite(d)) return false;
        d = std::sqrt(d);
        a.at(j, j) = d;
        double inv = 1.0 / d;
        for (int i = j + 1; i < n; ++i) {
            double s = a.at(i, j);
            const double* rowi = &a.data[static_cast<size_t>(i) * n];
            for (int k = 0; k < j; ++k) s -= rowi[k] * rowj[k];
            a.at(i, j) = s * inv;
        }
        for (int k = j + 1; k < n; ++k) a.at(j, k) = 0.0;
    }
    return true;
}

/// Solve L L^T x = b given the Cholesky factor L (lower).
inline void cholesky_solve(const RealMatrix& l, std::vector<double>& b) {
    const int n = l.rows;
    for (int i = 0; i < n; ++i) {
        double s = b[i];
        const double* row = &l.data[static_cast<size_t>(i) * n];
        for (int k = 0; k < i; ++k) s -= row[k] * b[k];
        b[i] = s / row[i];
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int k = i + 1; k < n; ++k) s -= l.at(k, i) * b[k];
        b[i] = s / l.at(i, i);
    }
}

/// Symmetric inverse via Cholesky.  Throws IllPosed if not PD.
inline RealMatrix cholesky_inverse(RealMatrix a) {
    const int n = a.rows;
    if (!cholesky_in_place(a)) throw IllPosed("cholesky_inverse: matrix not positive definite");
    RealMatrix inv(n, n);
    std::vector<double> e(n);
    for (int j = 0; j < n; ++j) {
        std::fill(e.begin(), e.end(), 0.0);
        e[j] = 1.0;
        cholesky_solve(a, e);
        for (int i = 0; i < n; ++i) inv.at(i, j) = e[i];
    }
    symmetrize(inv);
    return inv;
}

/// Cyclic Jacobi eigensolver for symmetric matrices.  Eigenvalues land in
/// `w` (descending), eigenvectors in the columns of `v`.
inline void jacobi_symmetric(RealMatrix a, std::vector<double>& w, RealMatrix& v,
                             int max_sweeps = 64) {
    const int n = a.rows;
    v = RealMatrix::identity(n);
    w.assign(n, 0.0);
    if (n == 0) return;

    double scale = 0.0;
    for (double x : a.data) scale = std::max(scale, std::abs(x));
    if (scale == 0.0) return;
    const double stop = 1e-15 * scale;

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off = std::max(off, std::abs(a.at(p, q)));
        if (off <= stop) break;
        if (sweep == max_sweeps - 1)
            throw NoConvergence("jacobi_symmetric: sweep budget exceeded");

        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double apq = a.at(p, q);
                if (std::abs(apq) <= stop * 1e-2) continue;
                double theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
                double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                // rotate rows/cols p and q
                for (int k = 0; k < n; ++k) {
                    double akp = a.at(k, p), akq = a.at(k, q);
                    a.at(k, p) = c * akp - s * akq;
                    a.at(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    double apk = a.at(p, k), aqk = a.at(q, k);
                    a.at(p, k) = c * apk - s * aqk;
                    a.at(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    double vkp = v.at(k, p), vkq = v.at(k, q);
                    v.at(k, p) = c * vkp - s * vkq;
                    v.at(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> diag(n);
    for (int i = 0; i < n; ++i) diag[i] = a.at(i, i);
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return diag[i] > diag[j]; });
    RealMatrix vs(n, n);
    for (int j = 0; j < n; ++j) {
        w[j] = diag[order[j]];
        for (int i = 0; i < n; ++i) vs.at(i, j) = v.at(i, order[j]);
    }
    v = std::move(vs);
}

}  // namespace hpsim
