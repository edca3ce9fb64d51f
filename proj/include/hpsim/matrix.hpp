#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "hpsim/errors.hpp"
#include "hpsim/rng.hpp"

namespace hpsim {

using cplx = std::complex<double>;

/// Dense complex matrix, row-major.  Immutable by convention once built:
/// operations return fresh values rather than mutating in place.
struct CMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<cplx> entries;

    CMatrix() = default;
    CMatrix(int r, int c) : rows(r), cols(c), entries(static_cast<size_t>(r) * c) {}

    cplx& at(int i, int j) { return entries[static_cast<size_t>(i) * cols + j]; }
    const cplx& at(int i, int j) const { return entries[static_cast<size_t>(i) * cols + j]; }

    static CMatrix identity(int n) {
        CMatrix m(n, n);
        for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
        return m;
    }

    static CMatrix zero(int r, int c) { return CMatrix(r, c); }
};

inline CMatrix operator+(const CMatrix& a, const CMatrix& b) {
    if (a.rows != b.rows || a.cols != b.cols)
        throw DimensionMismatch("matrix add: shape mismatch");
    CMatrix r = a;
    for (size_t i = 0; i < r.entries.size(); ++i) r.entries[i] += b.entries[i];
    return r;
}

inline CMatrix operator-(const CMatrix& a, const CMatrix& b) {
    if (a.rows != b.rows || a.cols != b.cols)
        throw DimensionMismatch("matrix sub: shape mismatch");
    CMatrix r = a;
    for (size_t i = 0; i < r.entries.size(); ++i) r.entries[i] -= b.entries[i];
    return r;
}

inline CMatrix operator*(cplx s, const CMatrix& a) {
    CMatrix r = a;
    for (auto& e : r.entries) e *= s;
    return r;
}

inline CMatrix operator*(double s, const CMatrix& a) { return cplx(s, 0.0) * a; }

inline CMatrix operator*(const CMatrix& a, const CMatrix& b) {
    if (a.cols != b.rows) throw DimensionMismatch("matrix mul: inner dims differ");
    CMatrix r(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i) {
        for (int k = 0; k < a.cols; ++k) {
            cplx aik = a.at(i, k);
            if (aik == cplx(0.0)) continue;
            for (int j = 0; j < b.cols; ++j) r.at(i, j) += aik * b.at(k, j);
        }
    }
    return r;
}

inline CMatrix adjoint_of(const CMatrix& a) {
    CMatrix r(a.cols, a.rows);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) r.at(j, i) = std::conj(a.at(i, j));
    return r;
}

inline CMatrix transpose_of(const CMatrix& a) {
    CMatrix r(a.cols, a.rows);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) r.at(j, i) = a.at(i, j);
    return r;
}

inline CMatrix conj_of(const CMatrix& a) {
    CMatrix r = a;
    for (auto& e : r.entries) e = std::conj(e);
    return r;
}

inline cplx trace_of(const CMatrix& a) {
    if (a.rows != a.cols) throw DimensionMismatch("trace: not square");
    cplx t = 0.0;
    for (int i = 0; i < a.rows; ++i) t += a.at(i, i);
    return t;
}

inline double frobenius_norm(const CMatrix& a) {
    double s = 0.0;
    for (const auto& e : a.entries) s += std::norm(e);
    return std::sqrt(s);
}

inline double max_abs_entry(const CMatrix& a) {
    double m = 0.0;
    for (const auto& e : a.entries) m = std::max(m, std::abs(e));
    return m;
}

/// Hilbert-Schmidt inner product tr(a^dag b).
inline cplx hs_inner(const CMatrix& a, const CMatrix& b) {
    if (a.rows != b.rows || a.cols != b.cols)
        throw DimensionMismatch("hs_inner: shape mismatch");
    cplx s = 0.0;
    for (size_t i = 0; i < a.entries.size(); ++i)
        s += std::conj(a.entries[i]) * b.entries[i];
    return s;
}

inline bool all_finite(const CMatrix& a) {
    for (const auto& e : a.entries)
        if (!std::isfinite(e.real()) || !std::isfinite(e.imag())) return false;
    return true;
}

inline double hermiticity_defect(const CMatrix& a) {
    if (a.rows != a.cols) throw DimensionMismatch("hermiticity_defect: not square");
    double s = 0.0;
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) s += std::norm(a.at(i, j) - std::conj(a.at(j, i)));
    return std::sqrt(s);
}

inline bool is_hermitian(const CMatrix& a, double tol) {
    return hermiticity_defect(a) <= tol * std::max(1.0, frobenius_norm(a));
}

/// (a + a^dag)/2; cheap cleanup after operations that are Hermitian in
/// exact arithmetic.
inline CMatrix hermitize(const CMatrix& a) {
    CMatrix r(a.rows, a.cols);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j)
            r.at(i, j) = 0.5 * (a.at(i, j) + std::conj(a.at(j, i)));
    return r;
}

/// Kronecker product; composite index (i_a, i_b) -> i_a * dim_b + i_b,
/// i.e. the first factor is the slow (major) index.
inline CMatrix tensor(const CMatrix& a, const CMatrix& b) {
    CMatrix r(a.rows * b.rows, a.cols * b.cols);
    for (int ia = 0; ia < a.rows; ++ia)
        for (int ja = 0; ja < a.cols; ++ja) {
            cplx av = a.at(ia, ja);
            if (av == cplx(0.0)) continue;
            for (int ib = 0; ib < b.rows; ++ib)
                for (int jb = 0; jb < b.cols; ++jb)
                    r.at(ia * b.rows + ib, ja * b.cols + jb) = av * b.at(ib, jb);
        }
    return r;
}

enum class Subsystem { A, B };

/// Trace out one tensor factor of an operator on A (x) B, A major.
inline CMatrix partial_trace(const CMatrix& m, int dim_a, int dim_b, Subsystem keep) {
    if (m.rows != m.cols || m.rows != dim_a * dim_b)
        throw DimensionMismatch("partial_trace: operator is not (dim_a*dim_b)^2");
    if (keep == Subsystem::A) {
        CMatrix r(dim_a, dim_a);
        for (int a1 = 0; a1 < dim_a; ++a1)
            for (int a2 = 0; a2 < dim_a; ++a2) {
                cplx s = 0.0;
                for (int b = 0; b < dim_b; ++b)
                    s += m.at(a1 * dim_b + b, a2 * dim_b + b);
                r.at(a1, a2) = s;
            }
        return r;
    }
    CMatrix r(dim_b, dim_b);
    for (int b1 = 0; b1 < dim_b; ++b1)
        for (int b2 = 0; b2 < dim_b; ++b2) {
            cplx s = 0.0;
            for (int a = 0; a < dim_a; ++a)
                s += m.at(a * dim_b + b1, a * dim_b + b2);
            r.at(b1, b2) = s;
        }
    return r;
}

/// Unnormalized maximally entangled vector |Gamma> = sum_j |j>|j> as a
/// column, and its outer product.
inline CMatrix gamma_vector(int d) {
    CMatrix v(d * d, 1);
    for (int j = 0; j < d; ++j) v.at(j * d + j, 0) = 1.0;
    return v;
}

inline CMatrix gamma_projector(int d) {
    CMatrix g(d * d, d * d);
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) g.at(j * d + j, k * d + k) = 1.0;
    return g;
}

inline CMatrix pauli_x() {
    CMatrix m(2, 2);
    m.at(0, 1) = 1.0;
    m.at(1, 0) = 1.0;
    return m;
}

inline CMatrix pauli_y() {
    CMatrix m(2, 2);
    m.at(0, 1) = cplx(0.0, -1.0);
    m.at(1, 0) = cplx(0.0, 1.0);
    return m;
}

inline CMatrix pauli_z() {
    CMatrix m(2, 2);
    m.at(0, 0) = 1.0;
    m.at(1, 1) = -1.0;
    return m;
}

/// Random GUE-distributed Hermitian matrix (off-diagonal entries complex
/// normal, diagonal real normal).
inline CMatrix random_hermitian(int n, RandomStream& rng) {
    CMatrix h(n, n);
    for (int i = 0; i < n; ++i) {
        h.at(i, i) = rng.normal();
        for (int j = i + 1; j < n; ++j) {
            cplx v(rng.normal() * M_SQRT1_2, rng.normal() * M_SQRT1_2);
            h.at(i, j) = v;
            h.at(j, i) = std::conj(v);
        }
    }
    return h;
}

/// Haar-random pure state of dimension n as a density matrix.
inline CMatrix random_pure_state(int n, RandomStream& rng) {
    std::vector<cplx> psi(n);
    double norm2 = 0.0;
    for (int i = 0; i < n; ++i) {
        psi[i] = cplx(rng.normal(), rng.normal());
        norm2 += std::norm(psi[i]);
    }
    double inv = 1.0 / std::sqrt(norm2);
    CMatrix rho(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) rho.at(i, j) = psi[i] * std::conj(psi[j]) * inv * inv;
    return rho;
}

}  // namespace hpsim
