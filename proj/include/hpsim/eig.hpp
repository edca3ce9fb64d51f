#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "hpsim/matrix.hpp"
#include "hpsim/real_matrix.hpp"
#include "hpsim/settings.hpp"

namespace hpsim {

/// H = A + iB  ->  [[A, -B], [B, A]], symmetric when H is Hermitian.
/// Positive semidefinite iff H is; every eigenvalue of H shows up twice.
inline RealMatrix embed_hermitian(const CMatrix& h, double tol = 1e-9) {
    if (h.rows != h.cols) throw NotHermitian("embed_hermitian: not square");
    if (!is_hermitian(h, tol)) throw NotHermitian("embed_hermitian: matrix is not Hermitian");
    const int n = h.rows;
    RealMatrix s(2 * n, 2 * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double re = h.at(i, j).real();
            double im = h.at(i, j).imag();
            s.at(i, j) = re;
            s.at(n + i, n + j) = re;
            s.at(n + i, j) = im;
            s.at(i, n + j) = -im;
        }
    return s;
}

/// Inverse of embed_hermitian, projecting a general 2n x 2n symmetric
/// matrix onto the embedded-Hermitian subspace.
inline CMatrix from_embedding(const RealMatrix& s) {
    if (s.rows != s.cols || s.rows % 2 != 0)
        throw DimensionMismatch("from_embedding: need even square matrix");
    const int n = s.rows / 2;
    CMatrix h(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double re = 0.5 * (s.at(i, j) + s.at(n + i, n + j));
            double im = 0.5 * (s.at(n + i, j) - s.at(i, n + j));
            h.at(i, j) = cplx(re, im);
        }
    return hermitize(h);
}

struct EigDecomposition {
    std::vector<double> eigenvalues;  // descending
    CMatrix eigenvectors;             // orthonormal columns
};

/// Hermitian eigendecomposition via cyclic Jacobi on the real embedding.
/// The doubled spectrum is deduplicated by a Gram-Schmidt pass in complex
/// arithmetic: each real eigenvector [x; y] corresponds to the complex
/// vector x + iy, and the partner i(x + iy) is automatically discarded as
/// linearly dependent.
inline EigDecomposition eig_hermitian(const CMatrix& a, double tol = 1e-9) {
    if (a.rows != a.cols) throw NotHermitian("eig_hermitian: not square");
    const int n = a.rows;
    RealMatrix s = embed_hermitian(a, tol);
    std::vector<double> w;
    RealMatrix v;
    jacobi_symmetric(std::move(s), w, v);

    EigDecomposition out;
    out.eigenvectors = CMatrix(n, n);
    out.eigenvalues.reserve(n);
    std::vector<std::vector<cplx>> accepted;
    const double accept2 = 0.25 / std::max(1, n);

    for (int col = 0; col < 2 * n && static_cast<int>(accepted.size()) < n; ++col) {
        std::vector<cplx> cand(n);
        for (int i = 0; i < n; ++i) cand[i] = cplx(v.at(i, col), v.at(n + i, col));
        // orthogonalize twice for stability
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& u : accepted) {
                cplx ip = 0.0;
                for (int i = 0; i < n; ++i) ip += std::conj(u[i]) * cand[i];
                for (int i = 0; i < n; ++i) cand[i] -= ip * u[i];
            }
        }
        double norm2 = 0.0;
        for (const auto& c : cand) norm2 += std::norm(c);
        if (norm2 <= accept2) continue;
        double inv = 1.0 / std::sqrt(norm2);
        for (auto& c : cand) c *= inv;
        int idx = static_cast<int>(accepted.size());
        for (int i = 0; i < n; ++i) out.eigenvectors.at(i, idx) = cand[i];
        // Rayleigh quotient; more faithful than w[col] inside merged clusters
        cplx rq = 0.0;
        for (int i = 0; i < n; ++i) {
            cplx av = 0.0;
            for (int j = 0; j < n; ++j) av += a.at(i, j) * cand[j];
            rq += std::conj(cand[i]) * av;
        }
        out.eigenvalues.push_back(rq.real());
        accepted.push_back(std::move(cand));
    }
    if (static_cast<int>(accepted.size()) != n)
        throw NoConvergence("eig_hermitian: failed to extract full eigenbasis");

    // Rayleigh quotients inside a degenerate cluster can come out of order
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
        return out.eigenvalues[i] > out.eigenvalues[j];
    });
    EigDecomposition sorted;
    sorted.eigenvectors = CMatrix(n, n);
    sorted.eigenvalues.resize(n);
    for (int j = 0; j < n; ++j) {
        sorted.eigenvalues[j] = out.eigenvalues[order[j]];
        for (int i = 0; i < n; ++i)
            sorted.eigenvectors.at(i, j) = out.eigenvectors.at(i, order[j]);
    }
    return sorted;
}

/// Sum of singular values; computed on the Hermitian blow-up [[0, A], [A^dag, 0]]
/// whose spectrum is {+-sigma_i}.
inline double trace_norm(const CMatrix& a) {
    if (a.rows != a.cols) throw DimensionMismatch("trace_norm: not square");
    const int n = a.rows;
    if (n == 0) return 0.0;
    if (is_hermitian(a, 1e-12)) {
        auto eig = eig_hermitian(hermitize(a));
        double s = 0.0;
        for (double l : eig.eigenvalues) s += std::abs(l);
        return s;
    }
    CMatrix blow(2 * n, 2 * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            blow.at(i, n + j) = a.at(i, j);
            blow.at(n + j, i) = std::conj(a.at(i, j));
        }
    auto eig = eig_hermitian(blow);
    double s = 0.0;
    for (double l : eig.eigenvalues)
        if (l > 0.0) s += l;
    return s;
}

/// Spectral norm of a Hermitian matrix.
inline double op_norm(const CMatrix& a, double tol = 1e-9) {
    if (a.rows != a.cols || !is_hermitian(a, tol))
        throw NotHermitian("op_norm: matrix is not Hermitian");
    if (a.rows == 0) return 0.0;
    auto eig = eig_hermitian(hermitize(a), tol);
    double m = 0.0;
    for (double l : eig.eigenvalues) m = std::max(m, std::abs(l));
    return m;
}

/// True iff the smallest eigenvalue is >= -tol * max(1, ||a||_inf).
inline bool psd_check(const CMatrix& a, double tol = 1e-9) {
    if (a.rows != a.cols || !is_hermitian(a, std::max(tol, 1e-9)))
        throw NotHermitian("psd_check: matrix is not Hermitian");
    if (a.rows == 0) return true;
    auto eig = eig_hermitian(hermitize(a), std::max(tol, 1e-9));
    double lo = eig.eigenvalues.back();
    double hi = std::max(std::abs(eig.eigenvalues.front()), std::abs(lo));
    return lo >= -tol * std::max(1.0, hi);
}

/// Clip negative eigenvalues to zero; used to rehabilitate near-PSD
/// certificates before Kraus extraction.
inline CMatrix psd_project(const CMatrix& a) {
    auto eig = eig_hermitian(hermitize(a));
    const int n = a.rows;
    CMatrix r(n, n);
    for (int k = 0; k < n; ++k) {
        double l = eig.eigenvalues[k];
        if (l <= 0.0) continue;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                r.at(i, j) += l * eig.eigenvectors.at(i, k) * std::conj(eig.eigenvectors.at(j, k));
    }
    return hermitize(r);
}

}  // namespace hpsim
