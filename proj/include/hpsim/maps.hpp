#pragma once

#include <utility>
#include <vector>

#include "hpsim/eig.hpp"
#include "hpsim/matrix.hpp"
#include "hpsim/settings.hpp"

namespace hpsim {

/// Linear map between operator spaces, stored as its Choi operator with
/// the convention J = sum_{jk} |j><k|_A (x) E(|j><k|); the input system
/// is the major tensor index.
struct MapRep {
    int dim_in = 0;
    int dim_out = 0;
    CMatrix choi;

    MapRep() = default;
    MapRep(int din, int dout, CMatrix j) : dim_in(din), dim_out(dout), choi(std::move(j)) {
        if (choi.rows != dim_in * dim_out || choi.cols != dim_in * dim_out)
            throw DimensionMismatch("MapRep: Choi size does not match dims");
    }

    static MapRep identity(int d) {
        return MapRep(d, d, gamma_projector(d));
    }
};

/// Completely positive map as a list of Kraus operators (dim_out x dim_in).
struct KrausSet {
    int dim_in = 0;
    int dim_out = 0;
    std::vector<CMatrix> kraus;
};

/// Index data of an entry extraction map: strictly increasing positions
/// `indices` inside [0, d) and upper-triangle pairs (j, k), j <= k,
/// referring to positions in `indices`.
struct ExtractionSpec {
    int d = 0;
    std::vector<int> indices;
    std::vector<std::pair<int, int>> pairs;
};

inline bool maps_equal(const MapRep& a, const MapRep& b, double tol = 1e-9) {
    if (a.dim_in != b.dim_in || a.dim_out != b.dim_out) return false;
    return frobenius_norm(a.choi - b.choi) <= tol * std::max(1.0, frobenius_norm(a.choi));
}

inline MapRep choi_from_kraus(const KrausSet& k) {
    const int da = k.dim_in, db = k.dim_out;
    CMatrix j(da * db, da * db);
    for (const auto& km : k.kraus) {
        if (km.rows != db || km.cols != da)
            throw DimensionMismatch("choi_from_kraus: Kraus operator has wrong shape");
        for (int a1 = 0; a1 < da; ++a1)
            for (int b1 = 0; b1 < db; ++b1)
                for (int a2 = 0; a2 < da; ++a2)
                    for (int b2 = 0; b2 < db; ++b2)
                        j.at(a1 * db + b1, a2 * db + b2) +=
                            km.at(b1, a1) * std::conj(km.at(b2, a2));
    }
    return MapRep(da, db, std::move(j));
}

/// Kraus operators from the eigendecomposition of a PSD Choi operator.
/// Eigenvalues below the relative cutoff are dropped.
inline KrausSet kraus_from_choi(const MapRep& m, double tol = 1e-10) {
    auto eig = eig_hermitian(hermitize(m.choi));
    double top = eig.eigenvalues.empty() ? 0.0 : std::abs(eig.eigenvalues.front());
    double cut = tol * std::max(1.0, top);
    if (!eig.eigenvalues.empty() && eig.eigenvalues.back() < -cut)
        throw NotCP("kraus_from_choi: Choi operator has a negative eigenvalue");
    KrausSet out;
    out.dim_in = m.dim_in;
    out.dim_out = m.dim_out;
    for (size_t k = 0; k < eig.eigenvalues.size(); ++k) {
        double l = eig.eigenvalues[k];
        if (l <= cut) continue;
        double s = std::sqrt(l);
        CMatrix km(m.dim_out, m.dim_in);
        for (int a = 0; a < m.dim_in; ++a)
            for (int b = 0; b < m.dim_out; ++b)
                km.at(b, a) = s * eig.eigenvectors.at(a * m.dim_out + b, k);
        out.kraus.push_back(std::move(km));
    }
    return out;
}

/// E(rho) = tr_A[(rho^T (x) I) J].
inline CMatrix apply(const MapRep& m, const CMatrix& rho) {
    if (rho.rows != m.dim_in || rho.cols != m.dim_in)
        throw DimensionMismatch("apply: state dimension does not match map input");
    const int da = m.dim_in, db = m.dim_out;
    CMatrix out(db, db);
    for (int b1 = 0; b1 < db; ++b1)
        for (int b2 = 0; b2 < db; ++b2) {
            cplx s = 0.0;
            for (int j = 0; j < da; ++j)
                for (int a = 0; a < da; ++a)
                    s += rho.at(j, a) * m.choi.at(j * db + b1, a * db + b2);
            out.at(b1, b2) = s;
        }
    return out;
}

/// Adjoint action E^dag(sigma), defined by tr[E(rho) sigma] = tr[rho E^dag(sigma)].
inline CMatrix apply_adjoint(const MapRep& m, const CMatrix& sigma) {
    if (sigma.rows != m.dim_out || sigma.cols != m.dim_out)
        throw DimensionMismatch("apply_adjoint: operator dimension does not match map output");
    const int da = m.dim_in, db = m.dim_out;
    CMatrix out(da, da);
    for (int j = 0; j < da; ++j)
        for (int a = 0; a < da; ++a) {
            cplx s = 0.0;
            for (int b1 = 0; b1 < db; ++b1)
                for (int b2 = 0; b2 < db; ++b2)
                    s += m.choi.at(j * db + b1, a * db + b2) * sigma.at(b2, b1);
            out.at(a, j) = s;
        }
    return out;
}

/// Choi of the composition later ∘ earlier.
inline MapRep compose(const MapRep& later, const MapRep& earlier) {
    if (earlier.dim_out != later.dim_in)
        throw DimensionMismatch("compose: intermediate dimensions differ");
    const int da = earlier.dim_in, db = earlier.dim_out, dc = later.dim_out;
    CMatrix j(da * dc, da * dc);
    for (int a1 = 0; a1 < da; ++a1)
        for (int a2 = 0; a2 < da; ++a2)
            for (int c1 = 0; c1 < dc; ++c1)
                for (int c2 = 0; c2 < dc; ++c2) {
                    cplx s = 0.0;
                    for (int b1 = 0; b1 < db; ++b1)
                        for (int b2 = 0; b2 < db; ++b2)
                            s += earlier.choi.at(a1 * db + b1, a2 * db + b2) *
                                 later.choi.at(b1 * dc + c1, b2 * dc + c2);
                    j.at(a1 * dc + c1, a2 * dc + c2) = s;
                }
    return MapRep(da, dc, std::move(j));
}

/// id_{d_extra} (x) E as a MapRep, acting on the second tensor factor.
inline MapRep extend_with_identity(const MapRep& m, int d_extra) {
    const int da = m.dim_in, db = m.dim_out;
    const int din = d_extra * da, dout = d_extra * db;
    CMatrix j(din * dout, din * dout);
    for (int e1 = 0; e1 < d_extra; ++e1)
        for (int e2 = 0; e2 < d_extra; ++e2)
            for (int a1 = 0; a1 < da; ++a1)
                for (int a2 = 0; a2 < da; ++a2)
                    for (int b1 = 0; b1 < db; ++b1)
                        for (int b2 = 0; b2 < db; ++b2) {
                            int r = (e1 * da + a1) * dout + (e1 * db + b1);
                            int c = (e2 * da + a2) * dout + (e2 * db + b2);
                            j.at(r, c) = m.choi.at(a1 * db + b1, a2 * db + b2);
                        }
    return MapRep(din, dout, std::move(j));
}

inline MapRep scale_map(double c, const MapRep& m) {
    return MapRep(m.dim_in, m.dim_out, c * m.choi);
}

inline MapRep add_maps(const MapRep& a, const MapRep& b) {
    if (a.dim_in != b.dim_in || a.dim_out != b.dim_out)
        throw DimensionMismatch("add_maps: dims differ");
    return MapRep(a.dim_in, a.dim_out, a.choi + b.choi);
}

// --- predicates -----------------------------------------------------------

inline bool is_hermitian_preserving(const MapRep& m, double tol = 1e-9) {
    return is_hermitian(m.choi, tol);
}

inline bool is_cp(const MapRep& m, double tol = 1e-9) {
    if (!is_hermitian_preserving(m, tol)) return false;
    return psd_check(hermitize(m.choi), tol);
}

inline bool is_tp(const MapRep& m, double tol = 1e-9) {
    CMatrix tb = partial_trace(m.choi, m.dim_in, m.dim_out, Subsystem::A);
    CMatrix defect = tb - CMatrix::identity(m.dim_in);
    return is_cp(m, tol) && frobenius_norm(defect) <= tol * std::max(1.0, frobenius_norm(tb));
}

inline bool is_tni(const MapRep& m, double tol = 1e-9) {
    if (!is_cp(m, tol)) return false;
    CMatrix tb = partial_trace(m.choi, m.dim_in, m.dim_out, Subsystem::A);
    CMatrix slack = CMatrix::identity(m.dim_in) - tb;
    return psd_check(hermitize(slack), tol);
}

// --- the paper's channel zoo ----------------------------------------------

inline KrausSet amplitude_damping(double eps) {
    if (eps < 0.0 || eps > 1.0) throw ParamOutOfRange("amplitude_damping: eps outside [0, 1]");
    KrausSet k;
    k.dim_in = k.dim_out = 2;
    CMatrix k0(2, 2);
    k0.at(0, 0) = 1.0;
    k0.at(1, 1) = std::sqrt(1.0 - eps);
    k.kraus.push_back(std::move(k0));
    if (eps > 0.0) {
        CMatrix k1(2, 2);
        k1.at(0, 1) = std::sqrt(eps);
        k.kraus.push_back(std::move(k1));
    }
    return k;
}

inline KrausSet dephasing(double eps) {
    if (eps < 0.0 || eps > 1.0) throw ParamOutOfRange("dephasing: eps outside [0, 1]");
    KrausSet k;
    k.dim_in = k.dim_out = 2;
    k.kraus.push_back(std::sqrt(1.0 - eps / 2.0) * CMatrix::identity(2));
    if (eps > 0.0) k.kraus.push_back(std::sqrt(eps / 2.0) * pauli_z());
    return k;
}

/// (1 - eps) rho + eps tr[rho] I/2, built directly in Choi form.
inline MapRep depolarizing(double eps) {
    if (eps < 0.0 || eps > 1.0) throw ParamOutOfRange("depolarizing: eps outside [0, 1]");
    CMatrix j = (1.0 - eps) * gamma_projector(2) +
                (eps / 2.0) * tensor(CMatrix::identity(2), CMatrix::identity(2));
    return MapRep(2, 2, std::move(j));
}

// --- entry extraction ------------------------------------------------------

inline void validate(const ExtractionSpec& spec) {
    if (spec.d < 1) throw InvalidSpec("ExtractionSpec: d must be positive");
    int prev = -1;
    for (int i : spec.indices) {
        if (i <= prev || i >= spec.d)
            throw InvalidSpec("ExtractionSpec: indices must be strictly increasing in [0, d)");
        prev = i;
    }
    const int dp = static_cast<int>(spec.indices.size());
    if (dp == 0) throw InvalidSpec("ExtractionSpec: empty index set");
    if (spec.pairs.empty()) throw InvalidSpec("ExtractionSpec: empty pair set");
    for (auto [j, k] : spec.pairs)
        if (j < 0 || k < j || k >= dp)
            throw InvalidSpec("ExtractionSpec: pair out of range or not upper-triangular");
}

/// Map H -> sum_{(j,k) in A u A*} H_{i_j i_k} |j><k| on the d' = |indices|
/// dimensional output space.  Hermitian-preserving by the symmetry of the
/// closed pair set.
inline MapRep entry_extraction(const ExtractionSpec& spec) {
    validate(spec);
    const int d = spec.d;
    const int dp = static_cast<int>(spec.indices.size());
    CMatrix j(d * dp, d * dp);
    auto put = [&](int pj, int pk) {
        int ij = spec.indices[pj], ik = spec.indices[pk];
        j.at(ij * dp + pj, ik * dp + pk) = 1.0;
    };
    for (auto [pj, pk] : spec.pairs) {
        put(pj, pk);
        if (pj != pk) put(pk, pj);
    }
    return MapRep(d, dp, std::move(j));
}

/// The spec that extracts every entry (identity up to output dimension).
inline ExtractionSpec all_entries_spec(int d) {
    ExtractionSpec s;
    s.d = d;
    for (int i = 0; i < d; ++i) s.indices.push_back(i);
    for (int j = 0; j < d; ++j)
        for (int k = j; k < d; ++k) s.pairs.emplace_back(j, k);
    return s;
}

/// Random spec: d' uniform in [1, d], positions sampled without
/// replacement, each upper-triangle pair kept with probability 1/2;
/// redrawn until the pair set is non-empty.
inline ExtractionSpec random_extraction_spec(int d, RandomStream& rng) {
    ExtractionSpec s;
    for (;;) {
        s.d = d;
        s.indices.clear();
        s.pairs.clear();
        int dp = 1 + static_cast<int>(rng.uniform() * d);
        if (dp > d) dp = d;
        std::vector<int> pool(d);
        for (int i = 0; i < d; ++i) pool[i] = i;
        for (int i = 0; i < dp; ++i) {
            int pick = i + static_cast<int>(rng.uniform() * (d - i));
            if (pick >= d) pick = d - 1;
            std::swap(pool[i], pool[pick]);
        }
        s.indices.assign(pool.begin(), pool.begin() + dp);
        std::sort(s.indices.begin(), s.indices.end());
        for (int j = 0; j < dp; ++j)
            for (int k = j; k < dp; ++k)
                if (rng.uniform() < 0.5) s.pairs.emplace_back(j, k);
        if (!s.pairs.empty()) return s;
    }
}

}  // namespace hpsim
