#pragma once

#include <cstdint>
#include <vector>

#include "hpsim/maps.hpp"
#include "hpsim/sdp.hpp"

namespace hpsim {

namespace detail {

struct ComplexEntry {
    int i, j;
    cplx v;
};

/// Entries of the a-th element of the standard Hermitian basis of n x n
/// matrices: diagonal units first, then the symmetric and antisymmetric
/// combinations for each upper-triangle position.
inline std::vector<ComplexEntry> hermitian_basis_element(int n, int a) {
    if (a < n) return {{a, a, cplx(1.0, 0.0)}};
    int idx = a - n;
    // enumerate (i, j), i < j in row-major order; two elements per pair
    int pair = idx / 2;
    int kind = idx % 2;
    int i = 0;
    int count = 0;
    for (i = 0; i < n; ++i) {
        int row_pairs = n - 1 - i;
        if (pair < count + row_pairs) break;
        count += row_pairs;
    }
    int j = i + 1 + (pair - count);
    if (kind == 0) return {{i, j, cplx(1.0, 0.0)}, {j, i, cplx(1.0, 0.0)}};
    return {{i, j, cplx(0.0, 1.0)}, {j, i, cplx(0.0, -1.0)}};
}

/// Append the real embedding of a complex entry of a Hermitian coefficient
/// matrix (block size 2n) to a constraint, scaled by `mult`.
inline void add_embedded_entry(SdpConstraint& c, int block, int n, int i, int j, cplx v,
                               double mult) {
    double re = v.real() * mult;
    double im = v.imag() * mult;
    if (re != 0.0) {
        c.terms.push_back({block, i, j, re});
        c.terms.push_back({block, n + i, n + j, re});
    }
    if (im != 0.0) {
        c.terms.push_back({block, n + i, j, im});
        c.terms.push_back({block, i, n + j, -im});
    }
}

/// <A, M> for Hermitian A given by entries and Hermitian M: sum v * M[j, i].
inline double herm_inner(const std::vector<ComplexEntry>& entries, const CMatrix& m) {
    cplx s = 0.0;
    for (const auto& e : entries) s += e.v * m.at(e.j, e.i);
    return s.real();
}

/// Shared piece of both cost programs: the Jordan-coupling constraints
/// M+ - M- = J over a Hermitian basis of the Choi space.
inline void add_coupling_constraints(SdpProblem& prob, const CMatrix& j_herm, int block_plus,
                                     int block_minus) {
    const int n = j_herm.rows;
    for (int a = 0; a < n * n; ++a) {
        auto entries = hermitian_basis_element(n, a);
        SdpConstraint c;
        c.free_coeff.assign(prob.free_count(), 0.0);
        for (const auto& e : entries) {
            add_embedded_entry(c, block_plus, n, e.i, e.j, e.v, 1.0);
            add_embedded_entry(c, block_minus, n, e.i, e.j, e.v, -1.0);
        }
        c.rhs = 2.0 * herm_inner(entries, j_herm);
        prob.constraints.push_back(std::move(c));
    }
}

/// Constraints <(F_a (x) I_B), block> summed over listed blocks plus
/// slack/free contributions; used for the partial-trace conditions.
inline SdpConstraint partial_trace_constraint(int dim_a, int dim_b, int a,
                                              const std::vector<std::pair<int, double>>& blocks,
                                              int free_count) {
    SdpConstraint c;
    c.free_coeff.assign(free_count, 0.0);
    const int n = dim_a * dim_b;
    auto entries = hermitian_basis_element(dim_a, a);
    for (const auto& e : entries)
        for (int b = 0; b < dim_b; ++b)
            for (auto [blk, mult] : blocks)
                add_embedded_entry(c, blk, n, e.i * dim_b + b, e.j * dim_b + b, e.v, mult);
    return c;
}

inline double basis_trace(int n, int a) { return a < n ? 1.0 : 0.0; }

}  // namespace detail

struct GammaTcResult {
    double gamma = 0.0;
    CMatrix m_plus, m_minus;
    SdpSolution solver;
};

struct GammaQpdResult {
    double gamma = 0.0;
    double weight_plus = 0.0;   // scale a of the positive CPTN part
    double weight_minus = 0.0;  // scale b of the negative part
    CMatrix m_plus, m_minus;
    SdpSolution solver;
};

/// Simulation cost with a single quantum instrument:
///   min alpha  s.t.  J = M+ - M-,  M+- >= 0,  tr_B[M+ + M-] = alpha I.
/// Equals the diamond norm of the map.
inline GammaTcResult gamma_tc(const MapRep& e, const NumericSettings& settings = {},
                              std::ostream* iterate_log = nullptr) {
    if (!is_hermitian_preserving(e, settings.tol))
        throw NotHermitianPreserving("gamma_tc: Choi operator is not Hermitian");
    const int da = e.dim_in, db = e.dim_out, n = da * db;
    CMatrix j = hermitize(e.choi);

    SdpProblem prob;
    int bp = prob.add_block(2 * n);
    int bm = prob.add_block(2 * n);
    int alpha = prob.add_free(1.0);
    (void)alpha;
    detail::add_coupling_constraints(prob, j, bp, bm);
    for (int a = 0; a < da * da; ++a) {
        SdpConstraint c = detail::partial_trace_constraint(da, db, a, {{bp, 1.0}, {bm, 1.0}}, 1);
        c.free_coeff[0] = -2.0 * detail::basis_trace(da, a);
        c.rhs = 0.0;
        prob.constraints.push_back(std::move(c));
    }

    SdpSolution sol = solve(prob, settings, iterate_log);
    if (sol.status == SdpStatus::Infeasible)
        throw SolverFailure("gamma_tc: SDP reported infeasible (map data inconsistent)");
    if (sol.status != SdpStatus::Optimal)
        throw SolverFailure("gamma_tc: SDP did not converge");
    GammaTcResult out;
    out.gamma = sol.free_values[0];
    out.m_plus = from_embedding(sol.blocks[bp]);
    out.m_minus = from_embedding(sol.blocks[bm]);
    out.solver = std::move(sol);
    return out;
}

/// Minimal quasi-probability overhead over CPTN decompositions:
///   min a + b  s.t.  J = M+ - M-,  M+- >= 0,
///                    tr_B[M+] <= a I,  tr_B[M-] <= b I.
inline GammaQpdResult gamma_qpd(const MapRep& e, const NumericSettings& settings = {},
                                std::ostream* iterate_log = nullptr) {
    if (!is_hermitian_preserving(e, settings.tol))
        throw NotHermitianPreserving("gamma_qpd: Choi operator is not Hermitian");
    const int da = e.dim_in, db = e.dim_out, n = da * db;
    CMatrix j = hermitize(e.choi);

    SdpProblem prob;
    int bp = prob.add_block(2 * n);
    int bm = prob.add_block(2 * n);
    int slack_p = prob.add_block(2 * da);
    int slack_m = prob.add_block(2 * da);
    prob.add_free(1.0);  // a
    prob.add_free(1.0);  // b
    detail::add_coupling_constraints(prob, j, bp, bm);
    for (int a = 0; a < da * da; ++a) {
        // tr_B[M+] + S_a = a I  (and the mirror for M-)
        SdpConstraint c = detail::partial_trace_constraint(da, db, a, {{bp, 1.0}}, 2);
        auto entries = detail::hermitian_basis_element(da, a);
        for (const auto& en : entries)
            detail::add_embedded_entry(c, slack_p, da, en.i, en.j, en.v, 1.0);
        c.free_coeff[0] = -2.0 * detail::basis_trace(da, a);
        prob.constraints.push_back(std::move(c));

        SdpConstraint d = detail::partial_trace_constraint(da, db, a, {{bm, 1.0}}, 2);
        for (const auto& en : entries)
            detail::add_embedded_entry(d, slack_m, da, en.i, en.j, en.v, 1.0);
        d.free_coeff[1] = -2.0 * detail::basis_trace(da, a);
        prob.constraints.push_back(std::move(d));
    }

    SdpSolution sol = solve(prob, settings, iterate_log);
    if (sol.status != SdpStatus::Optimal)
        throw SolverFailure("gamma_qpd: SDP did not converge");
    GammaQpdResult out;
    out.weight_plus = sol.free_values[0];
    out.weight_minus = sol.free_values[1];
    out.gamma = out.weight_plus + out.weight_minus;
    out.m_plus = from_embedding(sol.blocks[bp]);
    out.m_minus = from_embedding(sol.blocks[bm]);
    out.solver = std::move(sol);
    return out;
}

/// Variational lower bound on the diamond norm: seeded multistart over
/// pure inputs on the doubled system, refined by alternating ascent
/// between the optimal measurement (sign operator) and the optimal state
/// (top eigenvector of the pulled-back sign operator).
inline double diamond_variational(const MapRep& e, int restarts, std::uint64_t rng_seed,
                                  const NumericSettings& settings = {}) {
    if (!is_hermitian_preserving(e, settings.tol))
        throw NotHermitianPreserving("diamond_variational: Choi operator is not Hermitian");
    const int da = e.dim_in;
    MapRep ext = extend_with_identity(e, da);
    const int din = ext.dim_in;
    double best = 0.0;
    for (int r = 0; r < restarts; ++r) {
        RandomStream rng(rng_seed, static_cast<std::uint64_t>(r));
        CMatrix psi = random_pure_state(din, rng);
        double val = 0.0;
        for (int it = 0; it < 80; ++it) {
            CMatrix w = hermitize(apply(ext, psi));
            auto eig = eig_hermitian(w, settings.tol);
            double v = 0.0;
            const int dn = w.rows;
            CMatrix sign_op(dn, dn);
            for (int k = 0; k < dn; ++k) {
                double l = eig.eigenvalues[k];
                v += std::abs(l);
                double s = l >= 0.0 ? 1.0 : -1.0;
                for (int i = 0; i < dn; ++i)
                    for (int jj = 0; jj < dn; ++jj)
                        sign_op.at(i, jj) += s * eig.eigenvectors.at(i, k) *
                                             std::conj(eig.eigenvectors.at(jj, k));
            }
            if (v <= val + 1e-13 * ( 1.0 + v)) {
                val = std::max(val, v);
                break;
            }
            val = v;
            CMatrix g = hermitize(apply_adjoint(ext, sign_op));
            auto ge = eig_hermitian(g, settings.tol);
            CMatrix next(din, din);
            for (int i = 0; i < din; ++i)
                for (int jj = 0; jj < din; ++jj)
                    next.at(i, jj) =
                        ge.eigenvectors.at(i, 0) * std::conj(ge.eigenvectors.at(jj, 0));
            psi = std::move(next);
        }
        best = std::max(best, val);
    }
    return best;
}

/// Absolute robustness, via the identity R = (gamma_tc - 1)/2.
inline double robustness(const MapRep& e, const NumericSettings& settings = {}) {
    return (gamma_tc(e, settings).gamma - 1.0) / 2.0;
}

struct CostReport {
    double gamma_tc = 0.0;
    double gamma_qpd = 0.0;
    double diamond_independent = 0.0;
    double robustness = 0.0;
    GammaTcResult tc;
    GammaQpdResult qpd;
};

inline CostReport cost_report(const MapRep& e, const NumericSettings& settings = {},
                              int restarts = 100, std::uint64_t seed = 7) {
    CostReport r;
    r.tc = gamma_tc(e, settings);
    r.qpd = gamma_qpd(e, settings);
    r.gamma_tc = r.tc.gamma;
    r.gamma_qpd = r.qpd.gamma;
    r.diamond_independent = diamond_variational(e, restarts, seed, settings);
    r.robustness = (r.gamma_tc - 1.0) / 2.0;
    return r;
}

/// Random Hermitian-preserving test map: GUE Choi normalized to unit
/// Frobenius norm.
inline MapRep random_hp_map(int dim_in, int dim_out, RandomStream& rng) {
    CMatrix h = random_hermitian(dim_in * dim_out, rng);
    double nrm = frobenius_norm(h);
    return MapRep(dim_in, dim_out, (1.0 / nrm) * h);
}

}  // namespace hpsim
