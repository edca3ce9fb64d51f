#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "hpsim/cost.hpp"
#include "hpsim/maps.hpp"

namespace hpsim {

enum class CostModel { TC, QPD };

/// Find the cheapest Hermitian-preserving map D that undoes a noise
/// channel N in the sense required for expectation-value recovery:
/// tr[D(N(rho)) O] = tr[rho O] for every input state.  With
/// `full_inverse` the condition is strengthened to D(N(rho)) = rho.
struct RecoveryProblem {
    MapRep noise;
    CMatrix observable;
    CostModel cost_model = CostModel::TC;
    bool full_inverse = false;
};

struct RecoverySolution {
    MapRep d_map;       // recovery map, noise.dim_out -> noise.dim_in
    double cost = 0.0;  // gamma of the chosen cost model
    double residual = 0.0;  // worst recovery-constraint violation
    CMatrix m_plus, m_minus;            // Jordan certificate of d_map
    double weight_plus = 0.0, weight_minus = 0.0;  // QPD model only
    SdpSolution solver;
};

namespace detail {

/// Recovery constraints expressed on the Choi operator of D.  For a
/// Hermitian basis element B_a of the noise input space and sigma_a =
/// N(B_a), the condition tr[D(sigma_a) O] = tr[B_a O] is
/// <conj(sigma_a) (x) O, J_D> = tr[B_a O]; for the full inverse the
/// right factor runs over a Hermitian basis F_c instead of O.
inline void add_dense_coupling(SdpConstraint& c, const CMatrix& h, int block_plus,
                               int block_minus) {
    const int n = h.rows;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            cplx v = h.at(i, j);
            if (v == cplx(0.0, 0.0)) continue;
            add_embedded_entry(c, block_plus, n, i, j, v, 1.0);
            add_embedded_entry(c, block_minus, n, i, j, v, -1.0);
        }
}

inline void add_recovery_constraints(SdpProblem& prob, const RecoveryProblem& problem,
                                     int bp, int bm) {
    const int din = problem.noise.dim_in;
    const int dmid = problem.noise.dim_out;
    for (int a = 0; a < din * din; ++a) {
        auto entries = hermitian_basis_element(din, a);
        CMatrix basis(din, din);
        for (const auto& e : entries) basis.at(e.i, e.j) = e.v;
        CMatrix sigma = hermitize(apply(problem.noise, basis));
        if (problem.full_inverse) {
            for (int c_idx = 0; c_idx < din * din; ++c_idx) {
                auto out_entries = hermitian_basis_element(din, c_idx);
                CMatrix f(din, din);
                for (const auto& e : out_entries) f.at(e.i, e.j) = e.v;
                SdpConstraint c;
                c.free_coeff.assign(prob.free_count(), 0.0);
                add_dense_coupling(c, tensor(conj_of(sigma), f), bp, bm);
                c.rhs = 2.0 * herm_inner(out_entries, basis);
                prob.constraints.push_back(std::move(c));
            }
        } else {
            SdpConstraint c;
            c.free_coeff.assign(prob.free_count(), 0.0);
            add_dense_coupling(c, tensor(conj_of(sigma), problem.observable), bp, bm);
            c.rhs = 2.0 * hs_inner(problem.observable, basis).real();
            prob.constraints.push_back(std::move(c));
        }
        (void)dmid;
    }
}

}  // namespace detail

/// Worst violation of the recovery conditions by a candidate map.
inline double recovery_residual(const RecoveryProblem& problem, const MapRep& d_map) {
    const int din = problem.noise.dim_in;
    double worst = 0.0;
    for (int a = 0; a < din * din; ++a) {
        auto entries = detail::hermitian_basis_element(din, a);
        CMatrix basis(din, din);
        for (const auto& e : entries) basis.at(e.i, e.j) = e.v;
        CMatrix roundtrip = apply(d_map, hermitize(apply(problem.noise, basis)));
        if (problem.full_inverse) {
            worst = std::max(worst, max_abs_entry(roundtrip - basis));
        } else {
            double got = hs_inner(problem.observable, roundtrip).real();
            double want = hs_inner(problem.observable, basis).real();
            worst = std::max(worst, std::abs(got - want));
        }
    }
    return worst;
}

inline RecoverySolution optimal_recovery(const RecoveryProblem& problem,
                                         const NumericSettings& settings = {},
                                         std::ostream* iterate_log = nullptr) {
    if (!is_hermitian(problem.observable, settings.tol))
        throw NotHermitian("optimal_recovery: observable must be Hermitian");
    if (problem.observable.rows != problem.noise.dim_in)
        throw DimensionMismatch("optimal_recovery: observable lives on the noise input space");
    if (!is_hermitian_preserving(problem.noise, settings.tol))
        throw NotHermitianPreserving("optimal_recovery: noise map is not Hermitian-preserving");

    const int da = problem.noise.dim_out;  // input space of D
    const int db = problem.noise.dim_in;   // output space of D
    const int n = da * db;

    SdpProblem prob;
    int bp = prob.add_block(2 * n);
    int bm = prob.add_block(2 * n);
    int slack_p = -1, slack_m = -1;
    if (problem.cost_model == CostModel::TC) {
        prob.add_free(1.0);  // alpha
    } else {
        slack_p = prob.add_block(2 * da);
        slack_m = prob.add_block(2 * da);
        prob.add_free(1.0);  // a
        prob.add_free(1.0);  // b
    }
    detail::add_recovery_constraints(prob, problem, bp, bm);
    for (int a = 0; a < da * da; ++a) {
        if (problem.cost_model == CostModel::TC) {
            SdpConstraint c =
                detail::partial_trace_constraint(da, db, a, {{bp, 1.0}, {bm, 1.0}}, 1);
            c.free_coeff[0] = -2.0 * detail::basis_trace(da, a);
            prob.constraints.push_back(std::move(c));
        } else {
            auto entries = detail::hermitian_basis_element(da, a);
            SdpConstraint c = detail::partial_trace_constraint(da, db, a, {{bp, 1.0}}, 2);
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
    }

    SdpSolution sol;
    try {
        sol = solve(prob, settings, iterate_log);
    } catch (const IllPosed&) {
        // inconsistent linear recovery constraints: no map exists at all
        throw InfeasibleRecovery(
            "optimal_recovery: recovery conditions are linearly inconsistent");
    }
    if (sol.status == SdpStatus::Infeasible)
        throw InfeasibleRecovery("optimal_recovery: no Hermitian-preserving map satisfies the recovery conditions");
    if (sol.status != SdpStatus::Optimal)
        throw SolverFailure("optimal_recovery: SDP did not converge");

    RecoverySolution out;
    out.m_plus = from_embedding(sol.blocks[bp]);
    out.m_minus = from_embedding(sol.blocks[bm]);
    out.d_map = MapRep{da, db, hermitize(out.m_plus - out.m_minus)};
    if (problem.cost_model == CostModel::TC) {
        out.cost = sol.free_values[0];
    } else {
        out.weight_plus = sol.free_values[0];
        out.weight_minus = sol.free_values[1];
        out.cost = out.weight_plus + out.weight_minus;
    }
    out.residual = recovery_residual(problem, out.d_map);
    out.solver = std::move(sol);
    return out;
}

inline CMatrix default_observable() {
    return pauli_x() + pauli_y() + pauli_z() + CMatrix::identity(2);
}

inline MapRep noise_family(const std::string& name, double eps) {
    if (name == "amplitude-damping" || name == "ad")
        return choi_from_kraus(amplitude_damping(eps));
    if (name == "dephasing" || name == "deph") return choi_from_kraus(dephasing(eps));
    if (name == "depolarizing" || name == "depo") return depolarizing(eps);
    throw InvalidSpec("unknown noise family: " + name);
}

struct SweepPoint {
    std::string family;
    double eps = 0.0;
    double cost_tc = 0.0;
    double cost_qpd = 0.0;
    bool feasible = true;
};

/// Recovery cost as a function of noise strength for the standard
/// single-qubit noise families; infeasible points are flagged rather
/// than thrown so a full sweep always completes.
inline std::vector<SweepPoint> sweep_recovery(const std::vector<std::string>& families,
                                              const std::vector<double>& eps_values,
                                              const CMatrix& obs, bool full_inverse = false,
                                              const NumericSettings& settings = {}) {
    std::vector<SweepPoint> rows;
    for (const auto& fam : families) {
        for (double eps : eps_values) {
            SweepPoint row;
            row.family = fam;
            row.eps = eps;
            RecoveryProblem problem{noise_family(fam, eps), obs, CostModel::TC, full_inverse};
            try {
                row.cost_tc = optimal_recovery(problem, settings).cost;
                problem.cost_model = CostModel::QPD;
                row.cost_qpd = optimal_recovery(problem, settings).cost;
            } catch (const InfeasibleRecovery&) {
                row.feasible = false;
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

}  // namespace hpsim
