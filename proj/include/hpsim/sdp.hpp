#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "hpsim/real_matrix.hpp"
#include "hpsim/settings.hpp"

namespace hpsim {

/// One scalar entry of a constraint coefficient matrix.  Off-diagonal
/// entries must appear with their mirror so that the matrix is symmetric.
struct SdpTerm {
    int block;
    int i, j;
    double value;
};

struct SdpConstraint {
    std::vector<SdpTerm> terms;
    std::vector<double> free_coeff;  // length = free variable count, may be empty
    double rhs = 0.0;
};

/// Standard-form SDP:
///   minimize    sum_b <C_b, X_b> + c.f
///   subject to  sum_b <A_kb, X_b> + g_k.f = h_k,   X_b >= 0,  f free.
struct SdpProblem {
    std::vector<int> block_dims;
    std::vector<RealMatrix> objective;  // empty matrix means zero
    std::vector<double> free_objective;
    std::vector<SdpConstraint> constraints;

    int free_count() const { return static_cast<int>(free_objective.size()); }

    int add_block(int dim) {
        block_dims.push_back(dim);
        objective.emplace_back();
        return static_cast<int>(block_dims.size()) - 1;
    }

    int add_free(double obj_coeff) {
        free_objective.push_back(obj_coeff);
        return static_cast<int>(free_objective.size()) - 1;
    }
};

/// Push value at (i, j) and its mirror; the usual way to build symmetric
/// coefficient matrices entry by entry.
inline void add_sym_entry(SdpConstraint& c, int block, int i, int j, double v) {
    if (v == 0.0) return;
    c.terms.push_back({block, i, j, v});
    if (i != j) c.terms.push_back({block, j, i, v});
}

enum class SdpStatus { Optimal, Infeasible, MaxIterations };

struct SdpSolution {
    SdpStatus status = SdpStatus::MaxIterations;
    std::vector<RealMatrix> blocks;   // primal X
    std::vector<double> free_values;  // primal f
    std::vector<double> dual;         // y
    double primal_objective = 0.0;
    double dual_objective = 0.0;
    double gap = 0.0;               // relative duality gap
    double primal_residual = 0.0;   // scaled equality residual
    double dual_residual = 0.0;
    int iterations = 0;
};

namespace detail {

inline double constraint_dot(const SdpConstraint& c, const std::vector<RealMatrix>& x) {
    double s = 0.0;
    for (const auto& t : c.terms) s += t.value * x[t.block].at(t.i, t.j);
    return s;
}

/// U = W A W for a sparse symmetric A given dense symmetric W.
inline void scale_sparse(const RealMatrix& w, const std::vector<SdpTerm>& terms, int block,
                         RealMatrix& u) {
    const int n = w.rows;
    u.rows = u.cols = n;
    u.data.assign(static_cast<size_t>(n) * n, 0.0);
    for (const auto& t : terms) {
        if (t.block != block) continue;
        const double* wi = &w.data[static_cast<size_t>(t.i) * n];  // row i == col i
        const double* wj = &w.data[static_cast<size_t>(t.j) * n];
        for (int r = 0; r < n; ++r) {
            double f = t.value * wi[r];
            if (f == 0.0) continue;
            double* urow = &u.data[static_cast<size_t>(r) * n];
            for (int c = 0; c < n; ++c) urow[c] += f * wj[c];
        }
    }
}

/// Largest step in (0, 1] keeping X + alpha D positive semidefinite:
/// with X = L L^T it equals -1 / lambda_min(L^{-1} D L^{-T}) when that
/// eigenvalue is negative.  Exact (up to the eigensolve), so steps do not
/// collapse when X approaches the boundary at optimality.
inline double max_psd_step(const RealMatrix& x, const RealMatrix& d) {
    const int n = x.rows;
    RealMatrix l = x;
    if (!cholesky_in_place(l)) {
        double diag_max = 0.0;
        for (int i = 0; i < n; ++i) diag_max = std::max(diag_max, std::abs(x.at(i, i)));
        l = x;
        if (!cholesky_in_place(l, 1e-12 * (1.0 + diag_max))) return 0.0;
    }
    // Y = L^{-1} D by forward substitution on columns of D
    RealMatrix y(n, n);
    for (int c = 0; c < n; ++c)
        for (int i = 0; i < n; ++i) {
            double acc = d.at(i, c);
            for (int k = 0; k < i; ++k) acc -= l.at(i, k) * y.at(k, c);
            y.at(i, c) = acc / l.at(i, i);
        }
    // G = Y L^{-T}: forward substitution on rows
    RealMatrix g(n, n);
    for (int r = 0; r < n; ++r)
        for (int j = 0; j < n; ++j) {
            double acc = y.at(r, j);
            for (int k = 0; k < j; ++k) acc -= g.at(r, k) * l.at(j, k);
            g.at(r, j) = acc / l.at(j, j);
        }
    symmetrize(g);
    std::vector<double> w;
    RealMatrix v;
    jacobi_symmetric(g, w, v);
    double lam_min = w.back();
    if (lam_min >= -1e-14) return 1.0;
    return std::min(1.0, -1.0 / lam_min);
}

/// Symmetric square root and inverse from a Jacobi eigendecomposition.
struct SymPowers {
    RealMatrix sqrt, inv_sqrt, inv;
};

inline SymPowers sym_powers(const RealMatrix& a) {
    std::vector<double> w;
    RealMatrix v;
    jacobi_symmetric(a, w, v);
    const int n = a.rows;
    SymPowers p{RealMatrix(n, n), RealMatrix(n, n), RealMatrix(n, n)};
    double top = w.empty() ? 0.0 : std::abs(w.front());
    for (int k = 0; k < n; ++k) {
        double lam = std::max(w[k], 1e-300 + top * 1e-18);
        double sq = std::sqrt(lam);
        for (int i = 0; i < n; ++i) {
            double vik = v.at(i, k);
            for (int j = 0; j < n; ++j) {
                double prod = vik * v.at(j, k);
                p.sqrt.at(i, j) += sq * prod;
                p.inv_sqrt.at(i, j) += prod / sq;
                p.inv.at(i, j) += prod / lam;
            }
        }
    }
    return p;
}

}  // namespace detail

/// Primal-dual path-following interior-point solver with NT scaling and a
/// Mehrotra-style predictor-corrector.  Dense Cholesky on the Schur
/// complement; free scalars are carried through the augmented system.
inline SdpSolution solve(const SdpProblem& prob, const NumericSettings& settings = {},
                         std::ostream* iterate_log = nullptr) {
    const int nb = static_cast<int>(prob.block_dims.size());
    const int p = prob.free_count();

    // presolve: drop zero and duplicate rows
    std::vector<int> keep;
    {
        std::map<std::string, int> seen;
        for (int k = 0; k < static_cast<int>(prob.constraints.size()); ++k) {
            const auto& c = prob.constraints[k];
            double scale = 0.0;
            for (const auto& t : c.terms) scale = std::max(scale, std::abs(t.value));
            for (double g : c.free_coeff) scale = std::max(scale, std::abs(g));
            if (scale == 0.0) {
                if (std::abs(c.rhs) > 0.0)
                    throw IllPosed("sdp solve: zero constraint row with nonzero rhs");
                continue;
            }
            std::string key;
            key.reserve(c.terms.size() * 20);
            for (const auto& t : c.terms) {
                key.append(reinterpret_cast<const char*>(&t.block), sizeof t.block);
                key.append(reinterpret_cast<const char*>(&t.i), sizeof t.i);
                key.append(reinterpret_cast<const char*>(&t.j), sizeof t.j);
                key.append(reinterpret_cast<const char*>(&t.value), sizeof t.value);
            }
            for (double g : c.free_coeff)
                key.append(reinterpret_cast<const char*>(&g), sizeof g);
            auto [it, inserted] = seen.emplace(std::move(key), k);
            if (!inserted) {
                if (std::abs(prob.constraints[it->second].rhs - c.rhs) > 1e-12)
                    throw IllPosed("sdp solve: duplicate constraint rows with conflicting rhs");
                continue;
            }
            keep.push_back(k);
        }
    }
    const int m = static_cast<int>(keep.size());
    if (m == 0) throw IllPosed("sdp solve: no constraints after presolve");

    std::vector<const SdpConstraint*> con(m);
    for (int k = 0; k < m; ++k) con[k] = &prob.constraints[keep[k]];

    double data_scale = 0.0;
    for (int k = 0; k < m; ++k) {
        for (const auto& t : con[k]->terms) data_scale = std::max(data_scale, std::abs(t.value));
        data_scale = std::max(data_scale, std::abs(con[k]->rhs));
    }
    for (int b = 0; b < nb; ++b)
        if (prob.objective[b].rows > 0)
            for (double v : prob.objective[b].data) data_scale = std::max(data_scale, std::abs(v));
    for (double v : prob.free_objective) data_scale = std::max(data_scale, std::abs(v));

    int total_dim = 0;
    for (int d : prob.block_dims) total_dim += d;

    // initial interior point
    double eta = 1.0 + data_scale;
    std::vector<RealMatrix> x(nb), s(nb);
    for (int b = 0; b < nb; ++b) {
        x[b] = eta * RealMatrix::identity(prob.block_dims[b]);
        s[b] = x[b];
    }
    std::vector<double> y(m, 0.0), f(p, 0.0);

    SdpSolution sol;
    std::vector<RealMatrix> w(nb), sinv(nb), rd(nb);
    std::vector<RealMatrix> dx_aff(nb), ds_aff(nb), dx(nb), ds(nb), z(nb);
    RealMatrix schur(m, m), u, tmp1, tmp2;
    std::vector<double> rp(m), rf(p);
    RealMatrix polish_gram;  // Cholesky factor of J J^T, built on first stall
    int polish_attempts = 0;

    auto block_obj = [&](int b) -> const RealMatrix* {
        return prob.objective[b].rows > 0 ? &prob.objective[b] : nullptr;
    };

    for (int iter = 0; iter < settings.max_iterations; ++iter) {
        // residuals and merit quantities
        double primal_obj = 0.0;
        for (int b = 0; b < nb; ++b)
            if (auto* c = block_obj(b))
                for (size_t i = 0; i < c->data.size(); ++i) primal_obj += c->data[i] * x[b].data[i];
        for (int q = 0; q < p; ++q) primal_obj += prob.free_objective[q] * f[q];
        double dual_obj = 0.0;
        for (int k = 0; k < m; ++k) dual_obj += con[k]->rhs * y[k];

        double res_p = 0.0;
        for (int k = 0; k < m; ++k) {
            double v = con[k]->rhs - detail::constraint_dot(*con[k], x);
            for (int q = 0; q < p; ++q)
                if (!con[k]->free_coeff.empty()) v -= con[k]->free_coeff[q] * f[q];
            rp[k] = v;
            res_p = std::max(res_p, std::abs(v));
        }
        double res_d = 0.0;
        for (int b = 0; b < nb; ++b) {
            int n = prob.block_dims[b];
            rd[b] = RealMatrix(n, n);
            if (auto* c = block_obj(b)) rd[b] = *c;
            for (size_t i = 0; i < rd[b].data.size(); ++i) rd[b].data[i] -= s[b].data[i];
        }
        for (int k = 0; k < m; ++k)
            for (const auto& t : con[k]->terms) rd[t.block].at(t.i, t.j) -= y[k] * t.value;
        for (int b = 0; b < nb; ++b)
            for (double v : rd[b].data) res_d = std::max(res_d, std::abs(v));
        for (int q = 0; q < p; ++q) {
            double v = prob.free_objective[q];
            for (int k = 0; k < m; ++k)
                if (!con[k]->free_coeff.empty()) v -= con[k]->free_coeff[q] * y[k];
            rf[q] = v;
            res_d = std::max(res_d, std::abs(v));
        }

        double mu = 0.0;
        for (int b = 0; b < nb; ++b)
            for (size_t i = 0; i < x[b].data.size(); ++i) mu += x[b].data[i] * s[b].data[i];
        mu /= std::max(1, total_dim);

        double denom = 1.0 + data_scale;
        double gap = std::abs(primal_obj - dual_obj) /
                     (1.0 + std::abs(primal_obj) + std::abs(dual_obj));
        double rel_p = res_p / denom;
        double rel_d = res_d / denom;

        if (iterate_log) {
            *iterate_log << "{\"iter\":" << iter << ",\"mu\":" << mu << ",\"gap\":" << gap
                         << ",\"primal\":" << primal_obj << ",\"dual\":" << dual_obj
                         << ",\"res_p\":" << rel_p << ",\"res_d\":" << rel_d << "}\n";
        }

        sol.primal_objective = primal_obj;
        sol.dual_objective = dual_obj;
        sol.gap = gap;
        sol.primal_residual = rel_p;
        sol.dual_residual = rel_d;
        sol.iterations = iter;

        if (gap <= settings.gap_tol && rel_p <= settings.feas_tol && rel_d <= settings.feas_tol) {
            sol.status = SdpStatus::Optimal;
            break;
        }
        if (std::abs(dual_obj) > 1e12 || std::abs(primal_obj) > 1e12) {
            sol.status = SdpStatus::Infeasible;
            break;
        }

        // Primal polish: near the optimum the PSD cone can pin the step
        // length to zero while a small equality residual survives.  The
        // dual side is already converged, so project (X, f) back onto the
        // affine constraint set by a least-norm correction.
        if (gap <= settings.gap_tol && rel_d <= settings.feas_tol && rel_p > settings.feas_tol &&
            mu <= 1e-8 * (1.0 + data_scale) && polish_attempts < 3) {
            ++polish_attempts;
            if (polish_gram.rows == 0) {
                polish_gram = RealMatrix(m, m);
                for (int k = 0; k < m; ++k) {
                    for (int b = 0; b < nb; ++b) {
                        bool touches = false;
                        for (const auto& t : con[k]->terms)
                            if (t.block == b) {
                                touches = true;
                                break;
                            }
                        if (!touches) continue;
                        u = RealMatrix(prob.block_dims[b], prob.block_dims[b]);
                        for (const auto& t : con[k]->terms)
                            if (t.block == b) u.at(t.i, t.j) += t.value;
                        for (int l = k; l < m; ++l) {
                            double acc = 0.0;
                            for (const auto& t : con[l]->terms)
                                if (t.block == b) acc += t.value * u.at(t.i, t.j);
                            polish_gram.at(k, l) += acc;
                        }
                    }
                    for (int q = 0; q < p; ++q)
                        if (!con[k]->free_coeff.empty())
                            for (int l = k; l < m; ++l)
                                if (!con[l]->free_coeff.empty())
                                    polish_gram.at(k, l) +=
                                        con[k]->free_coeff[q] * con[l]->free_coeff[q];
                    for (int l = k; l < m; ++l) polish_gram.at(l, k) = polish_gram.at(k, l);
                }
                double dmax = 0.0;
                for (int k = 0; k < m; ++k)
                    dmax = std::max(dmax, std::abs(polish_gram.at(k, k)));
                if (!cholesky_in_place(polish_gram, 1e-13 * (1.0 + dmax)))
                    polish_gram = RealMatrix(0, 0);
            }
            if (polish_gram.rows > 0) {
                std::vector<double> lam = rp;
                cholesky_solve(polish_gram, lam);
                for (int k = 0; k < m; ++k) {
                    for (const auto& t : con[k]->terms) x[t.block].at(t.i, t.j) += lam[k] * t.value;
                    if (!con[k]->free_coeff.empty())
                        for (int q = 0; q < p; ++q) f[q] += lam[k] * con[k]->free_coeff[q];
                }
                for (int b = 0; b < nb; ++b) symmetrize(x[b]);
                continue;  // re-evaluate residuals with the corrected iterate
            }
        }

        // NT scaling per block: W = S^{-1/2} (S^{1/2} X S^{1/2})^{1/2} S^{-1/2}
        for (int b = 0; b < nb; ++b) {
            auto sp = detail::sym_powers(s[b]);
            sinv[b] = sp.inv;
            matmul_into(sp.sqrt, x[b], tmp1);
            matmul_into(tmp1, sp.sqrt, tmp2);
            symmetrize(tmp2);
            auto tp = detail::sym_powers(tmp2);
            matmul_into(sp.inv_sqrt, tp.sqrt, tmp1);
            matmul_into(tmp1, sp.inv_sqrt, w[b]);
            symmetrize(w[b]);
        }

        // Schur complement M_{kl} = sum_b tr(A_kb W A_lb W)
        for (int k = 0; k < m; ++k) {
            for (int l = k; l < m; ++l) schur.at(k, l) = 0.0;
            for (int b = 0; b < nb; ++b) {
                bool touches = false;
                for (const auto& t : con[k]->terms)
                    if (t.block == b) {
                        touches = true;
                        break;
                    }
                if (!touches) continue;
                detail::scale_sparse(w[b], con[k]->terms, b, u);
                for (int l = k; l < m; ++l) {
                    double acc = 0.0;
                    for (const auto& t : con[l]->terms)
                        if (t.block == b) acc += t.value * u.at(t.i, t.j);
                    schur.at(k, l) += acc;
                }
            }
            for (int l = k; l < m; ++l) schur.at(l, k) = schur.at(k, l);
        }

        RealMatrix chol = schur;
        double reg = 0.0;
        {
            double diag_max = 0.0;
            for (int k = 0; k < m; ++k) diag_max = std::max(diag_max, std::abs(schur.at(k, k)));
            reg = 1e-14 * (1.0 + diag_max);
        }
        bool factored = false;
        for (int attempt = 0; attempt < 4 && !factored; ++attempt) {
            chol = schur;
            factored = cholesky_in_place(chol, reg);
            reg *= 1e4;
        }
        if (!factored) {
            if (iter == 0) throw IllPosed("sdp solve: constraints rank-deficient after presolve");
            sol.status = SdpStatus::MaxIterations;
            break;
        }

        // Solve   [M  G][dy]   [q]        with M = L L^T, via elimination of df.
        //         [G^T 0][df] = [g]
        auto gcoeff = [&](int k, int q2) {
            return con[k]->free_coeff.empty() ? 0.0 : con[k]->free_coeff[q2];
        };
        auto solve_once = [&](const std::vector<double>& q, const std::vector<double>& g,
                              std::vector<double>& dy, std::vector<double>& df) {
            dy = q;
            cholesky_solve(chol, dy);  // M^{-1} q
            if (p == 0) {
                df.clear();
                return;
            }
            std::vector<std::vector<double>> minv_g(p, std::vector<double>(m, 0.0));
            for (int q2 = 0; q2 < p; ++q2) {
                for (int k = 0; k < m; ++k) minv_g[q2][k] = gcoeff(k, q2);
                cholesky_solve(chol, minv_g[q2]);
            }
            RealMatrix gtg(p, p);
            std::vector<double> rhs_f(p);
            for (int a = 0; a < p; ++a) {
                for (int b2 = 0; b2 < p; ++b2) {
                    double v = 0.0;
                    for (int k = 0; k < m; ++k) v += gcoeff(k, a) * minv_g[b2][k];
                    gtg.at(a, b2) = v;
                }
                double v = 0.0;
                for (int k = 0; k < m; ++k) v += gcoeff(k, a) * dy[k];
                rhs_f[a] = v - g[a];
            }
            if (!cholesky_in_place(gtg, 1e-14 * (1.0 + frobenius_norm(gtg))))
                throw IllPosed("sdp solve: free-variable columns dependent");
            df = rhs_f;
            cholesky_solve(gtg, df);
            for (int k = 0; k < m; ++k) {
                double corr = 0.0;
                for (int q2 = 0; q2 < p; ++q2) corr += minv_g[q2][k] * df[q2];
                dy[k] -= corr;
            }
        };
        // Near the central-path end the Schur matrix is ill-conditioned and
        // the regularized factorization alone loses the last digits, which
        // stalls the iteration; two rounds of refinement against the exact
        // (unregularized) matrix restore them.
        auto solve_augmented = [&](const std::vector<double>& q, std::vector<double>& dy,
                                   std::vector<double>& df) {
            solve_once(q, rf, dy, df);
            std::vector<double> res1(m), res2(p), cy, cf;
            for (int round = 0; round < 2; ++round) {
                for (int k = 0; k < m; ++k) {
                    double v = q[k];
                    for (int l = 0; l < m; ++l) v -= schur.at(k, l) * dy[l];
                    for (int q2 = 0; q2 < p; ++q2) v -= gcoeff(k, q2) * df[q2];
                    res1[k] = v;
                }
                for (int q2 = 0; q2 < p; ++q2) {
                    double v = rf[q2];
                    for (int k = 0; k < m; ++k) v -= gcoeff(k, q2) * dy[k];
                    res2[q2] = v;
                }
                solve_once(res1, res2, cy, cf);
                for (int k = 0; k < m; ++k) dy[k] += cy[k];
                for (int q2 = 0; q2 < p; ++q2) df[q2] += cf[q2];
            }
        };

        // direction for a given complementarity target Z
        auto compute_direction = [&](const std::vector<RealMatrix>& target,
                                     std::vector<RealMatrix>& out_dx,
                                     std::vector<RealMatrix>& out_ds, std::vector<double>& dy,
                                     std::vector<double>& df) {
            std::vector<double> q(m);
            std::vector<RealMatrix> base(nb);
            for (int b = 0; b < nb; ++b) {
                matmul_into(w[b], rd[b], tmp1);
                matmul_into(tmp1, w[b], tmp2);
                base[b] = target[b];
                for (size_t i = 0; i < base[b].data.size(); ++i) base[b].data[i] -= tmp2.data[i];
            }
            for (int k = 0; k < m; ++k) {
                double v = rp[k];
                for (const auto& t : con[k]->terms) v -= t.value * base[t.block].at(t.i, t.j);
                q[k] = v;
            }
            solve_augmented(q, dy, df);
            for (int b = 0; b < nb; ++b) {
                int n = prob.block_dims[b];
                out_ds[b] = rd[b];
                out_dx[b] = base[b];
                RealMatrix acc(n, n);
                for (int k = 0; k < m; ++k) {
                    if (dy[k] == 0.0) continue;
                    for (const auto& t : con[k]->terms)
                        if (t.block == b) acc.at(t.i, t.j) += dy[k] * t.value;
                }
                for (size_t i = 0; i < acc.data.size(); ++i) out_ds[b].data[i] -= acc.data[i];
                // dx = base + W (sum dy_k A_k) W
                matmul_into(w[b], acc, tmp1);
                matmul_into(tmp1, w[b], tmp2);
                for (size_t i = 0; i < out_dx[b].data.size(); ++i)
                    out_dx[b].data[i] += tmp2.data[i];
                symmetrize(out_dx[b]);
                symmetrize(out_ds[b]);
            }
        };

        // predictor: affine direction, target -X
        std::vector<double> dy_aff, df_aff;
        for (int b = 0; b < nb; ++b) z[b] = -1.0 * x[b];
        compute_direction(z, dx_aff, ds_aff, dy_aff, df_aff);

        double ap_aff = 1.0, ad_aff = 1.0;
        for (int b = 0; b < nb; ++b) {
            ap_aff = std::min(ap_aff, detail::max_psd_step(x[b], dx_aff[b]));
            ad_aff = std::min(ad_aff, detail::max_psd_step(s[b], ds_aff[b]));
        }
        double mu_aff = 0.0;
        for (int b = 0; b < nb; ++b)
            for (size_t i = 0; i < x[b].data.size(); ++i)
                mu_aff += (x[b].data[i] + ap_aff * dx_aff[b].data[i]) *
                          (s[b].data[i] + ad_aff * ds_aff[b].data[i]);
        mu_aff /= std::max(1, total_dim);
        double sigma = std::pow(std::max(0.0, std::min(1.0, mu_aff / mu)), 3.0);
        sigma = std::max(sigma, 1e-10);

        // corrector: target sigma*mu*S^{-1} - X - sym(S^{-1} dS_aff dX_aff)
        for (int b = 0; b < nb; ++b) {
            matmul_into(ds_aff[b], dx_aff[b], tmp1);
            matmul_into(sinv[b], tmp1, tmp2);
            z[b] = sigma * mu * sinv[b];
            for (size_t i = 0; i < z[b].data.size(); ++i)
                z[b].data[i] -= x[b].data[i] + tmp2.data[i];
            symmetrize(z[b]);
        }
        std::vector<double> dy_cmb, df_cmb;
        compute_direction(z, dx, ds, dy_cmb, df_cmb);

        double ap = 1.0, ad = 1.0;
        for (int b = 0; b < nb; ++b) {
            ap = std::min(ap, detail::max_psd_step(x[b], dx[b]));
            ad = std::min(ad, detail::max_psd_step(s[b], ds[b]));
        }
        // The second-order term can wreck the direction when the optimum is
        // degenerate; if the corrected step is much shorter than the affine
        // one, fall back to the plain centering target.
        if (std::min(ap, ad) < 0.1 * std::min(ap_aff, ad_aff)) {
            for (int b = 0; b < nb; ++b) {
                z[b] = sigma * mu * sinv[b];
                for (size_t i = 0; i < z[b].data.size(); ++i) z[b].data[i] -= x[b].data[i];
                symmetrize(z[b]);
            }
            compute_direction(z, dx, ds, dy_cmb, df_cmb);
            ap = ad = 1.0;
            for (int b = 0; b < nb; ++b) {
                ap = std::min(ap, detail::max_psd_step(x[b], dx[b]));
                ad = std::min(ad, detail::max_psd_step(s[b], ds[b]));
            }
        }
        double tau = 0.98;
        ap = std::min(1.0, tau * ap);
        ad = std::min(1.0, tau * ad);

        for (int b = 0; b < nb; ++b) {
            for (size_t i = 0; i < x[b].data.size(); ++i) x[b].data[i] += ap * dx[b].data[i];
            for (size_t i = 0; i < s[b].data.size(); ++i) s[b].data[i] += ad * ds[b].data[i];
            symmetrize(x[b]);
            symmetrize(s[b]);
        }
        for (int k = 0; k < m; ++k) y[k] += ad * dy_cmb[k];
        for (int q = 0; q < p; ++q) f[q] += ap * df_cmb[q];

        if (iter == settings.max_iterations - 1) sol.status = SdpStatus::MaxIterations;
    }

    sol.blocks = std::move(x);
    sol.free_values = std::move(f);
    sol.dual.assign(prob.constraints.size(), 0.0);
    for (int k = 0; k < m; ++k) sol.dual[keep[k]] = y[k];
    return sol;
}

}  // namespace hpsim
