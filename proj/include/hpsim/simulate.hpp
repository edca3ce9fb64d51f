#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "hpsim/decompose.hpp"
#include "hpsim/eig.hpp"
#include "hpsim/matrix.hpp"
#include "hpsim/rng.hpp"

namespace hpsim {

/// Hoeffding shot budget: K(delta, eps, O) = 2 ||O||_inf^2 log(2/delta) / eps^2
/// and shots = ceil(overhead^2 K).
struct ShotPlan {
    double delta = 0.0;
    double eps = 0.0;
    double obs_norm = 0.0;
    double k_factor = 0.0;
    double overhead = 0.0;
    long long shots = 0;
};

inline ShotPlan plan_shots(double delta, double eps, const CMatrix& obs, double overhead) {
    if (!(delta > 0.0 && delta < 1.0)) throw ParamOutOfRange("plan_shots: delta outside (0, 1)");
    if (!(eps > 0.0)) throw ParamOutOfRange("plan_shots: eps must be positive");
    if (overhead < 0.0) throw ParamOutOfRange("plan_shots: negative overhead");
    ShotPlan p;
    p.delta = delta;
    p.eps = eps;
    p.obs_norm = op_norm(obs);
    p.k_factor = 2.0 * p.obs_norm * p.obs_norm * std::log(2.0 / delta) / (eps * eps);
    p.overhead = overhead;
    p.shots = std::max(1LL, static_cast<long long>(std::ceil(overhead * overhead * p.k_factor)));
    return p;
}

struct ShotRecord {
    long long index = 0;
    int branch = -1;          // sampled term/branch; -1 = CPTN failure event
    double raw_eigenvalue = 0.0;
    double weighted_value = 0.0;
};

struct EstimateResult {
    double mean = 0.0;
    double variance = 0.0;  // empirical per-shot variance
    long long shots = 0;
    std::uint64_t seed = 0;
    std::vector<ShotRecord> trace;  // filled only when requested
};

namespace detail {

/// Observable prepared for one-shot eigenbasis sampling; degenerate
/// eigenvalues merged by tolerance.
struct ObservableSampler {
    std::vector<double> eigenvalues;
    std::vector<CMatrix> projectors;

    explicit ObservableSampler(const CMatrix& obs, double merge_tol = 1e-9) {
        if (!is_hermitian(obs, 1e-9))
            throw NotHermitian("observable must be Hermitian");
        auto eig = eig_hermitian(hermitize(obs));
        const int n = obs.rows;
        double scale = eig.eigenvalues.empty()
                           ? 1.0
                           : std::max(1.0, std::abs(eig.eigenvalues.front()));
        int k = 0;
        while (k < n) {
            int k2 = k;
            while (k2 + 1 < n &&
                   std::abs(eig.eigenvalues[k2 + 1] - eig.eigenvalues[k]) <= merge_tol * scale)
                ++k2;
            CMatrix proj(n, n);
            double lam = 0.0;
            for (int c = k; c <= k2; ++c) {
                lam += eig.eigenvalues[c];
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j)
                        proj.at(i, j) +=
                            eig.eigenvectors.at(i, c) * std::conj(eig.eigenvectors.at(j, c));
            }
            eigenvalues.push_back(lam / (k2 - k + 1));
            projectors.push_back(std::move(proj));
            k = k2 + 1;
        }
    }

    /// Outcome distribution for a unit-trace state.
    std::vector<double> outcome_probs(const CMatrix& rho) const {
        std::vector<double> p(eigenvalues.size());
        double total = 0.0;
        for (size_t k = 0; k < projectors.size(); ++k) {
            double v = hs_inner(projectors[k], rho).real();
            p[k] = std::max(0.0, std::min(1.0, v));
            total += p[k];
        }
        if (std::abs(total - 1.0) > 1e-9 * projectors.size() * 8)
            throw Error("observable sampling: outcome probabilities do not sum to 1");
        for (auto& v : p) v /= total;
        return p;
    }
};

inline void check_density_matrix(const CMatrix& rho) {
    if (rho.rows != rho.cols || !is_hermitian(rho, 1e-8))
        throw NotDensityMatrix("state must be a Hermitian square matrix");
    if (std::abs(trace_of(rho).real() - 1.0) > 1e-8)
        throw NotDensityMatrix("state must have unit trace");
    if (!psd_check(hermitize(rho), 1e-8))
        throw NotDensityMatrix("state must be positive semidefinite");
}

struct WeightedOutcome {
    double prob;
    double raw;       // sampled eigenvalue (0 for failure events)
    double weighted;  // post-processed shot value
    int branch;
};

/// Kahan-compensated accumulation of the shot stream, in index order.
struct ShotAccumulator {
    double sum = 0.0, c1 = 0.0;
    double sumsq = 0.0, c2 = 0.0;
    long long n = 0;

    void add(double v) {
        double t = v - c1;
        double s = sum + t;
        c1 = (s - sum) - t;
        sum = s;
        double q = v * v - c2;
        double s2 = sumsq + q;
        c2 = (s2 - sumsq) - q;
        sumsq = s2;
        ++n;
    }

    double mean() const { return n ? sum / n : 0.0; }
    double variance() const {
        if (n < 2) return 0.0;
        double m = mean();
        double v = (sumsq - n * m * m) / (n - 1);
        return std::max(0.0, v);
    }
};

}  // namespace detail

/// Fig. 1(a): classical quasi-probability sampling.  Per shot a term is
/// drawn with probability |alpha_j| / gamma, the CPTN map is realized by
/// Kraus sampling with an explicit failure event worth 0, and the
/// observable is measured by eigenbasis sampling; the outcome is weighted
/// by sgn(alpha_j) * gamma.
inline EstimateResult run_qpd(const QpdDecomposition& d, const CMatrix& rho, const CMatrix& obs,
                              long long shots, std::uint64_t seed, bool record = false) {
    detail::check_density_matrix(rho);
    if (rho.rows != d.dim_in) throw DimensionMismatch("run_qpd: state dimension mismatch");
    if (obs.rows != d.dim_out) throw DimensionMismatch("run_qpd: observable dimension mismatch");
    detail::ObservableSampler sampler(obs);

    double gamma = d.gamma();
    std::vector<double> term_weights;
    for (const auto& t : d.terms) term_weights.push_back(std::abs(t.alpha));

    // everything about a shot is a discrete distribution over
    // (term, kraus-or-failure, outcome); tabulate it once
    std::vector<std::vector<detail::WeightedOutcome>> table(d.terms.size());
    for (size_t j = 0; j < d.terms.size(); ++j) {
        const auto& term = d.terms[j];
        double sign = term.alpha >= 0.0 ? 1.0 : -1.0;
        double success = 0.0;
        for (const auto& k : term.kraus.kraus) {
            CMatrix post = k * rho * adjoint_of(k);
            double p = trace_of(post).real();
            p = std::max(0.0, p);
            success += p;
            if (p <= 1e-300) continue;
            CMatrix normalized = (1.0 / p) * post;
            auto probs = sampler.outcome_probs(hermitize(normalized));
            for (size_t o = 0; o < probs.size(); ++o) {
                if (probs[o] <= 0.0) continue;
                table[j].push_back({p * probs[o], sampler.eigenvalues[o],
                                    sign * gamma * sampler.eigenvalues[o],
                                    static_cast<int>(j)});
            }
        }
        double fail = 1.0 - success;
        if (fail > 1e-12) table[j].push_back({fail, 0.0, 0.0, -1});
        double total = 0.0;
        for (auto& w : table[j]) total += w.prob;
        for (auto& w : table[j]) w.prob /= total;
    }

    detail::ShotAccumulator acc;
    EstimateResult res;
    res.seed = seed;
    if (record) res.trace.reserve(static_cast<size_t>(shots));
    for (long long i = 0; i < shots; ++i) {
        RandomStream rng(seed, static_cast<std::uint64_t>(i));
        double value = 0.0;
        double raw = 0.0;
        int branch = -1;
        if (!d.terms.empty()) {
            int j = rng.discrete(term_weights, gamma);
            const auto& outs = table[j];
            double u = rng.uniform();
            double cum = 0.0;
            const detail::WeightedOutcome* pick = &outs.back();
            for (const auto& w : outs) {
                cum += w.prob;
                if (u < cum) {
                    pick = &w;
                    break;
                }
            }
            value = pick->weighted;
            raw = pick->raw;
            branch = pick->branch;
        }
        acc.add(value);
        if (record) res.trace.push_back({i, branch, raw, value});
    }
    res.mean = acc.mean();
    res.variance = acc.variance();
    res.shots = shots;
    return res;
}

/// Fig. 1(b): measurement-controlled post-processing.  The instrument
/// branch is drawn with its Born probability tr[M_j(rho)], the observable
/// is measured on the post-measurement state, and the outcome is weighted
/// by sign_j * scale.
inline EstimateResult run_mcpp(const TwistedChannel& t, const CMatrix& rho, const CMatrix& obs,
                               long long shots, std::uint64_t seed, bool record = false,
                               double completeness_tol = 1e-6) {
    detail::check_density_matrix(rho);
    if (rho.rows != t.dim_in) throw DimensionMismatch("run_mcpp: state dimension mismatch");
    if (obs.rows != t.dim_out) throw DimensionMismatch("run_mcpp: observable dimension mismatch");
    detail::ObservableSampler sampler(obs);

    std::vector<double> branch_probs;
    std::vector<std::vector<double>> outcome_probs;
    std::vector<double> branch_factor;
    double total = 0.0;
    for (const auto& br : t.branches) {
        CMatrix out(t.dim_out, t.dim_out);
        for (const auto& k : br.kraus.kraus) out = out + k * rho * adjoint_of(k);
        double p = std::max(0.0, trace_of(out).real());
        total += p;
        branch_probs.push_back(p);
        if (p > 1e-300) {
            outcome_probs.push_back(sampler.outcome_probs(hermitize((1.0 / p) * out)));
        } else {
            outcome_probs.emplace_back(sampler.eigenvalues.size(), 0.0);
        }
        branch_factor.push_back(br.sign * t.scale);
    }
    if (total < 1.0 - completeness_tol)
        throw IncompleteInstrument("run_mcpp: branch probabilities sum below 1");

    detail::ShotAccumulator acc;
    EstimateResult res;
    res.seed = seed;
    if (record) res.trace.reserve(static_cast<size_t>(shots));
    for (long long i = 0; i < shots; ++i) {
        RandomStream rng(seed, static_cast<std::uint64_t>(i));
        int j = rng.discrete(branch_probs, total);
        const auto& probs = outcome_probs[j];
        double u = rng.uniform();
        double cum = 0.0;
        size_t o = probs.size() - 1;
        for (size_t k = 0; k < probs.size(); ++k) {
            cum += probs[k];
            if (u < cum) {
                o = k;
                break;
            }
        }
        double raw = sampler.eigenvalues[o];
        double value = branch_factor[j] * raw;
        acc.add(value);
        if (record) res.trace.push_back({i, j, raw, value});
    }
    res.mean = acc.mean();
    res.variance = acc.variance();
    res.shots = shots;
    return res;
}

/// Exact oracle tr[E(rho) O] the estimators converge to.
inline double exact_expectation(const MapRep& e, const CMatrix& rho, const CMatrix& obs) {
    CMatrix out = apply(e, rho);
    return hs_inner(hermitize(obs), out).real();
}

}  // namespace hpsim
