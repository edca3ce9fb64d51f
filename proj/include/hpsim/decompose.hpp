#pragma once

#include <cmath>
#include <vector>

#include "hpsim/cost.hpp"
#include "hpsim/maps.hpp"

namespace hpsim {

/// One signed branch of a quantum instrument.
struct TwistedBranch {
    int sign = +1;  // +1 or -1
    KrausSet kraus;
};

/// Definition-1 object: scale * sum_j sign_j M_j where {M_j} is a quantum
/// instrument (CPTN branches summing to a CPTP map).
struct TwistedChannel {
    int dim_in = 0;
    int dim_out = 0;
    double scale = 0.0;
    std::vector<TwistedBranch> branches;
};

struct QpdTerm {
    double alpha = 0.0;
    KrausSet kraus;  // trace-non-increasing
};

struct QpdDecomposition {
    int dim_in = 0;
    int dim_out = 0;
    std::vector<QpdTerm> terms;

    double gamma() const {
        double g = 0.0;
        for (const auto& t : terms) g += std::abs(t.alpha);
        return g;
    }
};

inline MapRep effective_map(const TwistedChannel& t) {
    CMatrix j(t.dim_in * t.dim_out, t.dim_in * t.dim_out);
    for (const auto& br : t.branches) {
        MapRep m = choi_from_kraus(br.kraus);
        double s = t.scale * br.sign;
        for (size_t i = 0; i < j.entries.size(); ++i) j.entries[i] += s * m.choi.entries[i];
    }
    return MapRep(t.dim_in, t.dim_out, std::move(j));
}

inline MapRep effective_map(const QpdDecomposition& q) {
    CMatrix j(q.dim_in * q.dim_out, q.dim_in * q.dim_out);
    for (const auto& t : q.terms) {
        MapRep m = choi_from_kraus(t.kraus);
        for (size_t i = 0; i < j.entries.size(); ++i) j.entries[i] += t.alpha * m.choi.entries[i];
    }
    return MapRep(q.dim_in, q.dim_out, std::move(j));
}

/// sum over all branches of sum_m K^dag K; equals I for a complete instrument.
inline CMatrix instrument_total(const TwistedChannel& t) {
    CMatrix total(t.dim_in, t.dim_in);
    for (const auto& br : t.branches)
        for (const auto& k : br.kraus.kraus) {
            CMatrix kk = adjoint_of(k) * k;
            total = total + kk;
        }
    return total;
}

inline double instrument_completeness_defect(const TwistedChannel& t) {
    return frobenius_norm(instrument_total(t) - CMatrix::identity(t.dim_in));
}

/// Check both Definition-1 invariants against a target map.
inline bool twisted_channel_valid(const TwistedChannel& t, const MapRep& target,
                                  double tol = 1e-6) {
    if (t.scale < -tol) return false;
    if (instrument_completeness_defect(t) > tol * t.dim_in) return false;
    MapRep eff = effective_map(t);
    return frobenius_norm(eff.choi - target.choi) <=
           tol * std::max(1.0, frobenius_norm(target.choi));
}

inline bool qpd_valid(const QpdDecomposition& q, const MapRep& target, double tol = 1e-6) {
    for (const auto& t : q.terms) {
        MapRep m = choi_from_kraus(t.kraus);
        if (!is_tni(m, tol)) return false;
    }
    MapRep eff = effective_map(q);
    return frobenius_norm(eff.choi - target.choi) <=
           tol * std::max(1.0, frobenius_norm(target.choi));
}

namespace detail {

/// Symmetrize and clip tiny negative eigenvalues, then extract Kraus
/// operators; certificates arrive with solver-level noise.
inline KrausSet cleaned_kraus(const CMatrix& choi, int din, int dout, double drop_tol) {
    CMatrix p = psd_project(hermitize(choi));
    return kraus_from_choi(MapRep(din, dout, std::move(p)), drop_tol);
}

inline void check_certificate_psd(const CMatrix& m, double tol, const char* what) {
    if (!is_hermitian(m, tol)) throw InvalidCertificate(std::string(what) + ": not Hermitian");
    if (!psd_check(hermitize(m), tol))
        throw InvalidCertificate(std::string(what) + ": not positive semidefinite");
}

inline TwistedChannel degenerate_zero(int din, int dout) {
    // scale 0 with a single identity-like + branch keeps the instrument
    // complete while the effective map vanishes
    TwistedChannel t;
    t.dim_in = din;
    t.dim_out = dout;
    t.scale = 0.0;
    TwistedBranch br;
    br.sign = +1;
    br.kraus.dim_in = din;
    br.kraus.dim_out = dout;
    CMatrix k(dout, din);
    for (int i = 0; i < std::min(din, dout); ++i) k.at(i, i) = 1.0;
    if (din <= dout) {
        br.kraus.kraus.push_back(std::move(k));
    } else {
        // isometry unavailable; use the row-deleting coisometry family
        for (int off = 0; off + dout <= din; off += dout) {
            CMatrix kk(dout, din);
            for (int i = 0; i < dout; ++i) kk.at(i, off + i) = 1.0;
            br.kraus.kraus.push_back(std::move(kk));
        }
        // patch the remainder so sum K^dag K = I
        int covered = (din / dout) * dout;
        if (covered < din) {
            CMatrix kk(dout, din);
            for (int i = 0; covered + i < din; ++i) kk.at(i, covered + i) = 1.0;
            br.kraus.kraus.push_back(std::move(kk));
        }
    }
    t.branches.push_back(std::move(br));
    return t;
}

}  // namespace detail

/// Turn an optimal Eq.-5 certificate (M+, M-, alpha) into the executable
/// quantum instrument: branches M+/alpha and M-/alpha with signs +/-.
inline TwistedChannel twisted_from_certificate(const MapRep& e, const CMatrix& m_plus,
                                               const CMatrix& m_minus, double alpha,
                                               const NumericSettings& settings = {}) {
    const double tol = settings.cert_tol;
    CMatrix target = hermitize(e.choi);
    CMatrix diff = hermitize(m_plus) - hermitize(m_minus) - target;
    if (frobenius_norm(diff) > tol * std::max(1.0, frobenius_norm(target)))
        throw InvalidCertificate("twisted_from_certificate: M+ - M- does not reproduce the map");
    detail::check_certificate_psd(m_plus, tol, "twisted_from_certificate: M+");
    detail::check_certificate_psd(m_minus, tol, "twisted_from_certificate: M-");
    if (alpha < -tol) throw InvalidCertificate("twisted_from_certificate: negative scale");
    if (alpha <= tol) return detail::degenerate_zero(e.dim_in, e.dim_out);

    CMatrix tb = partial_trace(hermitize(m_plus) + hermitize(m_minus), e.dim_in, e.dim_out,
                               Subsystem::A);
    CMatrix defect = tb - alpha * CMatrix::identity(e.dim_in);
    if (frobenius_norm(defect) > tol * std::max(1.0, alpha) * e.dim_in)
        throw InvalidCertificate("twisted_from_certificate: tr_B[M+ + M-] != alpha I");

    TwistedChannel t;
    t.dim_in = e.dim_in;
    t.dim_out = e.dim_out;
    t.scale = alpha;
    double inv = 1.0 / alpha;
    KrausSet kp = detail::cleaned_kraus(inv * m_plus, e.dim_in, e.dim_out,
                                        settings.kraus_drop_tol);
    KrausSet km = detail::cleaned_kraus(inv * m_minus, e.dim_in, e.dim_out,
                                        settings.kraus_drop_tol);
    if (!kp.kraus.empty()) t.branches.push_back({+1, std::move(kp)});
    if (!km.kraus.empty()) t.branches.push_back({-1, std::move(km)});
    return t;
}

/// Executable QPD from an optimal (M+, M-, a, b) certificate:
/// terms (+a, M+/a) and (-b, M-/b), zero-weight terms dropped.
inline QpdDecomposition qpd_from_certificate(const MapRep& e, const CMatrix& m_plus,
                                             const CMatrix& m_minus, double a, double b,
                                             const NumericSettings& settings = {}) {
    const double tol = settings.cert_tol;
    CMatrix target = hermitize(e.choi);
    CMatrix diff = hermitize(m_plus) - hermitize(m_minus) - target;
    if (frobenius_norm(diff) > tol * std::max(1.0, frobenius_norm(target)))
        throw InvalidCertificate("qpd_from_certificate: M+ - M- does not reproduce the map");
    detail::check_certificate_psd(m_plus, tol, "qpd_from_certificate: M+");
    detail::check_certificate_psd(m_minus, tol, "qpd_from_certificate: M-");
    if (a < -tol || b < -tol) throw InvalidCertificate("qpd_from_certificate: negative weight");

    QpdDecomposition q;
    q.dim_in = e.dim_in;
    q.dim_out = e.dim_out;
    if (a > tol) {
        QpdTerm t;
        t.alpha = a;
        t.kraus = detail::cleaned_kraus((1.0 / a) * m_plus, e.dim_in, e.dim_out,
                                        settings.kraus_drop_tol);
        if (!t.kraus.kraus.empty()) q.terms.push_back(std::move(t));
    }
    if (b > tol) {
        QpdTerm t;
        t.alpha = -b;
        t.kraus = detail::cleaned_kraus((1.0 / b) * m_minus, e.dim_in, e.dim_out,
                                        settings.kraus_drop_tol);
        if (!t.kraus.kraus.empty()) q.terms.push_back(std::move(t));
    }
    return q;
}

/// Lemma-1 reduction: fold a linear combination of twisted channels into a
/// single one.  The output scale is sum_j |alpha_j| * scale_j and branch
/// Kraus operators are reweighted by sqrt(p_j); negative coefficients flip
/// branch signs.
inline TwistedChannel combine_twisted(
    const std::vector<std::pair<double, TwistedChannel>>& terms) {
    if (terms.empty()) throw DimensionMismatch("combine_twisted: empty combination");
    const int din = terms.front().second.dim_in;
    const int dout = terms.front().second.dim_out;
    double total = 0.0;
    for (const auto& [alpha, t] : terms) {
        if (t.dim_in != din || t.dim_out != dout)
            throw DimensionMismatch("combine_twisted: dimension mismatch between terms");
        total += std::abs(alpha) * t.scale;
    }
    if (total <= 0.0) return detail::degenerate_zero(din, dout);

    TwistedChannel out;
    out.dim_in = din;
    out.dim_out = dout;
    out.scale = total;
    for (const auto& [alpha, t] : terms) {
        double weight = std::abs(alpha) * t.scale / total;  // p_j
        if (weight == 0.0) continue;
        double root = std::sqrt(weight);
        int flip = alpha >= 0.0 ? +1 : -1;
        for (const auto& br : t.branches) {
            TwistedBranch nb;
            nb.sign = br.sign * flip;
            nb.kraus.dim_in = br.kraus.dim_in;
            nb.kraus.dim_out = br.kraus.dim_out;
            for (const auto& k : br.kraus.kraus) nb.kraus.kraus.push_back(root * k);
            out.branches.push_back(std::move(nb));
        }
    }
    return out;
}

/// Constructive Appendix-A form: any Hermitian-preserving map as a scaled
/// twisted channel.  Jordan-splits the Choi operator, scales by the largest
/// partial-trace eigenvalue, and pads with the replacement-to-|0><0|
/// completion so the instrument sums to a channel.  Valid but generally
/// not optimal.
inline TwistedChannel hp_to_twisted(const MapRep& e, const NumericSettings& settings = {}) {
    if (!is_hermitian_preserving(e, settings.tol))
        throw NotHermitianPreserving("hp_to_twisted: Choi operator is not Hermitian");
    const int da = e.dim_in, db = e.dim_out, n = da * db;
    CMatrix j = hermitize(e.choi);
    auto eig = eig_hermitian(j, settings.tol);
    CMatrix jp(n, n), jm(n, n);
    for (int k = 0; k < n; ++k) {
        double l = eig.eigenvalues[k];
        if (l == 0.0) continue;
        CMatrix& dst = l > 0.0 ? jp : jm;
        double mag = std::abs(l);
        for (int i = 0; i < n; ++i)
            for (int jj = 0; jj < n; ++jj)
                dst.at(i, jj) +=
                    mag * eig.eigenvectors.at(i, k) * std::conj(eig.eigenvectors.at(jj, k));
    }
    CMatrix tb = partial_trace(jp + jm, da, db, Subsystem::A);
    double alpha = op_norm(hermitize(tb), settings.tol);
    if (alpha <= settings.tol) return detail::degenerate_zero(da, db);

    TwistedChannel t;
    t.dim_in = da;
    t.dim_out = db;
    t.scale = alpha;
    double inv = 1.0 / alpha;
    KrausSet kp = detail::cleaned_kraus(inv * jp, da, db, settings.kraus_drop_tol);
    KrausSet km = detail::cleaned_kraus(inv * jm, da, db, settings.kraus_drop_tol);
    if (!kp.kraus.empty()) t.branches.push_back({+1, std::move(kp)});
    if (!km.kraus.empty()) t.branches.push_back({-1, std::move(km)});

    // completion M' with tr_B Choi = (I - tr_B[(J+ + J-)/alpha])/2
    CMatrix slack = CMatrix::identity(da) - inv * tb;
    CMatrix half = 0.5 * hermitize(slack);
    if (frobenius_norm(half) > settings.tol) {
        CMatrix e00(db, db);
        e00.at(0, 0) = 1.0;
        CMatrix jprime = tensor(half, e00);
        KrausSet kc = detail::cleaned_kraus(jprime, da, db, settings.kraus_drop_tol);
        if (!kc.kraus.empty()) {
            TwistedBranch plus{+1, kc};
            TwistedBranch minus{-1, std::move(kc)};
            t.branches.push_back(std::move(plus));
            t.branches.push_back(std::move(minus));
        }
    }
    return t;
}

}  // namespace hpsim
