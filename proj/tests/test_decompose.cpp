#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hpsim/cost.hpp"
#include "hpsim/decompose.hpp"

using namespace hpsim;

namespace {

MapRep parity_sign_map() {
    MapRep e{2, 2, CMatrix(4, 4)};
    e.choi.at(0, 0) = 1.0;
    e.choi.at(3, 3) = -1.0;
    return e;
}

MapRep transpose_map(int d) {
    MapRep e{d, d, CMatrix(d * d, d * d)};
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) e.choi.at(j * d + k, k * d + j) = 1.0;
    return e;
}

/// Random unit-scale twisted channel: a random CPTP instrument with the
/// Kraus operators split into signed branches.
TwistedChannel random_twisted(int d, std::uint64_t stream) {
    RandomStream rng(0x77u, stream);
    CMatrix h = random_hermitian(d * d, rng);
    CMatrix p = h * adjoint_of(h) + 0.05 * CMatrix::identity(d * d);
    CMatrix q = partial_trace(p, d, d, Subsystem::A);
    auto eig = eig_hermitian(q);
    CMatrix qinv_sqrt(d, d);
    for (int k = 0; k < d; ++k)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                qinv_sqrt.at(i, j) += (1.0 / std::sqrt(eig.eigenvalues[k])) *
                                      eig.eigenvectors.at(i, k) *
                                      std::conj(eig.eigenvectors.at(j, k));
    CMatrix conj_factor = tensor(qinv_sqrt, CMatrix::identity(d));
    MapRep channel{d, d, conj_factor * p * adjoint_of(conj_factor)};
    KrausSet k = kraus_from_choi(channel);
    TwistedChannel t{d, d, 1.0, {}};
    TwistedBranch plus{+1, {d, d, {}}};
    TwistedBranch minus{-1, {d, d, {}}};
    for (size_t i = 0; i < k.kraus.size(); ++i)
        (i % 2 ? minus : plus).kraus.kraus.push_back(k.kraus[i]);
    if (plus.kraus.kraus.empty() || minus.kraus.kraus.empty()) {
        plus.kraus.kraus = k.kraus;
        minus.kraus.kraus.clear();
        t.branches = {plus};
        return t;
    }
    t.branches = {plus, minus};
    return t;
}

}  // namespace

TEST_CASE("parity-sign map is an exact unit-scale twisted channel") {
    MapRep p = parity_sign_map();
    auto r = gamma_tc(p);
    TwistedChannel t = twisted_from_certificate(p, r.m_plus, r.m_minus, r.gamma);
    CHECK(t.scale == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(t.branches.size() == 2);
    CHECK(twisted_channel_valid(t, p));
    CHECK(instrument_completeness_defect(t) < 1e-6);
}

TEST_CASE("transpose certificates convert to valid decompositions") {
    MapRep e = transpose_map(2);
    auto r = gamma_tc(e);
    TwistedChannel t = twisted_from_certificate(e, r.m_plus, r.m_minus, r.gamma);
    CHECK(twisted_channel_valid(t, e));
    CHECK(t.scale == doctest::Approx(2.0).epsilon(1e-6));

    auto q = gamma_qpd(e);
    QpdDecomposition d = qpd_from_certificate(e, q.m_plus, q.m_minus, q.weight_plus,
                                              q.weight_minus);
    CHECK(qpd_valid(d, e));
    CHECK(d.gamma() == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("identity yields a single-term decomposition") {
    MapRep id = MapRep::identity(2);
    auto q = gamma_qpd(id);
    QpdDecomposition d = qpd_from_certificate(id, q.m_plus, q.m_minus, q.weight_plus,
                                              q.weight_minus);
    CHECK(d.terms.size() == 1);
    CHECK(d.terms[0].alpha == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(qpd_valid(d, id));
}

TEST_CASE("certificates that violate feasibility are rejected") {
    MapRep p = parity_sign_map();
    CMatrix not_psd = -1.0 * CMatrix::identity(4);
    CHECK_THROWS_AS(twisted_from_certificate(p, not_psd, CMatrix(4, 4), 1.0),
                    InvalidCertificate);
    // coupling violated: M+ - M- != J
    CHECK_THROWS_AS(twisted_from_certificate(p, CMatrix::identity(4), CMatrix(4, 4), 1.0),
                    InvalidCertificate);
    CHECK_THROWS_AS(qpd_from_certificate(p, CMatrix::identity(4), CMatrix(4, 4), 1.0, 0.0),
                    InvalidCertificate);
}

TEST_CASE("hp_to_twisted realizes arbitrary HP maps") {
    for (std::uint64_t s = 0; s < 6; ++s) {
        RandomStream rng(0xD0u, s);
        MapRep e = random_hp_map(2, 2, rng);
        TwistedChannel t = hp_to_twisted(e);
        CHECK(twisted_channel_valid(t, e));
        CHECK(instrument_completeness_defect(t) < 1e-8);
        // the constructive scale is an upper bound on the optimal cost
        CHECK(t.scale >= gamma_tc(e).gamma - 1e-6);
    }
}

TEST_CASE("hp_to_twisted on the zero map degenerates gracefully") {
    MapRep zero{2, 2, CMatrix(4, 4)};
    TwistedChannel t = hp_to_twisted(zero);
    CHECK(twisted_channel_valid(t, zero));
    CHECK(t.scale == doctest::Approx(0.0));
    CHECK(instrument_completeness_defect(t) < 1e-9);
}

TEST_CASE("random twisted channels are valid against their effective maps") {
    for (std::uint64_t s = 0; s < 8; ++s) {
        TwistedChannel t = random_twisted(2, s);
        MapRep eff = effective_map(t);
        CHECK(twisted_channel_valid(t, eff));
        CHECK(instrument_completeness_defect(t) < 1e-9);
    }
}

TEST_CASE("combine_twisted: linear combinations reduce to one channel") {
    for (std::uint64_t s = 0; s < 10; ++s) {
        RandomStream rng(0xD1u, s);
        std::vector<std::pair<double, TwistedChannel>> parts;
        MapRep expected{2, 2, CMatrix(4, 4)};
        double abs_sum = 0.0;
        for (int j = 0; j < 3; ++j) {
            double alpha = 2.0 * rng.uniform() - 1.0;
            TwistedChannel t = random_twisted(2, 100 + 3 * s + j);
            expected = add_maps(expected, scale_map(alpha, effective_map(t)));
            abs_sum += std::abs(alpha) * t.scale;
            parts.emplace_back(alpha, std::move(t));
        }
        TwistedChannel combined = combine_twisted(parts);
        CHECK(combined.scale == abs_sum);  // exact, not approximate
        CHECK(maps_equal(effective_map(combined), expected, 1e-9));
        CHECK(twisted_channel_valid(combined, expected));
    }
}

TEST_CASE("combine_twisted edge cases") {
    CHECK_THROWS_AS(combine_twisted({}), DimensionMismatch);
    TwistedChannel t = random_twisted(2, 900);
    TwistedChannel zero = combine_twisted({{0.0, t}});
    CHECK(zero.scale == 0.0);
    MapRep zmap{2, 2, CMatrix(4, 4)};
    CHECK(twisted_channel_valid(zero, zmap));
}
