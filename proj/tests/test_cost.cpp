#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hpsim/cost.hpp"

using namespace hpsim;

namespace {

MapRep transpose_map(int d) {
    MapRep e{d, d, CMatrix(d * d, d * d)};
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) e.choi.at(j * d + k, k * d + j) = 1.0;
    return e;
}

// E(rho) = P0 rho P0 - P1 rho P1: a twisted channel with unit scale whose
// quasi-probability cost is maximal (twice the twisted-channel cost).
MapRep parity_sign_map() {
    MapRep e{2, 2, CMatrix(4, 4)};
    e.choi.at(0, 0) = 1.0;
    e.choi.at(3, 3) = -1.0;
    return e;
}

}  // namespace

TEST_CASE("identity and channels cost exactly one") {
    CHECK(gamma_tc(MapRep::identity(2)).gamma == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(gamma_qpd(MapRep::identity(2)).gamma == doctest::Approx(1.0).epsilon(1e-7));
    for (double eps : {0.0, 0.3, 0.7, 1.0}) {
        CHECK(gamma_tc(depolarizing(eps)).gamma == doctest::Approx(1.0).epsilon(1e-7));
        CHECK(gamma_qpd(choi_from_kraus(amplitude_damping(eps))).gamma ==
              doctest::Approx(1.0).epsilon(1e-7));
    }
}

TEST_CASE("transpose map costs two under both models") {
    MapRep t = transpose_map(2);
    CHECK(gamma_tc(t).gamma == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(gamma_qpd(t).gamma == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("parity-sign map: unit instrument cost, doubled sampling cost") {
    MapRep p = parity_sign_map();
    CHECK(gamma_tc(p).gamma == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(gamma_qpd(p).gamma == doctest::Approx(2.0).epsilon(1e-7));
}

TEST_CASE("certificates are feasible for their programs") {
    MapRep t = transpose_map(2);
    auto r = gamma_tc(t);
    CHECK(psd_check(hermitize(r.m_plus), 1e-7));
    CHECK(psd_check(hermitize(r.m_minus), 1e-7));
    CHECK(max_abs_entry(r.m_plus - r.m_minus - t.choi) < 1e-6);
    CMatrix tb = partial_trace(hermitize(r.m_plus + r.m_minus), 2, 2, Subsystem::A);
    CHECK(max_abs_entry(tb - r.gamma * CMatrix::identity(2)) < 1e-6);

    auto q = gamma_qpd(t);
    CHECK(q.weight_plus >= -1e-9);
    CHECK(q.weight_minus >= -1e-9);
    CMatrix tp = partial_trace(hermitize(q.m_plus), 2, 2, Subsystem::A);
    CHECK(op_norm(tp) <= q.weight_plus + 1e-6);
}

TEST_CASE("sandwich inequality gamma_tc <= gamma_qpd <= 2 gamma_tc") {
    for (std::uint64_t s = 0; s < 6; ++s) {
        RandomStream rng(0xC0u, s);
        MapRep e = random_hp_map(2, 2, rng);
        double tc = gamma_tc(e).gamma;
        double qpd = gamma_qpd(e).gamma;
        CHECK(tc <= qpd + 1e-7);
        CHECK(qpd <= 2.0 * tc + 1e-7);
    }
}

TEST_CASE("homogeneity: gamma_tc(c E) = |c| gamma_tc(E)") {
    RandomStream rng(0xC1u, 0);
    MapRep e = random_hp_map(2, 2, rng);
    double base = gamma_tc(e).gamma;
    for (double c : {-2.0, 0.5, 3.0}) {
        double scaled = gamma_tc(scale_map(c, e)).gamma;
        CHECK(scaled == doctest::Approx(std::abs(c) * base).epsilon(1e-6));
    }
}

TEST_CASE("triangle inequality") {
    RandomStream rng(0xC2u, 0);
    MapRep a = random_hp_map(2, 2, rng);
    MapRep b = random_hp_map(2, 2, rng);
    double lhs = gamma_tc(add_maps(a, b)).gamma;
    CHECK(lhs <= gamma_tc(a).gamma + gamma_tc(b).gamma + 1e-6);
}

TEST_CASE("variational diamond bound: fixtures") {
    CHECK(diamond_variational(MapRep::identity(2), 10, 3) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(diamond_variational(transpose_map(2), 100, 3) >= 2.0 - 1e-6);
    MapRep zero{2, 2, CMatrix(4, 4)};
    CHECK(diamond_variational(zero, 5, 3) == doctest::Approx(0.0));
}

TEST_CASE("variational bound never exceeds gamma_tc") {
    for (std::uint64_t s = 0; s < 5; ++s) {
        RandomStream rng(0xC3u, s);
        MapRep e = random_hp_map(2, 2, rng);
        double tc = gamma_tc(e).gamma;
        double lower = diamond_variational(e, 40, 11 + s);
        CHECK(tc >= lower - 1e-8);
    }
}

TEST_CASE("robustness identity and mixing feasibility") {
    MapRep t = transpose_map(2);
    double tc = gamma_tc(t).gamma;
    double r = robustness(t);
    CHECK(2.0 * r + 1.0 == doctest::Approx(tc).epsilon(1e-9));
    // Appendix-style feasibility: E / gamma_tc is a unit-cost twisted channel
    CHECK(gamma_tc(scale_map(1.0 / tc, t)).gamma == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("non-Hermitian Choi is rejected") {
    MapRep bad{2, 2, CMatrix(4, 4)};
    bad.choi.at(0, 1) = 1.0;  // no conjugate partner
    CHECK_THROWS_AS(gamma_tc(bad), NotHermitianPreserving);
    CHECK_THROWS_AS(gamma_qpd(bad), NotHermitianPreserving);
}

TEST_CASE("cost_report is internally consistent") {
    RandomStream rng(0xC4u, 0);
    MapRep e = random_hp_map(2, 2, rng);
    CostReport rep = cost_report(e);
    CHECK(rep.gamma_tc <= rep.gamma_qpd + 1e-7);
    CHECK(rep.diamond_independent <= rep.gamma_tc + 1e-7);
    CHECK(2.0 * rep.robustness + 1.0 == doctest::Approx(rep.gamma_tc).epsilon(1e-9));
}

TEST_CASE("qutrit maps solve to matching variational bounds") {
    RandomStream rng(0xC5u, 0);
    MapRep e = random_hp_map(3, 3, rng);
    double tc = gamma_tc(e).gamma;
    double lower = diamond_variational(e, 60, 17);
    CHECK(tc >= lower - 1e-8);
    CHECK(tc == doctest::Approx(lower).epsilon(1e-3));
}
