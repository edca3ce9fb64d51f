#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <hpsim/recovery.hpp>

#include <cmath>

using namespace hpsim;

TEST_CASE("noise_family produces CPTP channels and rejects unknown names") {
    for (const char* fam : {"amplitude-damping", "ad", "dephasing", "depolarizing"}) {
        MapRep e = noise_family(fam, 0.3);
        CHECK(is_cp(e, 1e-10));
        CHECK(is_tp(e, 1e-10));
    }
    CHECK_THROWS_AS(noise_family("bit-flip", 0.3), InvalidSpec);
    CHECK_THROWS_AS(noise_family("dephasing", 1.5), ParamOutOfRange);
}

TEST_CASE("noiseless recovery costs exactly one") {
    for (const char* fam : {"ad", "dephasing", "depolarizing"}) {
        RecoveryProblem p{noise_family(fam, 0.0), default_observable(), CostModel::TC, false};
        RecoverySolution tc = optimal_recovery(p);
        p.cost_model = CostModel::QPD;
        RecoverySolution qpd = optimal_recovery(p);
        CHECK(tc.cost == doctest::Approx(1.0).epsilon(1e-7));
        CHECK(qpd.cost == doctest::Approx(1.0).epsilon(1e-7));
        CHECK(tc.residual < 1e-8);
        CHECK(qpd.residual < 1e-8);
    }
}

TEST_CASE("dephasing fixture and model ordering") {
    RecoveryProblem p{noise_family("dephasing", 0.3), default_observable(), CostModel::TC, false};
    RecoverySolution tc = optimal_recovery(p);
    p.cost_model = CostModel::QPD;
    RecoverySolution qpd = optimal_recovery(p);
    CHECK(tc.cost == doctest::Approx(1.19113733).epsilon(1e-6));
    CHECK(qpd.cost == doctest::Approx(1.30149051).epsilon(1e-6));
    CHECK(tc.cost <= qpd.cost + 1e-9);
    // the recovery map really restores the expectation values
    CHECK(recovery_residual(p, tc.d_map) < 1e-8);
    CHECK(recovery_residual(p, qpd.d_map) < 1e-8);
    // certificate consistency: d_map = M+ - M-
    CMatrix diff = tc.m_plus - tc.m_minus;
    CHECK(frobenius_norm(diff - tc.d_map.choi) < 1e-7);
}

TEST_CASE("recovery cost grows with dephasing strength") {
    double prev = 0.0;
    for (double eps : {0.0, 0.3, 0.6}) {
        RecoveryProblem p{noise_family("dephasing", eps), default_observable(), CostModel::TC,
                          false};
        double cost = optimal_recovery(p).cost;
        CHECK(cost >= prev - 1e-8);
        prev = cost;
    }
    CHECK(prev > 1.0 + 1e-3);
}

TEST_CASE("complete depolarizing noise is unrecoverable") {
    RecoveryProblem p{noise_family("depolarizing", 1.0), default_observable(), CostModel::TC,
                      false};
    CHECK_THROWS_AS(optimal_recovery(p), InfeasibleRecovery);
}

TEST_CASE("full inverse recovers every observable") {
    RecoveryProblem p{noise_family("dephasing", 0.4), default_observable(), CostModel::TC, true};
    RecoverySolution sol = optimal_recovery(p);
    CHECK(sol.residual < 1e-8);
    // D o N acts as the identity map on any input
    MapRep composed = compose(sol.d_map, p.noise);
    CMatrix rho(2, 2);
    rho.at(0, 0) = 0.6;
    rho.at(0, 1) = cplx(0.1, -0.3);
    rho.at(1, 0) = cplx(0.1, 0.3);
    rho.at(1, 1) = 0.4;
    CMatrix back = apply(composed, rho);
    CHECK(frobenius_norm(back - rho) < 1e-6);
    // observable-specific recovery can never cost more than the full inverse
    RecoveryProblem single = p;
    single.full_inverse = false;
    CHECK(optimal_recovery(single).cost <= sol.cost + 1e-7);
}

TEST_CASE("sweep_recovery flags infeasible rows and keeps model order") {
    std::vector<SweepPoint> rows = sweep_recovery({"dephasing", "depolarizing"}, {0.0, 0.5, 1.0},
                                                  default_observable());
    REQUIRE(rows.size() == 6);
    for (const auto& row : rows) {
        if (!row.feasible) continue;
        CHECK(row.cost_tc <= row.cost_qpd + 1e-8);
        if (row.eps == 0.0) CHECK(row.cost_tc == doctest::Approx(1.0).epsilon(1e-7));
    }
    // depolarizing at eps = 1 must be the flagged row
    bool saw_infeasible = false;
    for (const auto& row : rows)
        if (row.family == "depolarizing" && row.eps == 1.0) saw_infeasible = !row.feasible;
    CHECK(saw_infeasible);
}
