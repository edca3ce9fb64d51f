#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <hpsim/cost.hpp>
#include <hpsim/decompose.hpp>
#include <hpsim/simulate.hpp>

#include <cmath>

using namespace hpsim;

namespace {

MapRep transpose_map() {
    CMatrix j(4, 4);
    j.at(0, 0) = 1.0;
    j.at(1, 2) = 1.0;
    j.at(2, 1) = 1.0;
    j.at(3, 3) = 1.0;
    return MapRep{2, 2, j};
}

/// Parity-sign twisted channel built by hand: project onto |0>/|1> and
/// flip the sign of the odd branch.
TwistedChannel parity_twisted() {
    CMatrix p0(2, 2), p1(2, 2);
    p0.at(0, 0) = 1.0;
    p1.at(1, 1) = 1.0;
    TwistedChannel t;
    t.dim_in = 2;
    t.dim_out = 2;
    t.scale = 1.0;
    t.branches.push_back({+1, {2, 2, {p0}}});
    t.branches.push_back({-1, {2, 2, {p1}}});
    return t;
}

CMatrix plus_state() {
    CMatrix rho(2, 2);
    rho.at(0, 0) = 0.5;
    rho.at(0, 1) = 0.5;
    rho.at(1, 0) = 0.5;
    rho.at(1, 1) = 0.5;
    return rho;
}

CMatrix mixed_state() {
    CMatrix rho(2, 2);
    rho.at(0, 0) = 0.7;
    rho.at(0, 1) = cplx(0.1, 0.2);
    rho.at(1, 0) = cplx(0.1, -0.2);
    rho.at(1, 1) = 0.3;
    return rho;
}

}  // namespace

TEST_CASE("plan_shots reproduces the Hoeffding fixture") {
    ShotPlan p1 = plan_shots(0.05, 0.1, pauli_z(), 1.0);
    CHECK(p1.obs_norm == doctest::Approx(1.0));
    CHECK(p1.k_factor == doctest::Approx(2.0 * std::log(40.0) / 0.01));
    CHECK(p1.shots == 738);

    ShotPlan p2 = plan_shots(0.05, 0.1, pauli_z(), 2.0);
    CHECK(p2.shots == 2952);

    // larger overhead / observable norm never shrinks the budget
    ShotPlan p3 = plan_shots(0.05, 0.1, 2.0 * pauli_z(), 1.0);
    CHECK(p3.shots >= 4 * p1.shots - 4);
    CHECK(plan_shots(0.5, 10.0, pauli_z(), 0.0).shots == 1);
}

TEST_CASE("plan_shots rejects out-of-range parameters") {
    CMatrix z = pauli_z();
    CHECK_THROWS_AS(plan_shots(0.0, 0.1, z, 1.0), ParamOutOfRange);
    CHECK_THROWS_AS(plan_shots(1.0, 0.1, z, 1.0), ParamOutOfRange);
    CHECK_THROWS_AS(plan_shots(0.1, 0.0, z, 1.0), ParamOutOfRange);
    CHECK_THROWS_AS(plan_shots(0.1, 0.1, z, -0.5), ParamOutOfRange);
}

TEST_CASE("parity-sign MCPP has zero variance and exact mean") {
    TwistedChannel t = parity_twisted();
    EstimateResult r = run_mcpp(t, mixed_state(), pauli_z(), 2000, 7, true);
    CHECK(r.mean == doctest::Approx(t.scale).epsilon(1e-14));
    CHECK(r.variance == 0.0);
    CHECK(r.shots == 2000);
    REQUIRE(r.trace.size() == 2000);
    for (const auto& rec : r.trace) CHECK(rec.weighted_value == doctest::Approx(1.0));
}

TEST_CASE("MCPP estimate is unbiased for a twisted transpose") {
    MapRep e = transpose_map();
    TwistedChannel t = hp_to_twisted(e);
    REQUIRE(twisted_channel_valid(t, e));
    CMatrix rho = mixed_state();
    CMatrix obs = pauli_x() + pauli_z();
    double exact = exact_expectation(e, rho, obs);
    EstimateResult r = run_mcpp(t, rho, obs, 100000, 42);
    double se = std::sqrt(r.variance / static_cast<double>(r.shots));
    CHECK(std::abs(r.mean - exact) <= 5.0 * se + 1e-12);
}

TEST_CASE("QPD estimate is unbiased for the transpose map") {
    MapRep e = transpose_map();
    GammaQpdResult c = gamma_qpd(e);
    QpdDecomposition q =
        qpd_from_certificate(e, c.m_plus, c.m_minus, c.weight_plus, c.weight_minus);
    REQUIRE(qpd_valid(q, e));
    CHECK(q.gamma() == doctest::Approx(2.0).epsilon(1e-6));
    CMatrix rho = plus_state();
    CMatrix obs = pauli_x();
    double exact = exact_expectation(e, rho, obs);
    EstimateResult r = run_qpd(q, rho, obs, 100000, 13);
    double se = std::sqrt(r.variance / static_cast<double>(r.shots));
    CHECK(std::abs(r.mean - exact) <= 5.0 * se + 1e-12);
}

TEST_CASE("both protocols are byte-identically deterministic per seed") {
    MapRep e = transpose_map();
    TwistedChannel t = hp_to_twisted(e);
    CMatrix rho = mixed_state();
    CMatrix obs = pauli_z();

    EstimateResult a = run_mcpp(t, rho, obs, 5000, 99, true);
    EstimateResult b = run_mcpp(t, rho, obs, 5000, 99, true);
    CHECK(a.mean == b.mean);
    CHECK(a.variance == b.variance);
    REQUIRE(a.trace.size() == b.trace.size());
    for (size_t i = 0; i < a.trace.size(); ++i) {
        CHECK(a.trace[i].branch == b.trace[i].branch);
        CHECK(a.trace[i].weighted_value == b.trace[i].weighted_value);
    }

    EstimateResult c = run_mcpp(t, rho, obs, 5000, 100);
    CHECK(c.mean != a.mean);  // different seed, different stream
}

TEST_CASE("QPD failure events are recorded with branch -1 and value 0") {
    // single-term QPD whose map is a strict contraction: K = 0.5 I
    QpdDecomposition q;
    q.dim_in = 2;
    q.dim_out = 2;
    CMatrix k = 0.5 * CMatrix::identity(2);
    q.terms.push_back({1.0, {2, 2, {k}}});
    CMatrix rho = 0.5 * CMatrix::identity(2);
    EstimateResult r = run_qpd(q, rho, CMatrix::identity(2), 4000, 3, true);
    long long failures = 0;
    for (const auto& rec : r.trace)
        if (rec.branch == -1) {
            ++failures;
            CHECK(rec.weighted_value == 0.0);
        }
    // success probability is 0.25, so failures dominate
    CHECK(failures > 2000);
    CHECK(r.mean == doctest::Approx(0.25).epsilon(0.15));
}

TEST_CASE("input validation for the samplers") {
    TwistedChannel t = parity_twisted();
    CMatrix rho = mixed_state();
    CMatrix z = pauli_z();

    CMatrix not_unit = CMatrix::identity(2);  // trace 2
    CHECK_THROWS_AS(run_mcpp(t, not_unit, z, 10, 1), NotDensityMatrix);

    CMatrix neg(2, 2);
    neg.at(0, 0) = 1.5;
    neg.at(1, 1) = -0.5;
    CHECK_THROWS_AS(run_mcpp(t, neg, z, 10, 1), NotDensityMatrix);

    CMatrix rho3 = (1.0 / 3.0) * CMatrix::identity(3);
    CHECK_THROWS_AS(run_mcpp(t, rho3, z, 10, 1), DimensionMismatch);
    CHECK_THROWS_AS(run_mcpp(t, rho, CMatrix::identity(3), 10, 1), DimensionMismatch);

    QpdDecomposition q;
    q.dim_in = 2;
    q.dim_out = 2;
    q.terms.push_back({1.0, {2, 2, {CMatrix::identity(2)}}});
    CHECK_THROWS_AS(run_qpd(q, rho3, z, 10, 1), DimensionMismatch);
}

TEST_CASE("MCPP rejects incomplete instruments") {
    TwistedChannel t = parity_twisted();
    t.branches.pop_back();  // only the |0> branch survives
    CHECK_THROWS_AS(run_mcpp(t, mixed_state(), pauli_z(), 10, 1), IncompleteInstrument);
}

TEST_CASE("exact_expectation matches a direct Choi contraction") {
    MapRep e = transpose_map();
    CMatrix rho = mixed_state();
    CMatrix obs = pauli_x() + pauli_z();
    CMatrix out = apply(e, rho);
    double direct = hs_inner(obs, out).real();
    CHECK(exact_expectation(e, rho, obs) == doctest::Approx(direct).epsilon(1e-12));
}
