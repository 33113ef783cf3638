#include "hyperdistill/qnd.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <tuple>

using namespace hyperdistill;

namespace {

const double kR = 1.0 / std::sqrt(2.0);
constexpr auto S = QndOutcome::Shift;
constexpr auto N = QndOutcome::NoShift;

using Row = std::tuple<double, Pol, Pol, InternalPath, InternalPath, int, int>;

void expect_table(const BranchTable& t, const std::array<Row, 4>& rows) {
    for (std::size_t i = 0; i < 4; ++i) {
        const auto& b = t.branches[i];
        const auto& [amp, pa, pb, ma, mb, qa, qb] = rows[i];
        EXPECT_NEAR(b.amplitude.real(), amp, 1e-15) << "branch " << i;
        EXPECT_NEAR(b.amplitude.imag(), 0.0, 1e-15) << "branch " << i;
        EXPECT_EQ(b.pol_a, pa) << "branch " << i;
        EXPECT_EQ(b.pol_b, pb) << "branch " << i;
        EXPECT_EQ(b.path_a, ma) << "branch " << i;
        EXPECT_EQ(b.path_b, mb) << "branch " << i;
        EXPECT_EQ(b.quantum_a, qa) << "branch " << i;
        EXPECT_EQ(b.quantum_b, qb) << "branch " << i;
    }
}

constexpr auto P3 = InternalPath::First;
constexpr auto P4 = InternalPath::Second;

HyperComponent comp(PolarizationBell k, SpatialSign s = SpatialSign::Plus) { return {k, s, 1.0}; }

}  // namespace

TEST(BranchTable, PhiPlusMatchesJointEvolution) {
    expect_table(build_branch_table(comp(PolarizationBell::PhiPlus)),
                 {Row{0.5, Pol::H, Pol::H, P3, P3, +1, +1}, Row{0.5, Pol::V, Pol::V, P3, P3, 0, 0},
                  Row{0.5, Pol::H, Pol::H, P4, P4, 0, 0}, Row{0.5, Pol::V, Pol::V, P4, P4, -1, -1}});
}

TEST(BranchTable, PsiPlusMatchesJointEvolution) {
    expect_table(build_branch_table(comp(PolarizationBell::PsiPlus)),
                 {Row{0.5, Pol::H, Pol::V, P3, P3, +1, 0}, Row{0.5, Pol::V, Pol::H, P3, P3, 0, +1},
                  Row{0.5, Pol::H, Pol::V, P4, P4, 0, -1}, Row{0.5, Pol::V, Pol::H, P4, P4, -1, 0}});
}

TEST(BranchTable, PhiMinusCarriesBellSigns) {
    expect_table(build_branch_table(comp(PolarizationBell::PhiMinus)),
                 {Row{0.5, Pol::H, Pol::H, P3, P3, +1, +1}, Row{-0.5, Pol::V, Pol::V, P3, P3, 0, 0},
                  Row{0.5, Pol::H, Pol::H, P4, P4, 0, 0}, Row{-0.5, Pol::V, Pol::V, P4, P4, -1, -1}});
}

TEST(BranchTable, DephasedSpatialNegatesSecondPathBranches) {
    expect_table(build_branch_table(comp(PolarizationBell::PhiPlus, SpatialSign::Minus)),
                 {Row{0.5, Pol::H, Pol::H, P3, P3, +1, +1}, Row{0.5, Pol::V, Pol::V, P3, P3, 0, 0},
                  Row{-0.5, Pol::H, Pol::H, P4, P4, 0, 0}, Row{-0.5, Pol::V, Pol::V, P4, P4, -1, -1}});
}

TEST(BranchTable, UnitWeightForAllComponents) {
    for (auto k : kAllBell)
        for (auto s : {SpatialSign::Plus, SpatialSign::Minus})
            EXPECT_NEAR(build_branch_table(comp(k, s)).total_weight(), 1.0, 1e-12);
}

TEST(OutcomeDistribution, PhiTablesAlwaysAgree) {
    for (auto k : {PolarizationBell::PhiPlus, PolarizationBell::PhiMinus}) {
        auto d = outcome_distribution(build_branch_table(comp(k)));
        EXPECT_NEAR(d.at(OutcomePair(S, S)), 0.5, 1e-15);
        EXPECT_NEAR(d.at(OutcomePair(N, N)), 0.5, 1e-15);
        EXPECT_EQ(d.at(OutcomePair(S, N)), 0.0);
        EXPECT_EQ(d.at(OutcomePair(N, S)), 0.0);
    }
}

TEST(OutcomeDistribution, PsiTablesAlwaysDisagree) {
    for (auto k : {PolarizationBell::PsiPlus, PolarizationBell::PsiMinus}) {
        auto d = outcome_distribution(build_branch_table(comp(k)));
        EXPECT_NEAR(d.at(OutcomePair(S, N)), 0.5, 1e-15);
        EXPECT_NEAR(d.at(OutcomePair(N, S)), 0.5, 1e-15);
        EXPECT_EQ(d.at(OutcomePair(S, S)), 0.0);
        EXPECT_EQ(d.at(OutcomePair(N, N)), 0.0);
    }
}

TEST(OutcomeDistribution, SumsToOne) {
    for (auto k : kAllBell)
        for (auto s : {SpatialSign::Plus, SpatialSign::Minus}) {
            double total = 0.0;
            for (const auto& [o, p] : outcome_distribution(build_branch_table(comp(k, s)))) total += p;
            EXPECT_NEAR(total, 1.0, 1e-12);
        }
}

TEST(OutcomeDistribution, EnsembleAgreementIsFPlusF1) {
    RandomStream rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        std::array<double, 4> w{};
        double s = 0.0;
        for (auto& x : w) s += (x = rng.uniform());
        auto fv = FidelityVector::normalized(w[0] / s, w[1] / s, w[2] / s, w[3] / s);
        EXPECT_NEAR(analytic_same_probability(fv), fv.f() + fv.f1(), 1e-12);
        EXPECT_NEAR(analytic_same_probability(fv, SpatialSign::Minus), fv.f() + fv.f1(), 1e-12);
    }
}

TEST(Conditional, PostSelectedStates) {
    // enumerate branches by hand: (S,S) of Phi+ keeps H a3 H b3 and V a4 V b4, both +1/2
    auto c = condition_on(build_branch_table(comp(PolarizationBell::PhiPlus)), {S, S});
    ASSERT_TRUE(c.pol_state);
    EXPECT_NEAR(c.probability, 0.5, 1e-15);
    EXPECT_NEAR(oracles::overlap2({kR, 0, 0, kR}, {c.pol_state->amplitudes().begin(), c.pol_state->amplitudes().end()}),
                1.0, 1e-12);

    // (S,N) of Psi+ keeps H a3 V b3 and V a4 H b4
    c = condition_on(build_branch_table(comp(PolarizationBell::PsiPlus)), {S, N});
    ASSERT_TRUE(c.pol_state);
    EXPECT_NEAR((*c.pol_state)[1].real(), kR, 1e-15);
    EXPECT_NEAR((*c.pol_state)[2].real(), kR, 1e-15);

    // Phi- keeps its relative minus sign
    c = condition_on(build_branch_table(comp(PolarizationBell::PhiMinus)), {S, S});
    EXPECT_NEAR((*c.pol_state)[0].real(), kR, 1e-15);
    EXPECT_NEAR((*c.pol_state)[3].real(), -kR, 1e-15);
    c = condition_on(build_branch_table(comp(PolarizationBell::PhiMinus)), {N, N});
    EXPECT_NEAR((*c.pol_state)[0].real(), kR, 1e-15);
    EXPECT_NEAR((*c.pol_state)[3].real(), -kR, 1e-15);

    // impossible outcome has no state
    c = condition_on(build_branch_table(comp(PolarizationBell::PhiPlus)), {S, N});
    EXPECT_FALSE(c.pol_state);
    EXPECT_EQ(c.probability, 0.0);
}

TEST(MeasureProbes, SameOutcomesRouteTogether) {
    RandomStream rng(1);
    DeviceParams params;
    const auto table = build_branch_table(comp(PolarizationBell::PhiPlus));
    bool saw_shift = false, saw_noshift = false;
    for (int i = 0; i < 200; ++i) {
        auto pair = measure_probes(table, params, rng);
        EXPECT_EQ(pair.outcome_a, pair.outcome_b);
        EXPECT_NEAR(pair.probability, 0.5, 1e-15);
        if (pair.outcome_a == S) {
            saw_shift = true;
            EXPECT_EQ(pair.mode_a, OutputMode::Lower);
            EXPECT_EQ(pair.mode_b, OutputMode::Lower);
            EXPECT_EQ(mode_name(pair.mode_a, true), "a6");
            EXPECT_EQ(mode_name(pair.mode_b, false), "b6");
        } else {
            saw_noshift = true;
            EXPECT_EQ(mode_name(pair.mode_a, true), "a5");
            EXPECT_EQ(mode_name(pair.mode_b, false), "b5");
        }
        EXPECT_NEAR(fidelity(DensityMatrix::pure(pair.pol_state), bell_vector(PolarizationBell::PhiPlus)), 1.0, 1e-12);
    }
    EXPECT_TRUE(saw_shift && saw_noshift);
}

TEST(MeasureProbes, DifferentOutcomesRouteApart) {
    RandomStream rng(2);
    const auto table = build_branch_table(comp(PolarizationBell::PsiPlus));
    for (int i = 0; i < 200; ++i) {
        auto pair = measure_probes(table, DeviceParams{}, rng);
        EXPECT_NE(pair.outcome_a, pair.outcome_b);
        if (pair.outcome_a == S) {
            EXPECT_EQ(mode_name(pair.mode_a, true), "a6");
            EXPECT_EQ(mode_name(pair.mode_b, false), "b5");
        }
        EXPECT_NEAR(fidelity(DensityMatrix::pure(pair.pol_state), bell_vector(PolarizationBell::PsiPlus)), 1.0, 1e-12);
    }
}

TEST(MeasureProbes, BellClassPreservedAndRoutingInvariant) {
    RandomStream rng(3);
    for (auto k : kAllBell)
        for (auto s : {SpatialSign::Plus, SpatialSign::Minus}) {
            const auto table = build_branch_table(comp(k, s));
            for (int i = 0; i < 100; ++i) {
                auto pair = measure_probes(table, DeviceParams{}, rng);
                EXPECT_NEAR(pair.pol_state.squared_norm(), 1.0, 1e-12);
                const auto& v = pair.pol_state;
                if (is_phi_type(k)) {
                    EXPECT_LT(std::abs(v[1]) + std::abs(v[2]), 1e-12);
                } else {
                    EXPECT_LT(std::abs(v[0]) + std::abs(v[3]), 1e-12);
                }
                EXPECT_EQ(pair.outcome_a == N, pair.mode_a == OutputMode::Upper);
                EXPECT_EQ(pair.outcome_b == N, pair.mode_b == OutputMode::Upper);
            }
        }
}

TEST(MeasureProbes, DeterministicUnderSeed) {
    const auto table = build_branch_table(comp(PolarizationBell::PsiMinus, SpatialSign::Minus));
    RandomStream a(55), b(55);
    for (int i = 0; i < 100; ++i) {
        auto x = measure_probes(table, DeviceParams{}, a);
        auto y = measure_probes(table, DeviceParams{}, b);
        EXPECT_EQ(x.recorded(), y.recorded());
        for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(x.pol_state[j], y.pol_state[j]);
    }
}

TEST(MeasureProbes, HomodyneErrorFlipsRecordNotState) {
    RandomStream rng(4);
    DeviceParams params;
    params.homodyne_error = 0.25;
    const auto table = build_branch_table(comp(PolarizationBell::PhiPlus));
    const std::size_t n = 10000;
    std::size_t flipped_a = 0;
    for (std::size_t i = 0; i < n; ++i) {
        auto pair = measure_probes(table, params, rng);
        flipped_a += pair.outcome_a != pair.projected.a;
        EXPECT_EQ(pair.outcome_a == N, pair.mode_a == OutputMode::Upper);
        EXPECT_NEAR(fidelity(DensityMatrix::pure(pair.pol_state), bell_vector(PolarizationBell::PhiPlus)), 1.0, 1e-12);
    }
    EXPECT_LE(std::abs(static_cast<double>(flipped_a) / n - 0.25), 3 * oracles::binomial_sigma(0.25, n));
}

TEST(DeviceParams, Validation) {
    EXPECT_NO_THROW(DeviceParams{}.validate());
    EXPECT_THROW((DeviceParams{0.0, 1.0, 0.0}.validate()), std::invalid_argument);
    EXPECT_THROW((DeviceParams{4.0, 1.0, 0.0}.validate()), std::invalid_argument);
    EXPECT_THROW((DeviceParams{1.0, -1.0, 0.0}.validate()), std::invalid_argument);
    EXPECT_THROW((DeviceParams{1.0, 1.0, 0.5}.validate()), std::invalid_argument);
    EXPECT_NO_THROW((DeviceParams{std::numbers::pi, 1.0, 0.49}.validate()));
}
