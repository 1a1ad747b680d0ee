#include <gtest/gtest.h>

#include <random>

#include "slocc/classify.hpp"

using namespace slocc;

namespace {

kronecker_structure ks_of(std::vector<int> cols, std::vector<int> rows,
                          std::vector<std::pair<cd, std::vector<int>>> finite,
                          std::vector<int> inf_sig = {}) {
    std::vector<eigenvalue_block> eigs;
    for (auto& [x, sig] : finite) eigs.push_back({eigenvalue_locus::finite(x), sig});
    if (!inf_sig.empty()) eigs.push_back({eigenvalue_locus::infinity(), inf_sig});
    return kronecker_structure(std::move(cols), std::move(rows), std::move(eigs));
}

state_tensor make_state(int m, int n, const std::vector<std::tuple<int, int, int, cd>>& entries) {
    Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(2 * m * n);
    for (const auto& [i, j, k, v] : entries) amps((i * m + j) * n + k) = v;
    return state_tensor(m, n, amps);
}

}  // namespace

TEST(Classify, DominantMultiplicityIsNullCone) {
    // 2x4x4 no. 10: diag multiplicities (3,1)
    const auto ks = ks_of({}, {}, {{cd{0, 0}, {1, 1, 1}}}, {1});
    EXPECT_EQ(classify(ks), orbit_type::null_cone);
}

TEST(Classify, EqualPairIsStrictlyPolystable) {
    // 2x4x4 no. 13: diagonal multiplicities (2,2)
    const auto ks = ks_of({}, {}, {{cd{0, 0}, {1, 1}}}, {1, 1});
    EXPECT_EQ(classify(ks), orbit_type::strictly_polystable);
}

TEST(Classify, EqualSplitIsStrictlySemistable) {
    // 2x4x4 no. 15: diagonal multiplicities (2,1,1)
    const auto ks = ks_of({}, {}, {{cd{0, 0}, {1, 1}}, {cd{1, 0}, {1}}}, {1});
    EXPECT_EQ(classify(ks), orbit_type::strictly_semistable);
}

TEST(Classify, AllDistinctIsStable) {
    // 2x4x4 no. 16 with x = 3
    const auto ks =
        ks_of({}, {}, {{cd{0, 0}, {1}}, {cd{1, 0}, {1}}, {cd{3, 0}, {1}}}, {1});
    EXPECT_EQ(classify(ks), orbit_type::stable);
}

TEST(Classify, NondiagonalAbovePolystableReduct) {
    // 2x5x5 no. 30: {0:[2], 1:[1,1], inf:[1]}; reduct (2,2,1) is polystable
    const auto ks = ks_of({}, {}, {{cd{0, 0}, {2}}, {cd{1, 0}, {1, 1}}}, {1});
    EXPECT_EQ(classify(ks), orbit_type::strictly_semistable);
}

TEST(Classify, LBlocksForceNullConeOnSquare) {
    EXPECT_EQ(classify(ks_of({1}, {1}, {{cd{0, 0}, {1}}})), orbit_type::null_cone);
    EXPECT_EQ(classify(ks_of({2}, {1}, {})), orbit_type::null_cone);
}

TEST(Classify, RectangularCases) {
    // n - m divides m and the pencil is the full L-sum: stable
    EXPECT_EQ(classify(ks_of({2}, {}, {})), orbit_type::stable);       // 2x2x3
    EXPECT_EQ(classify(ks_of({1, 1}, {}, {})), orbit_type::stable);    // 2x2x4
    EXPECT_EQ(classify(ks_of({2, 2}, {}, {})), orbit_type::stable);    // 2x4x6
    // anything else rectangular is in the null-cone
    EXPECT_EQ(classify(ks_of({1}, {}, {{cd{0, 0}, {1}}})), orbit_type::null_cone);
    EXPECT_EQ(classify(ks_of({1, 2}, {}, {})), orbit_type::null_cone);
    EXPECT_EQ(classify(ks_of({1, 1}, {}, {{cd{0, 0}, {1}}})), orbit_type::null_cone);
}

TEST(Classify, GhzIsStableAndWIsNullCone) {
    EXPECT_EQ(classify(ks_of({}, {}, {{cd{0, 0}, {1}}}, {1})), orbit_type::stable);
    EXPECT_EQ(classify(ks_of({}, {}, {{cd{0, 0}, {2}}})), orbit_type::null_cone);
}

TEST(Classify, BiseparableDiagonalRejected) {
    EXPECT_THROW(classify(ks_of({}, {}, {{cd{0, 0}, {1, 1}}})), not_fully_entangled);
}

TEST(Classify, InvariantUnderMoebius) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 1.0);
    const std::vector<kronecker_structure> cases = {
        ks_of({}, {}, {{cd{0, 0}, {1, 1}}}, {1, 1}),
        ks_of({}, {}, {{cd{0, 0}, {2}}, {cd{1, 0}, {1}}}, {1}),
        ks_of({}, {}, {{cd{0, 0}, {1}}, {cd{1, 0}, {1}}, {cd{2, 0}, {1}}}, {1}),
        ks_of({}, {}, {{cd{0, 0}, {1, 1, 1}}}, {1}),
    };
    for (const auto& ks : cases) {
        const orbit_type base = classify(ks);
        for (int trial = 0; trial < 8; ++trial) {
            cmat2 A;
            A << cd{g(rng), g(rng)}, cd{g(rng), g(rng)}, cd{g(rng), g(rng)}, cd{g(rng), g(rng)};
            if (std::abs(A.determinant()) < 0.1) continue;
            EXPECT_EQ(classify(moebius_on_kcf(ks, A)), base);
        }
    }
}

TEST(StabilizerDim, FormulaValues) {
    EXPECT_EQ(stabilizer_dim_diagonal({1, 1}), 2);        // GHZ
    EXPECT_EQ(stabilizer_dim_diagonal({1, 1, 1, 1}), 3);  // orbit dim 30 in 2x4x4
    EXPECT_EQ(stabilizer_dim_diagonal({2, 2}), 8);
    EXPECT_THROW(stabilizer_dim_diagonal({4}), precondition_violated);
}

TEST(OrbitDim, HeaderValues) {
    EXPECT_EQ(orbit_dim_diagonal({1, 1}, 2, 2), 7);
    EXPECT_EQ(orbit_dim_diagonal({1, 1, 1}, 3, 3), 17);
    EXPECT_EQ(orbit_dim_diagonal({1, 1, 1, 1}, 4, 4), 30);
    EXPECT_EQ(orbit_dim_diagonal({1, 1, 1, 1, 1}, 5, 5), 47);
    EXPECT_EQ(orbit_dim_diagonal({2, 2}, 4, 4), 25);
}

TEST(CriticalExists, GcdFormula) {
    const auto no235 = critical_exists({2, 3, 5});
    EXPECT_FALSE(no235.exists);
    EXPECT_EQ(no235.lhs, -6);

    EXPECT_TRUE(critical_exists({2, 2, 2}).exists);

    // agreement with the divisibility criterion for 2 x m x n
    for (int m = 2; m <= 12; ++m)
        for (int n = m; n <= 12; ++n) {
            const bool expected = (m == n) || (m % (n - m) == 0);
            EXPECT_EQ(critical_exists({2, m, n}).exists, expected) << m << "x" << n;
        }
}

TEST(StrictlySemistableExists, Criterion) {
    EXPECT_FALSE(strictly_semistable_exists(3, 3));
    EXPECT_TRUE(strictly_semistable_exists(4, 4));
    EXPECT_FALSE(strictly_semistable_exists(4, 5));
    EXPECT_FALSE(strictly_semistable_exists(2, 2));
    EXPECT_TRUE(strictly_semistable_exists(5, 5));
}

TEST(PolystableLimit, TableAnnotations) {
    // 2x4x4 no. 15 -> multiplicities (2,2)
    const auto r15 = ks_of({}, {}, {{cd{0, 0}, {1, 1}}, {cd{1, 0}, {1}}}, {1});
    const auto lim15 = polystable_limit(r15);
    EXPECT_EQ(lim15.multiplicities(), (std::vector<int>{2, 2}));
    const auto r13 = ks_of({}, {}, {{cd{0, 0}, {1, 1}}}, {1, 1});
    EXPECT_TRUE(moebius_equivalent(lim15, r13));

    // 2x4x4 no. 11 (nondiagonal) -> no. 13
    const auto r11 = ks_of({}, {}, {{cd{0, 0}, {2}}}, {2});
    EXPECT_TRUE(moebius_equivalent(polystable_limit(r11), r13));

    // 2x5x5 no. 29 -> no. 31 (multiplicities (2,2,1) diagonal)
    const auto r29 = ks_of({}, {}, {{cd{0, 0}, {2}}, {cd{1, 0}, {2}}}, {1});
    const auto r31 = ks_of({}, {}, {{cd{0, 0}, {1, 1}}, {cd{1, 0}, {1, 1}}}, {1});
    EXPECT_TRUE(moebius_equivalent(polystable_limit(r29), r31));

    EXPECT_THROW(polystable_limit(r13), precondition_violated);
}

TEST(PolystableLimit, OutputIsPolystableWithSmallerOrbit) {
    const std::vector<kronecker_structure> sss = {
        ks_of({}, {}, {{cd{0, 0}, {2}}}, {2}),                          // 4x4 no. 11
        ks_of({}, {}, {{cd{0, 0}, {2}}}, {1, 1}),                       // 4x4 no. 12
        ks_of({}, {}, {{cd{0, 0}, {2}}, {cd{1, 0}, {1}}}, {1}),         // 4x4 no. 14
        ks_of({}, {}, {{cd{0, 0}, {1, 1}}, {cd{1, 0}, {1}}}, {1}),      // 4x4 no. 15
        ks_of({}, {}, {{cd{0, 0}, {2}}, {cd{1, 0}, {2}}}, {1}),         // 5x5 no. 29
        ks_of({}, {}, {{cd{0, 0}, {2}}, {cd{1, 0}, {1, 1}}}, {1}),      // 5x5 no. 30
        ks_of({}, {}, {{cd{0, 0}, {2}}, {cd{1, 0}, {1}}, {cd{2, 0}, {1}}}, {1}),
        ks_of({}, {}, {{cd{0, 0}, {1, 1, 1}}, {cd{1, 0}, {1, 1}}, {cd{2, 0}, {1}}}),  // 6x6
    };
    for (const auto& ks : sss) {
        ASSERT_EQ(classify(ks), orbit_type::strictly_semistable);
        const auto lim = polystable_limit(ks);
        EXPECT_TRUE(is_polystable(classify(lim)));
        // orbit dimension strictly drops into the closure
        const int lim_dim = orbit_dim_diagonal(lim.multiplicities(), lim.m(), lim.n());
        if (ks.is_diagonal()) {
            const int ks_dim = orbit_dim_diagonal(ks.multiplicities(), ks.m(), ks.n());
            EXPECT_LT(lim_dim, ks_dim);
        } else {
            EXPECT_LT(lim_dim, dim_sl_group(ks.m(), ks.n()));
        }
    }
}

TEST(ClassifyState, GhzWReportExamples) {
    const double c2 = 1.0 / std::sqrt(2.0);
    const auto ghz = make_state(2, 2, {{0, 0, 0, c2}, {1, 1, 1, c2}});
    const auto rep = classify_state(ghz);
    EXPECT_EQ(rep.type, orbit_type::stable);
    ASSERT_TRUE(rep.orbit_dim.has_value());
    EXPECT_EQ(*rep.orbit_dim, 7);
    ASSERT_TRUE(rep.stab_dim.has_value());
    EXPECT_EQ(*rep.stab_dim, 2);

    const double c3 = 1.0 / std::sqrt(3.0);
    const auto w = make_state(2, 2, {{1, 0, 0, c3}, {0, 1, 0, c3}, {0, 0, 1, c3}});
    EXPECT_EQ(classify_state(w).type, orbit_type::null_cone);
}

TEST(ClassifyState, PsiSssHasLimitClass) {
    // (1/sqrt(5)) |0>(|01>+|22>+|33>) + (1/sqrt(5)) |1>(|00>+|11>)
    const double c = 1.0 / std::sqrt(5.0);
    const auto psi = make_state(4, 4,
                                {{0, 0, 1, c}, {0, 2, 2, c}, {0, 3, 3, c}, {1, 0, 0, c}, {1, 1, 1, c}});
    const auto rep = classify_state(psi);
    EXPECT_EQ(rep.type, orbit_type::strictly_semistable);
    ASSERT_TRUE(rep.limit_class.has_value());
    EXPECT_EQ(rep.limit_class->multiplicities(), (std::vector<int>{2, 2}));
}

TEST(ClassifyState, InvariantUnderRandomSlocOperators) {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> g(0.0, 1.0);
    auto rand_sl = [&](int d) {
        for (;;) {
            cmat M(d, d);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) M(i, j) = cd{g(rng), g(rng)};
            const cd det = M.determinant();
            if (std::abs(det) < 1e-2) continue;
            M /= std::pow(det, 1.0 / d);
            Eigen::JacobiSVD<cmat> svd(M);
            if (svd.singularValues()(0) / svd.singularValues()(d - 1) > 20) continue;
            return M;
        }
    };
    const std::vector<std::pair<kronecker_structure, orbit_type>> rows = {
        {ks_of({}, {}, {{cd{0, 0}, {2}}}), orbit_type::null_cone},
        {ks_of({}, {}, {{cd{0, 0}, {1}}}, {1}), orbit_type::stable},
        {ks_of({1}, {1}, {{cd{0, 0}, {1}}}), orbit_type::null_cone},
        {ks_of({}, {}, {{cd{0, 0}, {1, 1}}}, {1, 1}), orbit_type::strictly_polystable},
        {ks_of({}, {}, {{cd{0, 0}, {2}}, {cd{1, 0}, {1}}}, {1}), orbit_type::strictly_semistable},
        {ks_of({2}, {}, {}), orbit_type::stable},
        {ks_of({}, {}, {{cd{0, 0}, {2}}, {cd{1, 0}, {2}}}, {1}), orbit_type::strictly_semistable},
    };
    for (const auto& [ks, type] : rows) {
        const auto rep = representative_state(ks);
        for (int trial = 0; trial < 20; ++trial) {
            const cmat A2 = rand_sl(2);
            cmat2 A;
            A << A2(0, 0), A2(0, 1), A2(1, 0), A2(1, 1);
            const auto moved = apply_local(
                rep, local_operator_triple(A, rand_sl(ks.m()), rand_sl(ks.n())));
            EXPECT_EQ(classify_state(moved).type, type)
                << "m=" << ks.m() << " n=" << ks.n() << " trial=" << trial;
        }
    }
}

TEST(ClassifyState, NotFullyEntangledThrows) {
    const double c = 1.0 / std::sqrt(2.0);
    const auto product = make_state(2, 2, {{0, 0, 0, c}, {0, 1, 1, c}});
    EXPECT_THROW(classify_state(product), not_fully_entangled);
}

TEST(ReportForStructure, StabPlusOrbitIsGroupDim) {
    const auto ks = ks_of({}, {}, {{cd{0, 0}, {1, 1}}}, {1, 1});
    const auto rep = report_for_structure(ks);
    ASSERT_TRUE(rep.stab_dim && rep.orbit_dim);
    EXPECT_EQ(*rep.stab_dim + *rep.orbit_dim, dim_sl_group(4, 4));
}

TEST(ReportForStructure, BiseparableReductFlag) {
    const auto w_class = ks_of({}, {}, {{cd{0, 0}, {2}}});
    EXPECT_TRUE(report_for_structure(w_class).biseparable_reduct);
    const auto r10 = ks_of({}, {}, {{cd{0, 0}, {1, 1, 1}}}, {1});
    EXPECT_FALSE(report_for_structure(r10).biseparable_reduct);
}
