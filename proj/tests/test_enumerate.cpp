#include <gtest/gtest.h>

#include <json.hpp>
#include <set>

#include "slocc/enumerate.hpp"
#include "slocc/kcf.hpp"

using namespace slocc;

TEST(EnumerateClasses, FamilyCountsMatchTheTables) {
    struct expected {
        int m, n, count;
    };
    const std::vector<expected> cases = {{2, 2, 2}, {2, 3, 2}, {2, 4, 1},
                                         {3, 3, 6}, {3, 4, 5}, {3, 5, 2},
                                         {4, 4, 16}, {4, 5, 12}, {5, 5, 34}};
    for (const auto& c : cases)
        EXPECT_EQ(enumerate_classes(c.m, c.n).size(), static_cast<std::size_t>(c.count))
            << c.m << "x" << c.n;
}

TEST(EnumerateClasses, TypeBreakdownFor44And55) {
    auto breakdown = [](int m, int n) {
        std::map<orbit_type, int> counts;
        for (const auto& fam : enumerate_classes(m, n)) counts[fam.type()]++;
        return counts;
    };
    auto b44 = breakdown(4, 4);
    EXPECT_EQ(b44[orbit_type::null_cone], 10);
    EXPECT_EQ(b44[orbit_type::strictly_semistable], 4);
    EXPECT_EQ(b44[orbit_type::strictly_polystable], 1);
    EXPECT_EQ(b44[orbit_type::stable], 1);
    auto b55 = breakdown(5, 5);
    EXPECT_EQ(b55[orbit_type::null_cone], 28);
    EXPECT_EQ(b55[orbit_type::strictly_semistable], 3);
    EXPECT_EQ(b55[orbit_type::strictly_polystable], 2);
    EXPECT_EQ(b55[orbit_type::stable], 1);
}

TEST(EnumerateClasses, NoTwoFamiliesAreEquivalent) {
    for (const auto [m, n] : {std::pair{3, 3}, std::pair{4, 4}, std::pair{3, 5}}) {
        const auto families = enumerate_classes(m, n);
        std::vector<kronecker_structure> reps;
        for (const auto& fam : families) reps.push_back(fam.instantiate(fam.default_params()));
        for (std::size_t i = 0; i < reps.size(); ++i)
            for (std::size_t j = i + 1; j < reps.size(); ++j)
                EXPECT_FALSE(moebius_equivalent(reps[i], reps[j]))
                    << m << "x" << n << " rows " << i + 1 << "," << j + 1;
    }
}

TEST(EnumerateClasses, RepresentativesSurviveTheFullPipeline) {
    for (const auto [m, n] : {std::pair{2, 2}, std::pair{2, 3}, std::pair{3, 3},
                              std::pair{4, 4}, std::pair{2, 4}}) {
        for (const auto& fam : enumerate_classes(m, n)) {
            const auto params = fam.default_params();
            const auto ks = fam.instantiate(params);
            const auto state = fam.representative(params);
            const auto recovered = compute_kcf(pencil_from_state(state), 1e-9);
            EXPECT_TRUE(same_structure(recovered, ks, 1e-8));
            EXPECT_EQ(classify(recovered), fam.type());
        }
    }
}

TEST(EnumerateClasses, SemistableExistenceMatchesTheCriterion) {
    for (int m = 2; m <= 6; ++m)
        for (int n = m; n <= 6; ++n) {
            const auto families = enumerate_classes(m, n);
            const bool any_sss =
                std::any_of(families.begin(), families.end(), [](const class_family& f) {
                    return f.type() == orbit_type::strictly_semistable;
                });
            EXPECT_EQ(any_sss, strictly_semistable_exists(m, n)) << m << "x" << n;
        }
}

TEST(EnumerateClasses, OrderingIsByTypeGroup) {
    const auto families = enumerate_classes(4, 4);
    int last_group = -1;
    auto group = [](orbit_type t) {
        switch (t) {
            case orbit_type::null_cone: return 0;
            case orbit_type::strictly_semistable: return 1;
            case orbit_type::strictly_polystable: return 2;
            case orbit_type::stable: return 3;
        }
        return 4;
    };
    for (const auto& fam : families) {
        EXPECT_GE(group(fam.type()), last_group);
        last_group = std::max(last_group, group(fam.type()));
    }
}

TEST(EnumerateClasses, ParameterValidation) {
    const auto families = enumerate_classes(4, 4);
    const auto stable = std::find_if(families.begin(), families.end(), [](const class_family& f) {
        return f.type() == orbit_type::stable;
    });
    ASSERT_NE(stable, families.end());
    ASSERT_EQ(stable->num_params(), 1);
    EXPECT_THROW(stable->instantiate({cd{1.0, 0.0}}), precondition_violated);  // collides with anchor
    EXPECT_NO_THROW(stable->instantiate({cd{-2.0, 0.0}}));
    EXPECT_FALSE(stable->constraints().empty());
}

TEST(VerifyMainTheorem, ConsistentForSmallSquares) {
    for (int n = 2; n <= 6; ++n) {
        const auto rep = verify_main_theorem(n, n);
        EXPECT_TRUE(rep.consistent) << n;
        EXPECT_EQ(rep.sss_exists, n >= 4) << n;
    }
    // 3x3: one polystable family of dimension 17
    const auto r33 = verify_main_theorem(3, 3);
    EXPECT_EQ(r33.polystable_dims, (std::vector<int>{17}));
    EXPECT_TRUE(r33.dims_all_equal);
    // 4x4: dimensions 30 and 25 disagree, matching the semistable families
    const auto r44 = verify_main_theorem(4, 4);
    EXPECT_FALSE(r44.dims_all_equal);
    std::multiset<int> dims(r44.polystable_dims.begin(), r44.polystable_dims.end());
    EXPECT_TRUE(dims.count(30) == 1 && dims.count(25) == 1);
    // rectangular systems have at most one polystable class
    EXPECT_TRUE(verify_main_theorem(2, 4).consistent);
    EXPECT_TRUE(verify_main_theorem(3, 5).consistent);
}

TEST(EnumerateClasses, PolystableLimitDropsOrbitDimension) {
    // over every strictly semistable family with m = n <= 6
    for (int n = 4; n <= 6; ++n) {
        for (const auto& fam : enumerate_classes(n, n)) {
            if (fam.type() != orbit_type::strictly_semistable) continue;
            const auto ks = fam.instantiate(fam.default_params());
            const auto limit = polystable_limit(ks);
            EXPECT_TRUE(is_polystable(classify(limit)));
            const int lim_dim = orbit_dim_diagonal(limit.multiplicities(), limit.m(), limit.n());
            if (ks.is_diagonal()) {
                EXPECT_LT(lim_dim, orbit_dim_diagonal(ks.multiplicities(), ks.m(), ks.n()));
            } else {
                EXPECT_LT(lim_dim, dim_sl_group(ks.m(), ks.n()));
            }
        }
    }
}

TEST(RenderTable, MarkdownRowsAndDeterminism) {
    const auto fam23 = enumerate_classes(2, 3);
    const std::string md = render_table(fam23, table_format::markdown);
    EXPECT_EQ(std::count(md.begin(), md.end(), '\n'), 2 + 2);  // header + rule + two rows
    EXPECT_EQ(md, render_table(fam23, table_format::markdown));

    const auto fam35 = enumerate_classes(3, 5);
    const std::string md35 = render_table(fam35, table_format::markdown);
    EXPECT_NE(md35.find("NullCone"), std::string::npos);
    EXPECT_EQ(md35.find("Stable"), std::string::npos);
}

TEST(RenderTable, JsonRoundTripsThroughParse) {
    const auto families = enumerate_classes(4, 4);
    const std::string text = render_table(families, table_format::json);
    const auto doc = nlohmann::json::parse(text);
    ASSERT_EQ(doc.size(), families.size());
    for (std::size_t i = 0; i < families.size(); ++i) {
        EXPECT_EQ(doc[i]["no"], i + 1);
        EXPECT_EQ(doc[i]["type"], to_string(families[i].type()));
        if (families[i].num_params() == 0) {
            // concrete pencils parse back to the same structure
            const auto parsed = parse_pencil_spec(doc[i]["pencil"].get<std::string>());
            EXPECT_TRUE(parsed.structure ==
                        families[i].instantiate(families[i].default_params()));
        }
    }
}

TEST(RenderTable, ClosureAnnotationsPointAtPolystableRows) {
    const auto families = enumerate_classes(4, 4);
    const std::string md = render_table(families, table_format::markdown);
    // every strictly semistable row names the family whose closure it meets
    std::istringstream is(md);
    std::string line;
    int named = 0;
    while (std::getline(is, line))
        if (line.find("StrictlySemistable") != std::string::npos) {
            EXPECT_NE(line.find("is in this class' closure"), std::string::npos);
            ++named;
        }
    EXPECT_EQ(named, 4);
}

TEST(RenderTable, UnknownFormatRejected) {
    EXPECT_THROW(table_format_from_string("xml"), precondition_violated);
}
