// Acceptance suite: one test per criterion, each printing a pass/fail line.
// Tolerances and thresholds are pinned in code, not configurable.

#include <gtest/gtest.h>

#include <chrono>
#include <iostream>
#include <random>

#include "slocc/slocc.hpp"
#include "table_data.hpp"

using namespace slocc;

namespace {

void report(int criterion, bool pass, const std::string& detail) {
    std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << criterion << ": " << detail
              << std::endl;
    EXPECT_TRUE(pass) << "criterion " << criterion << ": " << detail;
}

std::string family_key(const kronecker_structure& ks) {
    std::ostringstream os;
    for (int e : ks.col_indices()) os << "L" << e << "+";
    for (int e : ks.row_indices()) os << "T" << e << "+";
    std::vector<std::string> sigs;
    for (const auto& e : ks.eigs()) {
        std::string s = "[";
        for (int x : e.signature) s += std::to_string(x) + ",";
        s += "]";
        sigs.push_back(s);
    }
    std::sort(sigs.begin(), sigs.end());
    for (const auto& s : sigs) os << s;
    return os.str();
}

cmat random_sl(int d, std::mt19937_64& rng, double max_cond = 30.0) {
    std::normal_distribution<double> g(0.0, 1.0);
    for (;;) {
        cmat M(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) M(i, j) = cd{g(rng), g(rng)};
        const cd det = M.determinant();
        if (std::abs(det) < 1e-3) continue;
        M /= std::pow(det, 1.0 / d);
        Eigen::JacobiSVD<cmat> svd(M);
        if (svd.singularValues()(0) / svd.singularValues()(d - 1) > max_cond) continue;
        return M;
    }
}

cmat2 random_su2(std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    cd z1{g(rng), g(rng)}, z2{g(rng), g(rng)};
    const double n = std::sqrt(std::norm(z1) + std::norm(z2));
    cmat2 U;
    U << z1 / n, z2 / n, -std::conj(z2) / n, std::conj(z1) / n;
    return U;
}

}  // namespace

TEST(Acceptance, Criterion01GoldenTables) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::map<std::pair<int, int>, int> expected_counts = {
        {{2, 2}, 2}, {{2, 3}, 2}, {{2, 4}, 1}, {{3, 3}, 6}, {{3, 4}, 5},
        {{3, 5}, 2}, {{4, 4}, 16}, {{4, 5}, 12}, {{5, 5}, 34}};
    bool pass = true;
    std::string detail;
    for (const auto& table : table_data::tables()) {
        const auto families = enumerate_classes(table.m, table.n);
        if (static_cast<int>(families.size()) != expected_counts.at({table.m, table.n}) ||
            families.size() != table.rows.size()) {
            pass = false;
            detail = "family count mismatch at " + std::to_string(table.m) + "x" +
                     std::to_string(table.n);
            break;
        }
        // match each published row to exactly one enumerated family by
        // structural key; the matched pair must agree on the orbit type and
        // be Moebius-equivalent under a shared parameter assignment
        std::map<std::string, std::pair<orbit_type, const class_family*>> by_key;
        for (const auto& fam : families)
            by_key[family_key(fam.instantiate(fam.default_params()))] = {fam.type(), &fam};
        for (const auto& row : table.rows) {
            const auto ks = table_data::instantiate(row, "2", "-3");
            const auto it = by_key.find(family_key(ks));
            if (it == by_key.end() || it->second.first != row.type) {
                pass = false;
                detail = std::string("row '") + row.pencil + "' unmatched or mistyped";
                break;
            }
            std::vector<cd> params;
            for (int p = 0; p < it->second.second->num_params(); ++p)
                params.push_back(p == 0 ? cd{2, 0} : cd{-3, 0});
            if (!moebius_equivalent(it->second.second->instantiate(params), ks)) {
                pass = false;
                detail = std::string("row '") + row.pencil + "' not Moebius-equivalent";
                break;
            }
        }
        if (!pass) break;
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (seconds >= 10.0) {
        pass = false;
        detail = "runtime " + std::to_string(seconds) + "s exceeds 10s";
    }
    if (pass)
        detail = "all nine tables reproduced, counts {2,2,1,6,5,2,16,12,34}, " +
                 std::to_string(seconds).substr(0, 5) + "s";
    report(1, pass, detail);
}

TEST(Acceptance, Criterion02PipelineOnRepresentatives) {
    int checked = 0, mismatches = 0;
    for (const auto& table : table_data::tables()) {
        for (const auto& row : table.rows) {
            const auto choices = table_data::is_parametrized(row)
                                     ? table_data::parameter_choices()
                                     : std::vector<std::pair<std::string, std::string>>{{"", ""}};
            for (const auto& [x1, x2] : choices) {
                const auto ks = table_data::instantiate(row, x1, x2);
                const auto state = representative_state(ks);
                const auto recovered = compute_kcf(pencil_from_state(state), 1e-9);
                const bool ok =
                    same_structure(recovered, ks, 1e-8) && classify(recovered) == row.type;
                ++checked;
                if (!ok) ++mismatches;
            }
        }
    }
    report(2, mismatches == 0,
           std::to_string(checked) + " representative pipelines, " +
               std::to_string(mismatches) + " mismatches");
}

TEST(Acceptance, Criterion03SemistableExistence) {
    bool pass = true;
    for (int m = 2; m <= 6 && pass; ++m)
        for (int n = m; n <= 6 && pass; ++n) {
            const auto families = enumerate_classes(m, n);
            const bool enumerated =
                std::any_of(families.begin(), families.end(), [](const class_family& f) {
                    return f.type() == orbit_type::strictly_semistable;
                });
            if (enumerated != strictly_semistable_exists(m, n)) pass = false;
        }
    report(3, pass, "strictly semistable families exist iff m = n >= 4, all 2 <= m <= n <= 6");
}

TEST(Acceptance, Criterion04MainTheoremConsistency) {
    bool pass = true;
    std::string detail = "polystable dimensions vs semistable families agree for n = 2..6";
    for (int n = 2; n <= 6; ++n) {
        const auto rep = verify_main_theorem(n, n);
        if (!rep.consistent) {
            pass = false;
            detail = "inconsistent at n = " + std::to_string(n);
        }
    }
    report(4, pass, detail);
}

TEST(Acceptance, Criterion05DimensionHeaders) {
    bool pass = true;
    const std::map<int, int> header = {{2, 7}, {3, 17}, {4, 30}, {5, 47}};
    for (const auto& [n, dim] : header) {
        const auto families = enumerate_classes(n, n);
        for (const auto& fam : families) {
            if (fam.type() != orbit_type::stable) continue;
            const auto ks = fam.instantiate(fam.default_params());
            if (orbit_dim_diagonal(ks.multiplicities(), n, n) != dim) pass = false;
        }
    }
    if (stabilizer_dim_diagonal({1, 1}) != 2) pass = false;
    report(5, pass, "maximal orbit dimensions 7/17/30/47 and GHZ stabilizer dimension 2");
}

TEST(Acceptance, Criterion06KcfOracle) {
    std::mt19937_64 rng(0xacce9'7a11dULL);
    const std::vector<eigenvalue_locus> palette = {
        eigenvalue_locus::finite({0, 0}),    eigenvalue_locus::finite({1, 0}),
        eigenvalue_locus::infinity(),        eigenvalue_locus::finite({-1, 0}),
        eigenvalue_locus::finite({0, 2}),    eigenvalue_locus::finite({2, -1}),
        eigenvalue_locus::finite({-2, -2}),  eigenvalue_locus::finite({0.5, 0.5})};
    std::uniform_int_distribution<int> mn(2, 6), coin(0, 1), part(1, 3);

    int pass_count = 0, illcond = 0, total = 0;
    while (total < 500) {
        int m = mn(rng), n = mn(rng);
        if (m > n) std::swap(m, n);
        const int b = (m >= 4) ? coin(rng) : 0;
        const int a = (n - m) + b;
        std::vector<int> eps(a, 1), nus(b, 1);
        int used_m = a + 2 * b, used_n = 2 * a + b;
        for (int i = 0; i < a; ++i) {
            int inc = std::min({part(rng) - 1, m - used_m, n - used_n - (m - used_m)});
            if (inc > 0) {
                eps[i] += inc;
                used_m += inc;
                used_n += inc;
            }
        }
        const int T = m - used_m;
        if (T != n - used_n || T < 0) continue;
        std::vector<std::vector<int>> sigs;
        int left = T;
        while (left > 0) {
            const int size = std::min(part(rng), left);
            if (!sigs.empty() && coin(rng) && sigs.size() < palette.size()) {
                sigs[static_cast<std::size_t>(rng() % sigs.size())].push_back(size);
            } else if (sigs.size() < palette.size()) {
                sigs.push_back({size});
            }
            left -= size;
        }
        std::vector<eigenvalue_block> eigs;
        for (std::size_t i = 0; i < sigs.size(); ++i) eigs.push_back({palette[i], sigs[i]});
        std::optional<kronecker_structure> ks;
        try {
            ks.emplace(eps, nus, eigs);
        } catch (const std::exception&) {
            continue;
        }
        if (ks->m() != m || ks->n() != n) continue;

        ++total;
        const cmat2 A = random_su2(rng);
        const auto p0 = kcf_to_pencil(*ks);
        const cmat B = random_sl(m, rng), C = random_sl(n, rng);
        const cmat Rp = A(0, 0) * p0.R + A(0, 1) * p0.S;
        const cmat Sp = A(1, 0) * p0.R + A(1, 1) * p0.S;
        const matrix_pencil scrambled(B * Rp * C.transpose(), B * Sp * C.transpose());
        try {
            const auto got = compute_kcf(scrambled, 1e-9);
            if (same_structure(got, moebius_on_kcf(*ks, A), 1e-8)) ++pass_count;
        } catch (const ill_conditioned&) {
            ++illcond;
        }
    }
    const bool pass = pass_count >= 499 && illcond <= 1 && pass_count + illcond == 500;
    report(6, pass,
           std::to_string(pass_count) + "/500 exact recoveries, " + std::to_string(illcond) +
               " ill-conditioned rejections");
}

TEST(Acceptance, Criterion07WitnessSuite) {
    int null_rows = 0, sss_rows = 0, failures = 0;
    std::string first_failure;
    for (const auto& table : table_data::tables()) {
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            const auto& row = table.rows[r];
            if (row.type != orbit_type::null_cone &&
                row.type != orbit_type::strictly_semistable)
                continue;
            const auto ks = table_data::instantiate(row, "2", "-3");
            const auto fam = witness_for(ks);
            const auto rep = representative_state(ks);

            // determinant drift along the schedule
            bool det_ok = true;
            for (double alpha : {0.0, 10.0, 25.0, 40.0}) {
                cd det{1.0, 0.0};
                double exps = 0.0;
                for (const auto& f : fam.factors()) {
                    if (const auto* e = std::get_if<expdiag_factor>(&f.payload)) {
                        for (const frac& c : e->exponents) exps += c.value() * alpha;
                    } else {
                        det *= std::get<const_factor>(f.payload).matrix.determinant();
                    }
                }
                if (std::abs(det * std::exp(exps) - 1.0) > 1e-6) det_ok = false;
            }

            bool ok = det_ok;
            if (row.type == orbit_type::null_cone) {
                ++null_rows;
                const double ratio = evaluate_family(fam, 40.0, rep).norm() / rep.norm();
                ok = ok && ratio < 1e-6;
            } else {
                ++sss_rows;
                const auto limit = evaluate_family(fam, 40.0, rep);
                const kcf_options opts{1e-6, 1e-6};
                const auto limit_ks = compute_kcf(pencil_from_state(limit), opts);
                const auto expected_limit = polystable_limit(ks);
                ok = ok && moebius_equivalent(limit_ks, expected_limit);
                if (row.closure_row > 0) {
                    const auto target_row =
                        table_data::instantiate(table.rows[row.closure_row - 1], "2", "-3");
                    ok = ok && moebius_equivalent(expected_limit, target_row);
                }
            }
            if (!ok) {
                ++failures;
                if (first_failure.empty()) first_failure = row.pencil;
            }
        }
    }
    report(7, failures == 0,
           std::to_string(null_rows) + " null-cone and " + std::to_string(sss_rows) +
               " semistable rows checked" +
               (failures ? ", first failure: " + first_failure : ""));
}

TEST(Acceptance, Criterion08Balance) {
    std::mt19937_64 rng(0xba1a4ce2ULL);
    std::uniform_real_distribution<double> uth(0.0, M_PI), uph(0.0, 2.0 * M_PI);
    std::uniform_int_distribution<int> un(3, 8);

    int done = 0, ok = 0;
    while (done < 1000) {
        const int n = un(rng);
        std::uniform_int_distribution<int> ul(3, n);
        const int l = ul(rng);
        std::vector<int> mults(l, 1);
        int left = n - l;
        std::uniform_int_distribution<int> upick(0, l - 1);
        int guard = 0;
        while (left > 0 && guard++ < 200) {
            const int i = upick(rng);
            if (2 * (mults[i] + 1) < n) {
                ++mults[i];
                --left;
            }
        }
        if (left > 0) continue;
        std::vector<weighted_vector> vecs;
        bool distinct = true;
        for (int i = 0; i < l; ++i) {
            weighted_vector v;
            v.theta = uth(rng);
            v.phi = uph(rng);
            v.mult = mults[i];
            for (const auto& u : vecs)
                if (chordal_distance(vector_to_eigenvalue(u), vector_to_eigenvalue(v)) < 0.05)
                    distinct = false;
            vecs.push_back(v);
        }
        if (!distinct) continue;
        ++done;
        try {
            const auto res = balance(vecs, 1e-12, 0x9000 + done);
            if (res.residual < 1e-10 && is_critical(critical_diag_state(res.balanced, 1e-8), 1e-8))
                ++ok;
        } catch (const std::exception&) {
        }
    }

    // the explicit critical configuration of the 2x5x5 strictly polystable row
    const double phi = -0.5 * std::acos(-7.0 / 8.0);
    bool psi31 = false;
    {
        std::vector<weighted_vector> cfg = {{M_PI / 2.0, phi + 2.0 * M_PI, 2},
                                            {M_PI / 2.0, -phi, 2},
                                            {M_PI / 2.0, M_PI, 1}};
        psi31 = is_critical(critical_diag_state(cfg, 1e-10), 1e-10);
    }
    report(8, ok == 1000 && psi31,
           std::to_string(ok) + "/1000 balanced with residual < 1e-10 and critical states; "
                                "explicit phased configuration critical: " +
               (psi31 ? "yes" : "no"));
}

TEST(Acceptance, Criterion09NormalFormCrosscheck) {
    int agreements = 0, rows = 0, trace_violations = 0;
    std::string first_disagreement;
    for (const auto& table : table_data::tables()) {
        for (const auto& row : table.rows) {
            const auto ks = table_data::instantiate(row, "2", "-3");
            const auto state = representative_state(ks);
            const auto nf = normal_form(state);
            for (std::size_t i = 1; i < nf.norm_trace.size(); ++i)
                if (nf.norm_trace[i] > nf.norm_trace[i - 1] * (1.0 + 1e-12)) ++trace_violations;
            const bool agree = verdict_matches(row.type, nf.verdict);
            ++rows;
            if (agree) {
                ++agreements;
            } else if (first_disagreement.empty()) {
                first_disagreement = std::string(row.pencil) + " -> " + to_string(nf.verdict);
            }
        }
    }
    // GHZ fixed point
    const auto ghz = representative_state(table_data::instantiate(table_data::tables()[0].rows[1]));
    const auto ghz_nf = normal_form(ghz.normalized());
    const bool ghz_fixed = ghz_nf.verdict == nf_verdict::critical_reached &&
                           ghz_nf.iterations == 1 &&
                           (ghz_nf.accumulated.B() - cmat::Identity(2, 2)).norm() < 1e-10;
    const bool pass = agreements == rows && trace_violations == 0 && ghz_fixed;
    report(9, pass,
           std::to_string(agreements) + "/" + std::to_string(rows) +
               " verdicts agree, monotone traces, GHZ fixed point" +
               (first_disagreement.empty() ? "" : "; first: " + first_disagreement));
}

TEST(Acceptance, Criterion10ExistenceFormula) {
    bool pass = true;
    for (int m = 2; m <= 12 && pass; ++m)
        for (int n = m; n <= 12 && pass; ++n) {
            const bool divisibility = (m == n) || (m % (n - m) == 0);
            if (critical_exists({2, m, n}).exists != divisibility) pass = false;
        }
    const auto odd = critical_exists({2, 3, 5});
    if (odd.exists || odd.lhs != -6) pass = false;
    report(10, pass, "gcd formula agrees with divisibility for all 2 <= m <= n <= 12; (2,3,5) lhs = -6");
}
