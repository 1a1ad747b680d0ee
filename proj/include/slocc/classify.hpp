#pragma once

#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "slocc/kcf.hpp"
#include "slocc/kronecker.hpp"
#include "slocc/pencil.hpp"
#include "slocc/state_tensor.hpp"

namespace slocc {

// The four orbit types partitioning fully entangled SLOCC classes.
enum class orbit_type { null_cone, strictly_semistable, strictly_polystable, stable };

inline const char* to_string(orbit_type t) {
    switch (t) {
        case orbit_type::null_cone: return "NullCone";
        case orbit_type::strictly_semistable: return "StrictlySemistable";
        case orbit_type::strictly_polystable: return "StrictlyPolystable";
        case orbit_type::stable: return "Stable";
    }
    return "?";
}

inline bool is_polystable(orbit_type t) {
    return t == orbit_type::strictly_polystable || t == orbit_type::stable;
}

namespace classify_detail {

// Orbit type of a diagonal n x n pencil with multiplicities sorted
// descending; l = 1 stands for the biseparable A|BC pencil, which a
// determinant-one sequence sends to zero.
inline orbit_type diagonal_type(const std::vector<int>& mults, int n) {
    const int l = static_cast<int>(mults.size());
    if (l == 0) throw precondition_violated("diagonal_type: no eigenvalues");
    if (l == 1) return orbit_type::null_cone;
    const int m1 = mults[0];
    const int rest = std::accumulate(mults.begin() + 1, mults.end(), 0);
    if (m1 > rest) return orbit_type::null_cone;
    if (l == 2) {
        // here m1 == m2; m1 < m2 cannot happen in descending order
        return n == 2 ? orbit_type::stable : orbit_type::strictly_polystable;
    }
    if (m1 == rest) return orbit_type::strictly_semistable;
    return l == n ? orbit_type::stable : orbit_type::strictly_polystable;
}

}  // namespace classify_detail

// Validates that ks can describe a fully entangled state: minimal indices
// are >= 1 by construction, so the only failure mode is a purely diagonal
// pencil with a single eigenvalue (the two slices become proportional).
inline void require_fully_entangled(const kronecker_structure& ks) {
    if (ks.is_diagonal() && ks.distinct_eigenvalues() < 2)
        throw not_fully_entangled("diagonal pencil with fewer than two eigenvalue loci");
}

// Decides the orbit type of the SLOCC class represented by a KCF.  Only the
// block data and eigenvalue multiplicities matter, never the values.
inline orbit_type classify(const kronecker_structure& ks) {
    require_fully_entangled(ks);
    const int m = ks.m(), n = ks.n();

    if (m != n) {
        // Stable iff the pencil is a direct sum of n-m copies of L_{m/(n-m)}.
        const int d = n - m;
        const bool divides = (m % d) == 0;
        if (divides && ks.row_indices().empty() && ks.eigs().empty() &&
            static_cast<int>(ks.col_indices().size()) == d) {
            const int eps = m / d;
            bool all_match = true;
            for (int e : ks.col_indices())
                if (e != eps) all_match = false;
            if (all_match) return orbit_type::stable;
        }
        return orbit_type::null_cone;
    }

    // square: any L comes with an L^T, so either block type forces the null-cone
    if (!ks.col_indices().empty() || !ks.row_indices().empty()) return orbit_type::null_cone;

    const orbit_type reduct = classify_detail::diagonal_type(ks.multiplicities(), n);
    if (ks.is_diagonal()) return reduct;
    // off-diagonal entries can only be removed in a limit: the class sits
    // strictly above its diagonal reduct
    return reduct == orbit_type::null_cone ? orbit_type::null_cone
                                           : orbit_type::strictly_semistable;
}

// dim of the stabilizer of a critical state with a diagonal pencil,
// in terms of the eigenvalue degeneracies: max{3-l, 0} - 1 + sum m_i^2.
inline int stabilizer_dim_diagonal(const std::vector<int>& multiplicities) {
    const int l = static_cast<int>(multiplicities.size());
    if (l < 2) throw precondition_violated("stabilizer_dim_diagonal: needs l >= 2");
    int sumsq = 0;
    for (int mi : multiplicities) {
        if (mi < 1) throw precondition_violated("stabilizer_dim_diagonal: bad multiplicity");
        sumsq += mi * mi;
    }
    return std::max(3 - l, 0) + (sumsq - 1);
}

inline int dim_sl_group(int m, int n) { return 3 + (m * m - 1) + (n * n - 1); }

inline int orbit_dim_diagonal(const std::vector<int>& multiplicities, int m, int n) {
    if (m != n) throw precondition_violated("orbit_dim_diagonal: diagonal pencils are square");
    if (std::accumulate(multiplicities.begin(), multiplicities.end(), 0) != n)
        throw precondition_violated("orbit_dim_diagonal: multiplicities must sum to n");
    return dim_sl_group(m, n) - stabilizer_dim_diagonal(multiplicities);
}

// Existence of a critical state for arbitrary local dimensions:
// prod d_i - sum_l (-1)^(l+1) sum gcd(d_{i1}^2, ..., d_{il}^2) >= 0.
struct critical_existence {
    bool exists;
    long long lhs;
};

inline critical_existence critical_exists(const std::vector<int>& dims) {
    const int N = static_cast<int>(dims.size());
    if (N < 2 || N > 20) throw precondition_violated("critical_exists: need 2..20 parties");
    for (int d : dims)
        if (d < 2) throw precondition_violated("critical_exists: dims must be >= 2");
    long long prod = 1;
    for (int d : dims) prod *= d;
    long long alternating = 0;
    for (unsigned mask = 1; mask < (1u << N); ++mask) {
        long long g = 0;
        int bits = 0;
        for (int i = 0; i < N; ++i)
            if (mask & (1u << i)) {
                const long long sq = static_cast<long long>(dims[i]) * dims[i];
                g = g == 0 ? sq : std::gcd(g, sq);
                ++bits;
            }
        alternating += (bits % 2 == 1 ? g : -g);
    }
    const long long lhs = prod - alternating;
    return {lhs >= 0, lhs};
}

// Strictly semistable states exist in 2 x m x n iff m = n >= 4.
inline bool strictly_semistable_exists(int m, int n) {
    if (m < 2 || m > n) throw precondition_violated("strictly_semistable_exists: need 2 <= m <= n");
    return m == n && m >= 4;
}

// The unique polystable class in the closure of a strictly semistable one:
// the diagonal reduct, or, when the reduct is itself strictly semistable,
// the two-locus split with multiplicities (m1, m1).
inline kronecker_structure polystable_limit(const kronecker_structure& ks) {
    if (classify(ks) != orbit_type::strictly_semistable)
        throw precondition_violated("polystable_limit: input class is not strictly semistable");
    const kronecker_structure reduct = ks.diagonal_reduct();
    const orbit_type rt = classify(reduct);
    if (is_polystable(rt)) return reduct;
    // equal split: all non-dominant loci merge into one in the limit
    const std::vector<int> mults = reduct.multiplicities();
    const int m1 = mults[0];
    std::vector<eigenvalue_block> eigs;
    eigs.push_back({eigenvalue_locus::finite_exact(gauss_rat(0)),
                    std::vector<int>(static_cast<std::size_t>(m1), 1)});
    eigs.push_back({eigenvalue_locus::infinity(), std::vector<int>(static_cast<std::size_t>(m1), 1)});
    return kronecker_structure({}, {}, std::move(eigs));
}

// Full per-state verdict.  Orbit and stabilizer dimensions are reported for
// diagonal square pencils only, where the degeneracy formula applies.
struct class_report {
    orbit_type type;
    kronecker_structure kcf;
    std::optional<int> stab_dim;
    std::optional<int> orbit_dim;
    std::optional<kronecker_structure> limit_class;
    bool biseparable_reduct = false;
};

inline class_report report_for_structure(const kronecker_structure& ks) {
    class_report rep{classify(ks), ks, {}, {}, {}, false};
    if (ks.is_diagonal() && ks.m() == ks.n()) {
        const std::vector<int> mults = ks.multiplicities();
        rep.stab_dim = stabilizer_dim_diagonal(mults);
        rep.orbit_dim = orbit_dim_diagonal(mults, ks.m(), ks.n());
    }
    if (rep.type == orbit_type::strictly_semistable) rep.limit_class = polystable_limit(ks);
    if (rep.type == orbit_type::null_cone && !ks.is_diagonal() && ks.col_indices().empty() &&
        ks.row_indices().empty() && ks.distinct_eigenvalues() == 1)
        rep.biseparable_reduct = true;
    return rep;
}

// state -> pencil -> KCF -> orbit type, with all derivable fields attached.
inline class_report classify_state(const state_tensor& s, double tol = 1e-9,
                                   const kcf_options& opts = kcf_options{}) {
    if (!is_fully_entangled(s, tol))
        throw not_fully_entangled("classify_state: a reduced state is rank deficient");
    kcf_options o = opts;
    o.tol = tol;
    const kronecker_structure ks = compute_kcf(pencil_from_state(s), o);
    return report_for_structure(ks);
}

}  // namespace slocc
