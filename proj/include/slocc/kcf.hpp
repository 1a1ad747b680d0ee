#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include "slocc/kronecker.hpp"
#include "slocc/pencil.hpp"

namespace slocc {

struct kcf_options {
    double tol = 1e-9;          // relative singular-value threshold for rank decisions
    double tol_cluster = 1e-6;  // chordal merge radius for computed eigenvalues
    std::uint64_t seed = 0x51a7c0defULL;
};

namespace kcfdetail {

// ---- floating-point rank/kernel primitives ---------------------------------

// Counts singular values at or below tol_rel * sigma_max and rejects the
// decision when some singular value sits within a factor 10 of the cut.
inline int nullity_checked(const Eigen::VectorXd& sv, double tol_rel) {
    if (sv.size() == 0) return 0;
    const double top = sv(0);
    if (top == 0.0) return static_cast<int>(sv.size());
    const double cut = tol_rel * top;
    int null = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        const double s = sv(i);
        if (s <= cut) {
            ++null;
        }
        if (s > 0.0 && s > cut / 10.0 && s < cut * 10.0)
            throw ill_conditioned("rank decision within factor 10 of tolerance");
    }
    return null;
}

struct float_ops {
    double tol;

    int nullity(const cmat& M) const {
        if (M.rows() == 0 || M.cols() == 0) return static_cast<int>(M.cols());
        Eigen::JacobiSVD<cmat> svd(M);
        const int structural = static_cast<int>(M.cols() - std::min(M.rows(), M.cols()));
        return structural + nullity_checked(svd.singularValues(), tol);
    }

    // Orthonormal basis of the right null space.
    cmat kernel(const cmat& M) const {
        Eigen::JacobiSVD<cmat> svd(M, Eigen::ComputeFullV);
        const int k = nullity(M);
        return svd.matrixV().rightCols(k);
    }

    // Orthonormal basis of the column space of M plus its complement in the
    // ambient space; checks the detected rank against the expectation.
    std::pair<cmat, cmat> colspace_split(const cmat& M, int expected_rank) const {
        Eigen::JacobiSVD<cmat> svd(M, Eigen::ComputeFullU);
        const int small = nullity_checked(svd.singularValues(), tol);
        const int rank = static_cast<int>(std::min(M.rows(), M.cols())) - small;
        if (rank != expected_rank)
            throw ill_conditioned("deflation rank disagrees with index bookkeeping");
        return {svd.matrixU().leftCols(rank), svd.matrixU().rightCols(M.rows() - rank)};
    }
};

// ---- exact rank/kernel primitives over Q(i) ---------------------------------

inline int gq_echelon(gq_matrix& M, std::vector<int>* pivot_cols = nullptr) {
    int rank = 0;
    for (int col = 0; col < M.cols && rank < M.rows; ++col) {
        int pivot = -1;
        for (int r = rank; r < M.rows; ++r)
            if (!M(r, col).is_zero()) { pivot = r; break; }
        if (pivot < 0) continue;
        if (pivot != rank)
            for (int c = 0; c < M.cols; ++c) std::swap(M(pivot, c), M(rank, c));
        const gauss_rat inv = gauss_rat(1) / M(rank, col);
        for (int c = col; c < M.cols; ++c) M(rank, c) = M(rank, c) * inv;
        for (int r = 0; r < M.rows; ++r) {
            if (r == rank || M(r, col).is_zero()) continue;
            const gauss_rat f = M(r, col);
            for (int c = col; c < M.cols; ++c) M(r, c) = M(r, c) - f * M(rank, c);
        }
        if (pivot_cols) pivot_cols->push_back(col);
        ++rank;
    }
    return rank;
}

inline int gq_rank(gq_matrix M) { return gq_echelon(M); }

inline gq_matrix gq_kernel(const gq_matrix& M) {
    gq_matrix E = M;
    std::vector<int> piv;
    const int rank = gq_echelon(E, &piv);
    std::vector<bool> is_pivot(M.cols, false);
    for (int c : piv) is_pivot[c] = true;
    gq_matrix K(M.cols, M.cols - rank);
    int out = 0;
    for (int free_col = 0; free_col < M.cols; ++free_col) {
        if (is_pivot[free_col]) continue;
        K(free_col, out) = gauss_rat(1);
        for (int r = 0; r < rank; ++r) K(piv[r], out) = -E(r, free_col);
        ++out;
    }
    return K;
}

inline gq_matrix gq_mul(const gq_matrix& A, const gq_matrix& B) {
    gq_matrix C(A.rows, B.cols);
    for (int i = 0; i < A.rows; ++i)
        for (int k = 0; k < A.cols; ++k) {
            if (A(i, k).is_zero()) continue;
            for (int j = 0; j < B.cols; ++j)
                if (!B(k, j).is_zero()) C(i, j) = C(i, j) + A(i, k) * B(k, j);
        }
    return C;
}

// Solves A X = B for square invertible A.
inline gq_matrix gq_solve(const gq_matrix& A, const gq_matrix& B) {
    gq_matrix aug(A.rows, A.cols + B.cols);
    for (int i = 0; i < A.rows; ++i) {
        for (int j = 0; j < A.cols; ++j) aug(i, j) = A(i, j);
        for (int j = 0; j < B.cols; ++j) aug(i, A.cols + j) = B(i, j);
    }
    const int rank = gq_echelon(aug);
    if (rank != A.rows) throw precondition_violated("gq_solve: singular system");
    gq_matrix X(A.cols, B.cols);
    for (int i = 0; i < A.rows; ++i)
        for (int j = 0; j < B.cols; ++j) X(i, j) = aug(i, A.cols + j);
    return X;
}

inline gauss_rat gq_det(gq_matrix M) {
    gauss_rat det(1);
    for (int col = 0; col < M.cols; ++col) {
        int pivot = -1;
        for (int r = col; r < M.rows; ++r)
            if (!M(r, col).is_zero()) { pivot = r; break; }
        if (pivot < 0) return gauss_rat(0);
        if (pivot != col) {
            for (int c = 0; c < M.cols; ++c) std::swap(M(pivot, c), M(col, c));
            det = -det;
        }
        det = det * M(col, col);
        const gauss_rat inv = gauss_rat(1) / M(col, col);
        for (int r = col + 1; r < M.rows; ++r) {
            if (M(r, col).is_zero()) continue;
            const gauss_rat f = M(r, col) * inv;
            for (int c = col; c < M.cols; ++c) M(r, c) = M(r, c) - f * M(col, c);
        }
    }
    return det;
}

struct exact_ops {
    int nullity(const gq_matrix& M) const { return M.cols - gq_rank(M); }
    gq_matrix kernel(const gq_matrix& M) const { return gq_kernel(M); }
};

// ---- generalized Sylvester stacks -------------------------------------------

// W_k: kernel vectors are the coefficient stacks of degree-k polynomial
// right null vectors of R + lambda*S.
inline cmat build_sylvester(const cmat& R, const cmat& S, int k) {
    const int m = static_cast<int>(R.rows()), n = static_cast<int>(R.cols());
    cmat W = cmat::Zero(static_cast<Eigen::Index>(m) * (k + 2),
                        static_cast<Eigen::Index>(n) * (k + 1));
    for (int bc = 0; bc <= k; ++bc)
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) {
                W(bc * m + i, bc * n + j) = R(i, j);
                W((bc + 1) * m + i, bc * n + j) = S(i, j);
            }
    return W;
}

inline gq_matrix build_sylvester(const gq_matrix& R, const gq_matrix& S, int k) {
    const int m = R.rows, n = R.cols;
    gq_matrix W(m * (k + 2), n * (k + 1));
    for (int bc = 0; bc <= k; ++bc)
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) {
                W(bc * m + i, bc * n + j) = R(i, j);
                W((bc + 1) * m + i, bc * n + j) = S(i, j);
            }
    return W;
}

// ---- minimal indices ---------------------------------------------------------

// dim ker W_k = sum over right minimal indices e <= k of (k - e + 1); the
// second difference of that sequence counts indices of each size.
template <class Mat, class Ops>
std::vector<int> right_minimal_indices(const Mat& R, const Mat& S, int n_cols, int expected,
                                       const Ops& ops, const char* side) {
    std::vector<int> eps;
    if (expected == 0) {
        const Mat W0 = build_sylvester(R, S, 0);
        if (ops.nullity(W0) != 0)
            throw ill_conditioned(std::string("minimal index count mismatch on ") + side);
        return eps;
    }
    int prev_d = 0, prev_count = 0;
    for (int k = 0; k <= n_cols + 1; ++k) {
        const Mat W = build_sylvester(R, S, k);
        const int d = ops.nullity(W);
        const int count_le_k = d - prev_d;  // number of indices <= k
        const int new_of_size_k = count_le_k - prev_count;
        if (new_of_size_k < 0)
            throw ill_conditioned(std::string("inconsistent kernel growth on ") + side);
        if (k == 0 && new_of_size_k > 0)
            throw not_fully_entangled(std::string("pencil has a zero ") + side + " direction");
        for (int t = 0; t < new_of_size_k; ++t) eps.push_back(k);
        prev_d = d;
        prev_count = count_le_k;
        if (count_le_k == expected && static_cast<int>(eps.size()) == expected) return eps;
        if (count_le_k > expected)
            throw ill_conditioned(std::string("minimal index overshoot on ") + side);
    }
    throw ill_conditioned(std::string("minimal indices not resolved on ") + side);
}

// ---- deflation of the right singular part ------------------------------------

struct float_pencil {
    cmat R, S;
    int rows() const { return static_cast<int>(R.rows()); }
    int cols() const { return static_cast<int>(R.cols()); }
};

// Columns spanned by all coefficient vectors of the kernel polynomials, and
// their image under (R, S); restricting to the complements splits the right
// singular blocks off as a strict equivalence.
inline float_pencil deflate_right(const float_pencil& p, const std::vector<int>& eps,
                                  const float_ops& ops) {
    if (eps.empty()) return p;
    const int m = p.rows(), n = p.cols();
    const int kmax = *std::max_element(eps.begin(), eps.end());
    const cmat W = build_sylvester(p.R, p.S, kmax);
    const cmat K = ops.kernel(W);
    cmat chunks(n, (kmax + 1) * K.cols());
    for (int c = 0; c < K.cols(); ++c)
        for (int b = 0; b <= kmax; ++b)
            chunks.col(c * (kmax + 1) + b) = K.block(b * n, c, n, 1);
    int v_dim = 0, w_dim = 0;
    for (int e : eps) { v_dim += e + 1; w_dim += e; }
    auto [V, Vc] = ops.colspace_split(chunks, v_dim);
    cmat images(m, 2 * V.cols());
    images << p.R * V, p.S * V;
    auto [Wsp, Wc] = ops.colspace_split(images, w_dim);
    (void)Wsp;
    return {cmat(Wc.adjoint() * p.R * Vc), cmat(Wc.adjoint() * p.S * Vc)};
}

inline gq_matrix gq_transpose(const gq_matrix& M) {
    gq_matrix T(M.cols, M.rows);
    for (int i = 0; i < M.rows; ++i)
        for (int j = 0; j < M.cols; ++j) T(j, i) = M(i, j);
    return T;
}

// Exact deflation: complete the span to full bases with unit vectors and
// change bases; the lower-right block is the deflated pencil.
inline std::pair<gq_matrix, gq_matrix> gq_deflate_right(const gq_matrix& R, const gq_matrix& S,
                                                        const std::vector<int>& eps) {
    const int m = R.rows, n = R.cols;
    const int kmax = *std::max_element(eps.begin(), eps.end());
    const gq_matrix W = build_sylvester(R, S, kmax);
    const gq_matrix K = gq_kernel(W);
    gq_matrix chunks(n, (kmax + 1) * K.cols);
    for (int c = 0; c < K.cols; ++c)
        for (int b = 0; b <= kmax; ++b)
            for (int i = 0; i < n; ++i) chunks(i, c * (kmax + 1) + b) = K(b * n + i, c);

    // Greedily selects independent columns of M, then completes them with
    // unit vectors into a full basis of the ambient space.  Returns the
    // basis matrix and the rank of M's column span.
    auto basis_split = [](const gq_matrix& M, int ambient) {
        gq_matrix basis(ambient, ambient);
        int filled = 0;
        auto try_append = [&](auto&& column_at) {
            gq_matrix trial(ambient, filled + 1);
            for (int i = 0; i < ambient; ++i) {
                for (int j = 0; j < filled; ++j) trial(i, j) = basis(i, j);
                trial(i, filled) = column_at(i);
            }
            if (gq_rank(trial) == filled + 1) {
                for (int i = 0; i < ambient; ++i) basis(i, filled) = column_at(i);
                ++filled;
                return true;
            }
            return false;
        };
        for (int c = 0; c < M.cols && filled < ambient; ++c)
            try_append([&](int i) { return M(i, c); });
        const int rank = filled;
        for (int e = 0; e < ambient && filled < ambient; ++e)
            try_append([&](int i) { return i == e ? gauss_rat(1) : gauss_rat(0); });
        return std::pair<gq_matrix, int>(basis, rank);
    };

    int v_dim = 0, w_dim = 0;
    for (int e : eps) { v_dim += e + 1; w_dim += e; }

    auto [F, v_rank] = basis_split(chunks, n);
    if (v_rank != v_dim) throw ill_conditioned("exact deflation: span dimension mismatch");
    gq_matrix images(m, 2 * v_dim);
    {
        gq_matrix Vb(n, v_dim);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < v_dim; ++j) Vb(i, j) = F(i, j);
        const gq_matrix RV = gq_mul(R, Vb), SV = gq_mul(S, Vb);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < v_dim; ++j) {
                images(i, j) = RV(i, j);
                images(i, v_dim + j) = SV(i, j);
            }
    }
    auto [E, w_rank] = basis_split(images, m);
    if (w_rank != w_dim) throw ill_conditioned("exact deflation: image dimension mismatch");

    const gq_matrix Rt = gq_solve(E, gq_mul(R, F));
    const gq_matrix St = gq_solve(E, gq_mul(S, F));
    gq_matrix R2(m - w_dim, n - v_dim), S2(m - w_dim, n - v_dim);
    for (int i = 0; i < m - w_dim; ++i)
        for (int j = 0; j < n - v_dim; ++j) {
            R2(i, j) = Rt(w_dim + i, v_dim + j);
            S2(i, j) = St(w_dim + i, v_dim + j);
        }
    return {R2, S2};
}

// ---- regular core: eigenvalues and size signatures (floating point) ----------

inline cmat2 random_su2(std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    cd z1{g(rng), g(rng)}, z2{g(rng), g(rng)};
    const double nrm = std::sqrt(std::norm(z1) + std::norm(z2));
    if (nrm < 1e-8) return cmat2::Identity();
    z1 /= nrm;
    z2 /= nrm;
    cmat2 U;
    U << z1, z2, -std::conj(z2), std::conj(z1);
    return U;
}

// Weyr characteristic of a (nearly) nilpotent matrix by repeated kernel
// extraction and compression onto the kernel complement.
inline std::vector<int> compression_staircase(const cmat& N, double tau) {
    std::vector<int> weyr;
    cmat A = N;
    while (A.rows() > 0) {
        Eigen::JacobiSVD<cmat> svd(A, Eigen::ComputeFullV);
        const auto& sv = svd.singularValues();
        int null = 0;
        for (Eigen::Index i = 0; i < sv.size(); ++i)
            if (sv(i) <= tau) ++null;
        if (null == 0) break;
        weyr.push_back(null);
        const int keep = static_cast<int>(A.rows()) - null;
        if (keep == 0) break;
        const cmat Vc = svd.matrixV().leftCols(keep);
        A = Vc.adjoint() * A * Vc;
    }
    return weyr;
}

inline std::vector<int> segre_from_weyr(const std::vector<int>& weyr) {
    std::vector<int> segre;
    if (weyr.empty()) return segre;
    for (int j = 1; j <= weyr[0]; ++j) {
        int count = 0;
        for (int w : weyr)
            if (w >= j) ++count;
        segre.push_back(count);
    }
    return segre;
}

inline std::vector<eigenvalue_block> core_eigs_float(const cmat& Rc, const cmat& Sc,
                                                     const kcf_options& opts) {
    const int s = static_cast<int>(Rc.rows());
    std::vector<eigenvalue_block> out;
    if (s == 0) return out;

    std::mt19937_64 rng(opts.seed);
    cmat2 A;
    cmat M;
    Eigen::VectorXcd ys;
    bool ok = false;
    for (int attempt = 0; attempt < 40 && !ok; ++attempt) {
        A = random_su2(rng);
        const cmat Rp = A(0, 0) * Rc + A(0, 1) * Sc;
        const cmat Sp = A(1, 0) * Rc + A(1, 1) * Sc;
        Eigen::JacobiSVD<cmat> svd(Sp);
        const auto& sv = svd.singularValues();
        if (sv(0) == 0.0 || sv(sv.size() - 1) < 1e-10 * sv(0)) continue;
        M = Sp.partialPivLu().solve(Rp);
        Eigen::ComplexSchur<cmat> schur(M, false);
        if (schur.info() != Eigen::Success) continue;
        ys = schur.matrixT().diagonal();
        if (ys.cwiseAbs().maxCoeff() > 30.0) continue;
        ok = true;
    }
    if (!ok) throw ill_conditioned("no usable Moebius substitution for the regular core");

    const double scale_m = 1.0 + M.norm();
    double tc = opts.tol_cluster;
    for (int escalation = 0; escalation < 8 && tc <= 5e-2; ++escalation) {
        // single-linkage clustering in the chordal metric
        std::vector<int> group(s);
        std::iota(group.begin(), group.end(), 0);
        std::function<int(int)> find = [&](int a) { return group[a] == a ? a : group[a] = find(group[a]); };
        for (int i = 0; i < s; ++i)
            for (int j = i + 1; j < s; ++j) {
                const auto li = eigenvalue_locus::finite(ys(i));
                const auto lj = eigenvalue_locus::finite(ys(j));
                if (chordal_distance(li, lj) <= tc) group[find(i)] = find(j);
            }
        std::vector<std::vector<int>> clusters;
        {
            std::vector<int> root_of(s, -1);
            for (int i = 0; i < s; ++i) {
                const int r = find(i);
                if (root_of[r] < 0) {
                    root_of[r] = static_cast<int>(clusters.size());
                    clusters.emplace_back();
                }
                clusters[root_of[r]].push_back(i);
            }
        }

        bool consistent = true;
        std::vector<eigenvalue_block> blocks;
        std::vector<cd> means;
        std::vector<double> radii;
        std::vector<int> geo_mults;
        for (const auto& members : clusters) {
            const int mult = static_cast<int>(members.size());
            cd mean = 0.0;
            for (int idx : members) mean += ys(idx);
            mean /= static_cast<double>(mult);
            double radius = 0.0;
            for (int idx : members) radius = std::max(radius, std::abs(ys(idx) - mean));

            // invariant subspace of the cluster from the product of shifts
            cmat K = cmat::Identity(s, s);
            for (int idx : members) K = K * (M - ys(idx) * cmat::Identity(s, s));
            Eigen::JacobiSVD<cmat> svd(K, Eigen::ComputeFullV);
            const cmat Q = svd.matrixV().rightCols(mult);
            const cmat Nc = Q.adjoint() * (M - mean * cmat::Identity(s, s)) * Q;

            const double tau = std::max({50.0 * radius, 2e3 * 1e-16 * scale_m, 1e-2 * opts.tol * scale_m});
            const std::vector<int> weyr = compression_staircase(Nc, tau);
            const std::vector<int> segre = segre_from_weyr(weyr);
            const int total = std::accumulate(segre.begin(), segre.end(), 0);
            bool monotone = true;
            for (std::size_t i = 1; i < weyr.size(); ++i)
                if (weyr[i] > weyr[i - 1]) monotone = false;
            if (total != mult || !monotone) {
                consistent = false;
                break;
            }

            // map back through the inverse substitution; A has determinant 1
            const cd u = A(1, 1) * mean - A(0, 1);
            const cd w = -A(1, 0) * mean + A(0, 0);
            blocks.push_back({locus_from_homogeneous(u, w, 1e-8), segre});
            means.push_back(mean);
            radii.push_back(radius);
            geo_mults.push_back(weyr.empty() ? 0 : weyr[0]);
        }
        if (!consistent) {
            tc *= 10.0;
            continue;
        }

        // A defective eigenvalue perturbs like eps^(1/e) and can scatter wider
        // than the merge radius.  Pool connected components of nearby loci and
        // compare the pooled geometric multiplicity against the sum of the
        // claimed ones: a shortfall means the component is one defective
        // eigenvalue that the clustering split.
        double must_merge = 0.0;
        {
            const std::size_t c = means.size();
            std::vector<int> comp(c);
            std::iota(comp.begin(), comp.end(), 0);
            std::function<int(int)> cfind = [&](int a) {
                return comp[a] == a ? a : comp[a] = cfind(comp[a]);
            };
            for (std::size_t i = 0; i < c; ++i)
                for (std::size_t j = i + 1; j < c; ++j)
                    if (std::abs(means[i] - means[j]) <= 1e-2)
                        comp[cfind(static_cast<int>(i))] = cfind(static_cast<int>(j));
            std::vector<std::vector<int>> groups(c);
            for (std::size_t i = 0; i < c; ++i)
                groups[cfind(static_cast<int>(i))].push_back(static_cast<int>(i));
            for (const auto& grp : groups) {
                if (grp.size() < 2) continue;
                cd pooled = 0.0;
                int weight = 0, g_claimed = 0;
                double spread = 0.0;
                for (int gi : grp) {
                    pooled += means[gi] * static_cast<double>(clusters[gi].size());
                    weight += static_cast<int>(clusters[gi].size());
                    g_claimed += geo_mults[gi];
                }
                pooled /= static_cast<double>(weight);
                double chordal_diam = 0.0;
                for (int gi : grp) {
                    spread = std::max(spread, std::abs(means[gi] - pooled) + radii[gi]);
                    for (int gj : grp)
                        chordal_diam = std::max(
                            chordal_diam, chordal_distance(eigenvalue_locus::finite(means[gi]),
                                                           eigenvalue_locus::finite(means[gj])));
                }
                const double tau = 50.0 * spread + 2e3 * 1e-16 * scale_m;
                Eigen::JacobiSVD<cmat> svd(M - pooled * cmat::Identity(s, s));
                const auto& sv = svd.singularValues();
                int g_merged = 0;
                for (Eigen::Index t = 0; t < sv.size(); ++t)
                    if (sv(t) <= tau) ++g_merged;
                if (g_merged < g_claimed) must_merge = std::max(must_merge, chordal_diam);
            }
        }
        if (must_merge > 0.0) {
            tc = std::max(tc * 10.0, 2.5 * must_merge);
            continue;
        }
        return blocks;
    }
    throw ill_conditioned("eigenvalue clustering did not stabilize");
}

// ---- regular core, exact path -------------------------------------------------

struct gq_poly {
    std::vector<gauss_rat> coeff;  // coeff[k] multiplies x^k

    int degree() const {
        for (int k = static_cast<int>(coeff.size()) - 1; k >= 0; --k)
            if (!coeff[k].is_zero()) return k;
        return -1;
    }
    gauss_rat eval(const gauss_rat& x) const {
        gauss_rat acc(0);
        for (int k = static_cast<int>(coeff.size()) - 1; k >= 0; --k) acc = acc * x + coeff[k];
        return acc;
    }
};

// det(R - x S) by evaluation at s+1 points and exact Lagrange interpolation.
inline gq_poly char_poly_exact(const gq_matrix& R, const gq_matrix& S) {
    const int s = R.rows;
    std::vector<gauss_rat> xs, vals;
    for (int t = 0; t <= s; ++t) {
        const gauss_rat x{bigrat(t)};
        gq_matrix M(s, s);
        for (int i = 0; i < s; ++i)
            for (int j = 0; j < s; ++j) M(i, j) = R(i, j) - x * S(i, j);
        xs.push_back(x);
        vals.push_back(gq_det(M));
    }
    gq_poly p;
    p.coeff.assign(s + 1, gauss_rat(0));
    for (int i = 0; i <= s; ++i) {
        // Lagrange basis polynomial for node i
        std::vector<gauss_rat> basis{gauss_rat(1)};
        gauss_rat denom(1);
        for (int j = 0; j <= s; ++j) {
            if (j == i) continue;
            std::vector<gauss_rat> next(basis.size() + 1, gauss_rat(0));
            for (std::size_t k = 0; k < basis.size(); ++k) {
                next[k + 1] = next[k + 1] + basis[k];
                next[k] = next[k] - xs[j] * basis[k];
            }
            basis = std::move(next);
            denom = denom * (xs[i] - xs[j]);
        }
        const gauss_rat w = vals[i] / denom;
        for (std::size_t k = 0; k < basis.size(); ++k) p.coeff[k] = p.coeff[k] + w * basis[k];
    }
    return p;
}

inline std::optional<bigrat> round_to_rational(double x, double tol = 1e-7,
                                               std::int64_t max_den = 1000000) {
    // continued-fraction convergents
    double v = x;
    std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    for (int it = 0; it < 40; ++it) {
        const double fl = std::floor(v);
        if (std::abs(fl) > 1e15) return std::nullopt;
        const auto a = static_cast<std::int64_t>(fl);
        const std::int64_t p2 = a * p1 + p0, q2 = a * q1 + q0;
        if (q2 > max_den || q2 < 0) return std::nullopt;
        p0 = p1; q0 = q1; p1 = p2; q1 = q2;
        const double approx = static_cast<double>(p1) / static_cast<double>(q1);
        if (std::abs(approx - x) <= tol * std::max(1.0, std::abs(x))) return bigrat(p1, q1);
        const double rem = v - fl;
        if (rem < 1e-15) break;
        v = 1.0 / rem;
    }
    return std::nullopt;
}

// Exact algebraic multiplicity of x0 in p via repeated synthetic division.
inline int root_multiplicity(gq_poly p, const gauss_rat& x0) {
    int mult = 0;
    while (p.degree() >= 1 && p.eval(x0).is_zero()) {
        const int d = p.degree();
        std::vector<gauss_rat> q(static_cast<std::size_t>(d), gauss_rat(0));
        gauss_rat carry(0);
        for (int k = d; k >= 1; --k) {
            carry = p.coeff[k] + carry * x0;
            q[k - 1] = carry;
        }
        p.coeff = q;
        ++mult;
    }
    return mult;
}

// Chain matrix for eigenvalue chains: block lower bidiagonal with the shifted
// pencil on the diagonal; its nullity is sum_j min(e_j, k).
inline gq_matrix chain_matrix(const gq_matrix& Ashift, const gq_matrix& B, int k) {
    const int s = Ashift.rows;
    gq_matrix L(k * s, k * s);
    for (int b = 0; b < k; ++b)
        for (int i = 0; i < s; ++i)
            for (int j = 0; j < s; ++j) {
                L(b * s + i, b * s + j) = Ashift(i, j);
                if (b > 0) L(b * s + i, (b - 1) * s + j) = -B(i, j);
            }
    return L;
}

inline std::vector<int> exact_signature(const gq_matrix& Ashift, const gq_matrix& B, int mult) {
    std::vector<int> weyr;
    int prev = 0;
    for (int k = 1; k <= mult + 1; ++k) {
        const gq_matrix L = chain_matrix(Ashift, B, k);
        const int nk = L.cols - gq_rank(L);
        weyr.push_back(nk - prev);
        prev = nk;
        if (nk == mult) break;
    }
    return segre_from_weyr(weyr);
}

inline std::optional<std::vector<eigenvalue_block>> core_eigs_exact(const gq_matrix& Rc,
                                                                    const gq_matrix& Sc,
                                                                    const kcf_options& opts) {
    const int s = Rc.rows;
    std::vector<eigenvalue_block> out;
    if (s == 0) return out;

    const gq_poly charpoly = char_poly_exact(Rc, Sc);
    const int deg = charpoly.degree();
    if (deg < 0) throw ill_conditioned("exact core is not regular");
    const int mult_inf = s - deg;

    // numeric candidates, then exact verification
    exact_pencil ep;
    ep.R = Rc;
    ep.S = Sc;
    const matrix_pencil pd = ep.to_double();
    std::vector<eigenvalue_block> numeric = core_eigs_float(pd.R, pd.S, opts);

    int accounted = mult_inf;
    for (const auto& blk : numeric) {
        if (blk.locus.is_infinite()) continue;
        const cd v = blk.locus.value();
        const auto re = round_to_rational(v.real());
        const auto im = round_to_rational(v.imag());
        if (!re || !im) return std::nullopt;
        const gauss_rat x0{*re, *im};
        const int amult = root_multiplicity(charpoly, x0);
        if (amult == 0) return std::nullopt;
        gq_matrix shift(s, s);
        for (int i = 0; i < s; ++i)
            for (int j = 0; j < s; ++j) shift(i, j) = Rc(i, j) - x0 * Sc(i, j);
        const std::vector<int> segre = exact_signature(shift, Sc, amult);
        if (std::accumulate(segre.begin(), segre.end(), 0) != amult) return std::nullopt;
        out.push_back({eigenvalue_locus::finite_exact(x0), segre});
        accounted += amult;
    }
    if (mult_inf > 0) {
        const std::vector<int> segre = exact_signature(Sc, Rc, mult_inf);
        if (std::accumulate(segre.begin(), segre.end(), 0) != mult_inf) return std::nullopt;
        out.push_back({eigenvalue_locus::infinity(), segre});
    }
    if (accounted != s) return std::nullopt;
    return out;
}

}  // namespace kcfdetail

// Computes the Kronecker structure of a pencil: minimal column/row indices by
// staircase rank reduction of generalized Sylvester stacks, then eigenvalues
// and size signatures of the square regular core.  Rank decisions threshold
// singular values at tol relative to the largest one.
inline kronecker_structure compute_kcf(const matrix_pencil& p, const kcf_options& opts) {
    using namespace kcfdetail;
    if (opts.tol <= 0) throw precondition_violated("compute_kcf: tol must be positive");
    const int m = p.rows(), n = p.cols();
    float_ops ops{opts.tol};

    // normal rank from a few random evaluation points
    std::mt19937_64 rng(opts.seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> g(0.0, 1.0);
    int normal_rank = 0;
    for (int t = 0; t < 3; ++t) {
        const cd mu{g(rng), g(rng)}, la{g(rng), g(rng)};
        const cmat E = p.eval(mu, la);
        Eigen::JacobiSVD<cmat> svd(E);
        const int small = nullity_checked(svd.singularValues(), opts.tol);
        normal_rank = std::max(normal_rank, static_cast<int>(std::min(m, n)) - small);
    }

    const std::vector<int> eps =
        right_minimal_indices(p.R, p.S, n, n - normal_rank, ops, "column");
    float_pencil cur{p.R, p.S};
    cur = deflate_right(cur, eps, ops);

    float_pencil curT{cur.R.transpose(), cur.S.transpose()};
    const std::vector<int> nus =
        right_minimal_indices(curT.R, curT.S, curT.cols(), m - normal_rank, ops, "row");
    curT = deflate_right(curT, nus, ops);

    if (curT.rows() != curT.cols())
        throw ill_conditioned("regular core is not square after deflation");
    const cmat Rc = curT.R.transpose();
    const cmat Sc = curT.S.transpose();

    std::vector<eigenvalue_block> eigs = core_eigs_float(Rc, Sc, opts);
    kronecker_structure ks(eps, nus, std::move(eigs));
    if (ks.m() != m || ks.n() != n)
        throw ill_conditioned("structure bookkeeping does not match pencil dimensions");
    return ks;
}

inline kronecker_structure compute_kcf(const matrix_pencil& p, double tol) {
    kcf_options opts;
    opts.tol = tol;
    return compute_kcf(p, opts);
}

// Exact-structural variant used on rational inputs (golden tables, DSL
// pencils): all rank decisions are tolerance-free.  Falls back to the
// floating pipeline only if a core eigenvalue is not Gaussian rational.
inline kronecker_structure compute_kcf_exact(const exact_pencil& p,
                                             const kcf_options& opts = kcf_options{}) {
    using namespace kcfdetail;
    const int m = p.rows(), n = p.cols();
    exact_ops ops;

    int normal_rank = 0;
    for (int t = 0; t <= std::min(m, n) + 1; ++t) {
        gq_matrix E(m, n);
        const gauss_rat q(bigrat(2 * t + 1), bigrat(2));  // distinct half-integers
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) E(i, j) = p.R(i, j) + q * p.S(i, j);
        normal_rank = std::max(normal_rank, gq_rank(E));
        if (normal_rank == std::min(m, n)) break;
    }

    const std::vector<int> eps =
        right_minimal_indices(p.R, p.S, n, n - normal_rank, ops, "column");
    auto [R1, S1] = eps.empty() ? std::pair<gq_matrix, gq_matrix>{p.R, p.S}
                                : gq_deflate_right(p.R, p.S, eps);

    gq_matrix R1t = gq_transpose(R1), S1t = gq_transpose(S1);
    const std::vector<int> nus =
        right_minimal_indices(R1t, S1t, R1t.cols, m - normal_rank, ops, "row");
    auto [R2t, S2t] = nus.empty() ? std::pair<gq_matrix, gq_matrix>{R1t, S1t}
                                  : gq_deflate_right(R1t, S1t, nus);

    if (R2t.rows != R2t.cols) throw ill_conditioned("exact regular core is not square");
    const gq_matrix Rc = gq_transpose(R2t), Sc = gq_transpose(S2t);

    auto eigs = core_eigs_exact(Rc, Sc, opts);
    if (!eigs) {
        // irrational eigenvalues: structure via the floating core
        exact_pencil core;
        core.R = Rc;
        core.S = Sc;
        const matrix_pencil pd = core.to_double();
        eigs = core_eigs_float(pd.R, pd.S, opts);
    }
    kronecker_structure ks(eps, nus, std::move(*eigs));
    if (ks.m() != m || ks.n() != n)
        throw ill_conditioned("exact structure bookkeeping mismatch");
    return ks;
}

}  // namespace slocc
