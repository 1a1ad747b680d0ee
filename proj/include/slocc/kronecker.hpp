#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <optional>
#include <vector>

#include "slocc/errors.hpp"
#include "slocc/rational.hpp"

namespace slocc {

using cd = std::complex<double>;
using cmat = Eigen::MatrixXcd;
using cmat2 = Eigen::Matrix2cd;

// A point on the Riemann sphere: a pencil eigenvalue, possibly infinite.
// Finite values are kept exactly as given; an optional exact Q(i) value
// travels along when the locus came from a rational source (DSL, tables).
class eigenvalue_locus {
public:
    eigenvalue_locus() = default;

    static eigenvalue_locus finite(cd value) {
        eigenvalue_locus x;
        x.infinite_ = false;
        x.value_ = value;
        return x;
    }
    static eigenvalue_locus finite_exact(const gauss_rat& value) {
        eigenvalue_locus x;
        x.infinite_ = false;
        x.value_ = value.to_complex();
        x.exact_ = value;
        return x;
    }
    static eigenvalue_locus infinity() {
        eigenvalue_locus x;
        x.infinite_ = true;
        x.exact_ = gauss_rat{};  // exactness of the point at infinity is free
        return x;
    }

    bool is_infinite() const { return infinite_; }
    cd value() const {
        if (infinite_) throw precondition_violated("locus: value() on infinity");
        return value_;
    }
    const std::optional<gauss_rat>& exact() const { return exact_; }

    // Homogeneous coordinates [u : w]; infinity is [1 : 0].
    std::pair<cd, cd> homogeneous() const {
        return infinite_ ? std::pair<cd, cd>{1.0, 0.0} : std::pair<cd, cd>{value_, 1.0};
    }

    bool operator==(const eigenvalue_locus& o) const {
        if (infinite_ != o.infinite_) return false;
        return infinite_ || value_ == o.value_;
    }
    bool operator!=(const eigenvalue_locus& o) const { return !(*this == o); }

private:
    bool infinite_ = false;
    cd value_{0.0, 0.0};
    std::optional<gauss_rat> exact_;
};

// Chordal distance on the Riemann sphere; treats infinity symmetrically
// and is invariant under unitary Moebius maps.
inline double chordal_distance(const eigenvalue_locus& a, const eigenvalue_locus& b) {
    const auto [u1, w1] = a.homogeneous();
    const auto [u2, w2] = b.homogeneous();
    const double cross = std::abs(u1 * w2 - u2 * w1);
    const double n1 = std::sqrt(std::norm(u1) + std::norm(w1));
    const double n2 = std::sqrt(std::norm(u2) + std::norm(w2));
    return cross / (n1 * n2);
}

inline eigenvalue_locus locus_from_homogeneous(cd u, cd w, double tol_inf = 1e-12) {
    const double scale = std::sqrt(std::norm(u) + std::norm(w));
    if (scale == 0.0) throw precondition_violated("locus: [0:0] is not a point");
    if (std::abs(w) <= tol_inf * scale) return eigenvalue_locus::infinity();
    return eigenvalue_locus::finite(u / w);
}

// One eigenvalue together with its size signature e_1 >= e_2 >= ... >= 1.
struct eigenvalue_block {
    eigenvalue_locus locus;
    std::vector<int> signature;

    int multiplicity() const { return std::accumulate(signature.begin(), signature.end(), 0); }
};

namespace detail {

inline bool signature_lex_greater(const std::vector<int>& a, const std::vector<int>& b) {
    return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
}

// mult desc, signature lex desc, finite before infinite, then by value.
inline bool eig_block_order(const eigenvalue_block& a, const eigenvalue_block& b) {
    const int ma = a.multiplicity(), mb = b.multiplicity();
    if (ma != mb) return ma > mb;
    if (a.signature != b.signature) return signature_lex_greater(a.signature, b.signature);
    if (a.locus.is_infinite() != b.locus.is_infinite()) return !a.locus.is_infinite();
    if (a.locus.is_infinite()) return false;
    const cd va = a.locus.value(), vb = b.locus.value();
    if (va.real() != vb.real()) return va.real() < vb.real();
    return va.imag() < vb.imag();
}

}  // namespace detail

// Symbolic Kronecker canonical form of a fully entangled pencil:
// minimal column/row indices plus eigenvalue loci with size signatures.
// N-blocks are represented as M-blocks at the infinite eigenvalue.
class kronecker_structure {
public:
    kronecker_structure() = default;

    kronecker_structure(std::vector<int> col_indices, std::vector<int> row_indices,
                        std::vector<eigenvalue_block> eigs)
        : cols_(std::move(col_indices)), rows_(std::move(row_indices)), eigs_(std::move(eigs)) {
        normalize();
        validate();
    }

    const std::vector<int>& col_indices() const { return cols_; }
    const std::vector<int>& row_indices() const { return rows_; }
    const std::vector<eigenvalue_block>& eigs() const { return eigs_; }

    int regular_size() const {
        int t = 0;
        for (const auto& e : eigs_) t += e.multiplicity();
        return t;
    }
    int m() const {
        int v = regular_size();
        for (int e : cols_) v += e;
        for (int e : rows_) v += e + 1;
        return v;
    }
    int n() const {
        int v = regular_size();
        for (int e : cols_) v += e + 1;
        for (int e : rows_) v += e;
        return v;
    }

    int distinct_eigenvalues() const { return static_cast<int>(eigs_.size()); }

    // Multiplicities in descending order.
    std::vector<int> multiplicities() const {
        std::vector<int> ms;
        ms.reserve(eigs_.size());
        for (const auto& e : eigs_) ms.push_back(e.multiplicity());
        std::sort(ms.rbegin(), ms.rend());
        return ms;
    }

    bool is_diagonal() const {
        if (!cols_.empty() || !rows_.empty()) return false;
        for (const auto& e : eigs_)
            for (int s : e.signature)
                if (s != 1) return false;
        return true;
    }

    // Same structure with every signature flattened to [1,...,1]; this is
    // the pencil obtained by deleting all off-diagonal entries.
    kronecker_structure diagonal_reduct() const {
        if (!cols_.empty() || !rows_.empty())
            throw precondition_violated("diagonal_reduct: structure has minimal indices");
        std::vector<eigenvalue_block> red;
        red.reserve(eigs_.size());
        for (const auto& e : eigs_)
            red.push_back({e.locus, std::vector<int>(static_cast<std::size_t>(e.multiplicity()), 1)});
        return kronecker_structure({}, {}, std::move(red));
    }

    bool operator==(const kronecker_structure& o) const {
        if (cols_ != o.cols_ || rows_ != o.rows_ || eigs_.size() != o.eigs_.size()) return false;
        for (std::size_t i = 0; i < eigs_.size(); ++i)
            if (eigs_[i].signature != o.eigs_[i].signature || eigs_[i].locus != o.eigs_[i].locus)
                return false;
        return true;
    }
    bool operator!=(const kronecker_structure& o) const { return !(*this == o); }

private:
    void normalize() {
        std::sort(cols_.begin(), cols_.end());
        std::sort(rows_.begin(), rows_.end());
        for (auto& e : eigs_) std::sort(e.signature.rbegin(), e.signature.rend());
        std::sort(eigs_.begin(), eigs_.end(), detail::eig_block_order);
    }

    void validate() const {
        for (int e : cols_)
            if (e < 1) throw precondition_violated("kronecker_structure: column index < 1");
        for (int e : rows_)
            if (e < 1) throw precondition_violated("kronecker_structure: row index < 1");
        for (const auto& e : eigs_) {
            if (e.signature.empty())
                throw precondition_violated("kronecker_structure: empty signature");
            for (int s : e.signature)
                if (s < 1) throw precondition_violated("kronecker_structure: block size < 1");
        }
        for (std::size_t i = 0; i < eigs_.size(); ++i)
            for (std::size_t j = i + 1; j < eigs_.size(); ++j)
                if (chordal_distance(eigs_[i].locus, eigs_[j].locus) <= 1e-12)
                    throw precondition_violated("kronecker_structure: coinciding eigenvalue loci");
        if (cols_.empty() && rows_.empty() && eigs_.empty())
            throw precondition_violated("kronecker_structure: empty structure");
    }

    std::vector<int> cols_;
    std::vector<int> rows_;
    std::vector<eigenvalue_block> eigs_;
};

// --- Moebius transformations -------------------------------------------------

inline eigenvalue_locus moebius_apply(const cmat2& A, const eigenvalue_locus& x) {
    const auto [u, w] = x.homogeneous();
    return locus_from_homogeneous(A(0, 0) * u + A(0, 1) * w, A(1, 0) * u + A(1, 1) * w);
}

// Eigenvalues move under the first party's operator; minimal indices and
// size signatures do not.
inline kronecker_structure moebius_on_kcf(const kronecker_structure& ks, const cmat2& A) {
    const cd det = A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0);
    if (std::abs(det) < 1e-14)
        throw precondition_violated("moebius_on_kcf: singular coefficient matrix");
    std::vector<eigenvalue_block> eigs;
    eigs.reserve(ks.eigs().size());
    for (const auto& e : ks.eigs()) eigs.push_back({moebius_apply(A, e.locus), e.signature});
    return kronecker_structure(ks.col_indices(), ks.row_indices(), std::move(eigs));
}

// Moebius map sending three pairwise distinct points p1,p2,p3 to q1,q2,q3,
// assembled in homogeneous coordinates so infinities need no special case.
inline cmat2 moebius_through(const std::array<eigenvalue_locus, 3>& p,
                             const std::array<eigenvalue_locus, 3>& q) {
    auto standardize = [](const std::array<eigenvalue_locus, 3>& pts) {
        // Maps pts to (0, 1, infinity).
        const auto [u1, w1] = pts[0].homogeneous();
        const auto [u2, w2] = pts[1].homogeneous();
        const auto [u3, w3] = pts[2].homogeneous();
        const cd s = u2 * w3 - u3 * w2;
        const cd t = u2 * w1 - u1 * w2;
        cmat2 M;
        M << s * w1, -s * u1, t * w3, -t * u3;
        return M;
    };
    const cmat2 P = standardize(p);
    const cmat2 Q = standardize(q);
    const cd det = Q(0, 0) * Q(1, 1) - Q(0, 1) * Q(1, 0);
    if (std::abs(det) == 0.0)
        throw precondition_violated("moebius_through: target points not distinct");
    cmat2 Qinv;
    Qinv << Q(1, 1), -Q(0, 1), -Q(1, 0), Q(0, 0);
    return cmat2(Qinv * P);
}

namespace detail {

inline bool match_loci_onto(const cmat2& A, const kronecker_structure& a,
                            const kronecker_structure& b, double tol) {
    std::vector<bool> used(b.eigs().size(), false);
    for (const auto& ea : a.eigs()) {
        const eigenvalue_locus image = moebius_apply(A, ea.locus);
        bool found = false;
        for (std::size_t j = 0; j < b.eigs().size(); ++j) {
            if (used[j] || b.eigs()[j].signature != ea.signature) continue;
            if (chordal_distance(image, b.eigs()[j].locus) <= tol) {
                used[j] = true;
                found = true;
                break;
            }
        }
        if (!found) return false;
    }
    return true;
}

}  // namespace detail

// Decides whether two structures describe the same SLOCC class: minimal
// indices agree and some Moebius map carries the eigenvalue loci of `a`
// onto those of `b` with identical signatures.  Decided by anchoring
// three loci of `a` to candidate images in `b`; with fewer than three
// loci the free parameters always suffice and only the signature
// multisets matter.
inline bool moebius_equivalent(const kronecker_structure& a, const kronecker_structure& b,
                               double tol = 1e-8) {
    if (a.col_indices() != b.col_indices() || a.row_indices() != b.row_indices()) return false;
    if (a.eigs().size() != b.eigs().size()) return false;

    auto signature_multiset = [](const kronecker_structure& ks) {
        std::vector<std::vector<int>> sigs;
        for (const auto& e : ks.eigs()) sigs.push_back(e.signature);
        std::sort(sigs.begin(), sigs.end());
        return sigs;
    };
    if (signature_multiset(a) != signature_multiset(b)) return false;

    const std::size_t l = a.eigs().size();
    if (l <= 2) return true;  // two point constraints never pin a Moebius map down

    const std::array<eigenvalue_locus, 3> anchors = {a.eigs()[0].locus, a.eigs()[1].locus,
                                                     a.eigs()[2].locus};
    for (std::size_t i = 0; i < l; ++i) {
        if (b.eigs()[i].signature != a.eigs()[0].signature) continue;
        for (std::size_t j = 0; j < l; ++j) {
            if (j == i || b.eigs()[j].signature != a.eigs()[1].signature) continue;
            for (std::size_t k = 0; k < l; ++k) {
                if (k == i || k == j || b.eigs()[k].signature != a.eigs()[2].signature) continue;
                const cmat2 A = moebius_through(
                    anchors, {b.eigs()[i].locus, b.eigs()[j].locus, b.eigs()[k].locus});
                const cd det = A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0);
                if (std::abs(det) < 1e-300) continue;
                if (detail::match_loci_onto(A, a, b, tol)) return true;
            }
        }
    }
    return false;
}

// Structural equality with a chordal tolerance on the loci (used to compare
// a computed KCF against an expected one without demanding bit equality).
inline bool same_structure(const kronecker_structure& a, const kronecker_structure& b,
                           double tol = 1e-8) {
    if (a.col_indices() != b.col_indices() || a.row_indices() != b.row_indices()) return false;
    if (a.eigs().size() != b.eigs().size()) return false;
    std::vector<bool> used(b.eigs().size(), false);
    for (const auto& ea : a.eigs()) {
        bool found = false;
        for (std::size_t j = 0; j < b.eigs().size(); ++j) {
            if (used[j] || b.eigs()[j].signature != ea.signature) continue;
            if (chordal_distance(ea.locus, b.eigs()[j].locus) <= tol) {
                used[j] = true;
                found = true;
                break;
            }
        }
        if (!found) return false;
    }
    return true;
}

}  // namespace slocc
