#pragma once

#include <Eigen/Dense>
#include <vector>

#include "slocc/kronecker.hpp"
#include "slocc/state_tensor.hpp"

namespace slocc {

// Pair (R, S) of m x n complex matrices housing the pencil mu*R + lambda*S.
struct matrix_pencil {
    cmat R, S;

    matrix_pencil(cmat R_, cmat S_) : R(std::move(R_)), S(std::move(S_)) {
        if (R.rows() != S.rows() || R.cols() != S.cols())
            throw dimension_mismatch("matrix_pencil: R and S must share dimensions");
        if (R.norm() == 0.0 && S.norm() == 0.0)
            throw precondition_violated("matrix_pencil: R and S both zero");
    }

    int rows() const { return static_cast<int>(R.rows()); }
    int cols() const { return static_cast<int>(R.cols()); }

    cmat eval(cd mu, cd lambda) const { return mu * R + lambda * S; }
};

// Exact counterpart over Q(i) for tolerance-free structural decisions.
template <class T>
struct simple_matrix {
    int rows = 0, cols = 0;
    std::vector<T> data;

    simple_matrix() = default;
    simple_matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c) {}

    T& operator()(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
    const T& operator()(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }
};

using gq_matrix = simple_matrix<gauss_rat>;

struct exact_pencil {
    gq_matrix R, S;

    int rows() const { return R.rows; }
    int cols() const { return R.cols; }

    matrix_pencil to_double() const {
        cmat Rd(R.rows, R.cols), Sd(R.rows, R.cols);
        for (int i = 0; i < R.rows; ++i)
            for (int j = 0; j < R.cols; ++j) {
                Rd(i, j) = R(i, j).to_complex();
                Sd(i, j) = S(i, j).to_complex();
            }
        return matrix_pencil(std::move(Rd), std::move(Sd));
    }
};

// R holds the |0> slice and S the |1> slice of the state.
inline matrix_pencil pencil_from_state(const state_tensor& s) {
    return matrix_pencil(s.slice(0), s.slice(1));
}

namespace detail {

// Writes one canonical block into (R, S) at offset (r0, c0) and advances it.
template <class Mat, class One>
void emit_l_block(Mat& R, Mat& S, int& r0, int& c0, int eps, const One& one) {
    for (int i = 0; i < eps; ++i) {
        S(r0 + i, c0 + i) = one;      // lambda on the diagonal
        R(r0 + i, c0 + i + 1) = one;  // mu on the superdiagonal
    }
    r0 += eps;
    c0 += eps + 1;
}

template <class Mat, class One>
void emit_lt_block(Mat& R, Mat& S, int& r0, int& c0, int nu, const One& one) {
    for (int i = 0; i < nu; ++i) {
        S(r0 + i, c0 + i) = one;
        R(r0 + i + 1, c0 + i) = one;
    }
    r0 += nu + 1;
    c0 += nu;
}

template <class Mat, class Scalar, class One>
void emit_m_block(Mat& R, Mat& S, int& r0, int& c0, int size, bool infinite, const Scalar& x,
                  const One& one) {
    for (int i = 0; i < size; ++i) {
        if (infinite) {
            R(r0 + i, c0 + i) = one;  // N-block: mu diagonal, lambda superdiagonal
            if (i + 1 < size) S(r0 + i, c0 + i + 1) = one;
        } else {
            R(r0 + i, c0 + i) = x;  // x*mu + lambda diagonal, mu superdiagonal
            S(r0 + i, c0 + i) = one;
            if (i + 1 < size) R(r0 + i, c0 + i + 1) = one;
        }
    }
    r0 += size;
    c0 += size;
}

}  // namespace detail

// Block-diagonal pencil realizing the structure exactly, blocks in order:
// L's, L^T's, then the eigenvalue blocks in stored order.
inline matrix_pencil kcf_to_pencil(const kronecker_structure& ks) {
    const int m = ks.m(), n = ks.n();
    cmat R = cmat::Zero(m, n), S = cmat::Zero(m, n);
    int r0 = 0, c0 = 0;
    const cd one{1.0, 0.0};
    for (int eps : ks.col_indices()) detail::emit_l_block(R, S, r0, c0, eps, one);
    for (int nu : ks.row_indices()) detail::emit_lt_block(R, S, r0, c0, nu, one);
    for (const auto& e : ks.eigs()) {
        const bool inf = e.locus.is_infinite();
        const cd x = inf ? cd{0.0, 0.0} : e.locus.value();
        for (int size : e.signature) detail::emit_m_block(R, S, r0, c0, size, inf, x, one);
    }
    return matrix_pencil(std::move(R), std::move(S));
}

// Exact variant; requires every finite locus to carry an exact value.
inline exact_pencil kcf_to_pencil_exact(const kronecker_structure& ks) {
    const int m = ks.m(), n = ks.n();
    exact_pencil p;
    p.R = gq_matrix(m, n);
    p.S = gq_matrix(m, n);
    int r0 = 0, c0 = 0;
    const gauss_rat one(1);
    for (int eps : ks.col_indices()) detail::emit_l_block(p.R, p.S, r0, c0, eps, one);
    for (int nu : ks.row_indices()) detail::emit_lt_block(p.R, p.S, r0, c0, nu, one);
    for (const auto& e : ks.eigs()) {
        const bool inf = e.locus.is_infinite();
        gauss_rat x;
        if (!inf) {
            if (!e.locus.exact())
                throw precondition_violated("kcf_to_pencil_exact: locus without exact value");
            x = *e.locus.exact();
        }
        for (int size : e.signature) detail::emit_m_block(p.R, p.S, r0, c0, size, inf, x, one);
    }
    return p;
}

// Canonical state whose pencil is the canonical pencil of ks.
inline state_tensor representative_state(const kronecker_structure& ks) {
    const matrix_pencil p = kcf_to_pencil(ks);
    const int m = p.rows(), n = p.cols();
    Eigen::VectorXcd amps(2 * m * n);
    for (int j = 0; j < m; ++j)
        for (int k = 0; k < n; ++k) {
            amps((0 * m + j) * n + k) = p.R(j, k);
            amps((1 * m + j) * n + k) = p.S(j, k);
        }
    return state_tensor(m, n, std::move(amps));
}

}  // namespace slocc
