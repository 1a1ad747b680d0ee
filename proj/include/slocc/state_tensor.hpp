#pragma once

#include <Eigen/Dense>
#include <complex>
#include <utility>

#include "slocc/errors.hpp"
#include "slocc/kronecker.hpp"

namespace slocc {

// Dense amplitudes of a pure 2 x m x n state, indexed (i,j,k) row-major.
// States are kept unnormalized; the vector norm is tracked explicitly
// because the normal-form iteration uses norm decrease as a signal.
// Immutable after construction.
class state_tensor {
public:
    state_tensor(int m, int n, Eigen::VectorXcd amps) : m_(m), n_(n), amps_(std::move(amps)) {
        if (m_ < 1 || n_ < 1) throw precondition_violated("state_tensor: dims must be positive");
        if (amps_.size() != 2 * m_ * n_)
            throw dimension_mismatch("state_tensor: amplitude count != 2*m*n");
        if (amps_.norm() == 0.0) throw precondition_violated("state_tensor: zero vector");
    }

    int m() const { return m_; }
    int n() const { return n_; }

    cd amp(int i, int j, int k) const { return amps_((i * m_ + j) * n_ + k); }
    const Eigen::VectorXcd& amps() const { return amps_; }
    double norm() const { return amps_.norm(); }

    state_tensor normalized() const {
        return state_tensor(m_, n_, Eigen::VectorXcd(amps_ / amps_.norm()));
    }

    // Slice of amplitudes with fixed first index, as an m x n matrix.
    cmat slice(int i) const {
        cmat s(m_, n_);
        for (int j = 0; j < m_; ++j)
            for (int k = 0; k < n_; ++k) s(j, k) = amp(i, j, k);
        return s;
    }

private:
    int m_, n_;
    Eigen::VectorXcd amps_;
};

enum class party { A, B, C };

// Triple of local operators with cached determinants; sl() reports whether
// all three sit in the determinant-one group.
class local_operator_triple {
public:
    local_operator_triple(cmat2 A, cmat B, cmat C)
        : A_(std::move(A)), B_(std::move(B)), C_(std::move(C)) {
        if (B_.rows() != B_.cols() || C_.rows() != C_.cols())
            throw dimension_mismatch("local_operator_triple: B, C must be square");
        det_A_ = A_.determinant();
        det_B_ = B_.determinant();
        det_C_ = C_.determinant();
    }

    static local_operator_triple identity(int m, int n) {
        return local_operator_triple(cmat2::Identity(), cmat::Identity(m, m),
                                     cmat::Identity(n, n));
    }

    const cmat2& A() const { return A_; }
    const cmat& B() const { return B_; }
    const cmat& C() const { return C_; }
    cd det_A() const { return det_A_; }
    cd det_B() const { return det_B_; }
    cd det_C() const { return det_C_; }

    bool sl(double tol = 1e-10) const {
        return std::abs(det_A_ - 1.0) <= tol && std::abs(det_B_ - 1.0) <= tol &&
               std::abs(det_C_ - 1.0) <= tol;
    }

private:
    cmat2 A_;
    cmat B_, C_;
    cd det_A_, det_B_, det_C_;
};

// Single-party reduced density matrix, Hermitian PSD with trace = ||psi||^2.
inline cmat reduced_density(const state_tensor& s, party p) {
    const int m = s.m(), n = s.n();
    switch (p) {
        case party::A: {
            cmat rho = cmat::Zero(2, 2);
            for (int i = 0; i < 2; ++i)
                for (int i2 = 0; i2 < 2; ++i2)
                    for (int j = 0; j < m; ++j)
                        for (int k = 0; k < n; ++k)
                            rho(i, i2) += s.amp(i, j, k) * std::conj(s.amp(i2, j, k));
            return rho;
        }
        case party::B: {
            cmat rho = cmat::Zero(m, m);
            for (int j = 0; j < m; ++j)
                for (int j2 = 0; j2 < m; ++j2)
                    for (int i = 0; i < 2; ++i)
                        for (int k = 0; k < n; ++k)
                            rho(j, j2) += s.amp(i, j, k) * std::conj(s.amp(i, j2, k));
            return rho;
        }
        case party::C: {
            cmat rho = cmat::Zero(n, n);
            for (int k = 0; k < n; ++k)
                for (int k2 = 0; k2 < n; ++k2)
                    for (int i = 0; i < 2; ++i)
                        for (int j = 0; j < m; ++j)
                            rho(k, k2) += s.amp(i, j, k) * std::conj(s.amp(i, j, k2));
            return rho;
        }
    }
    throw precondition_violated("reduced_density: bad party");
}

// (A ⊗ B ⊗ C)|psi>, contracted one leg at a time.
inline state_tensor apply_local(const state_tensor& s, const local_operator_triple& ops) {
    const int m = s.m(), n = s.n();
    if (ops.B().rows() != m || ops.C().rows() != n)
        throw dimension_mismatch("apply_local: operator dims do not match state");

    // C leg: row vectors of each slice.
    Eigen::VectorXcd t1(2 * m * n);
    for (int i = 0; i < 2; ++i) {
        cmat si = s.slice(i) * ops.C().transpose();
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < n; ++k) t1((i * m + j) * n + k) = si(j, k);
    }
    // B leg.
    Eigen::VectorXcd t2(2 * m * n);
    for (int i = 0; i < 2; ++i) {
        cmat si(m, n);
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < n; ++k) si(j, k) = t1((i * m + j) * n + k);
        cmat bi = ops.B() * si;
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < n; ++k) t2((i * m + j) * n + k) = bi(j, k);
    }
    // A leg mixes the two slices.
    Eigen::VectorXcd out(2 * m * n);
    for (int j = 0; j < m; ++j)
        for (int k = 0; k < n; ++k) {
            const cd a0 = t2((0 * m + j) * n + k);
            const cd a1 = t2((1 * m + j) * n + k);
            out((0 * m + j) * n + k) = ops.A()(0, 0) * a0 + ops.A()(0, 1) * a1;
            out((1 * m + j) * n + k) = ops.A()(1, 0) * a0 + ops.A()(1, 1) * a1;
        }
    return state_tensor(m, n, std::move(out));
}

namespace detail {

inline Eigen::VectorXd rho_eigenvalues(const cmat& rho) {
    Eigen::SelfAdjointEigenSolver<cmat> es(rho, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

}  // namespace detail

// True iff every single-party reduced state has full numerical rank:
// all eigenvalues exceed tol times the largest one.
inline bool is_fully_entangled(const state_tensor& s, double tol = 1e-9) {
    if (tol <= 0) throw precondition_violated("is_fully_entangled: tol must be positive");
    for (party p : {party::A, party::B, party::C}) {
        const Eigen::VectorXd ev = detail::rho_eigenvalues(reduced_density(s, p));
        const double top = ev(ev.size() - 1);
        if (top <= 0.0) return false;
        if (ev(0) <= tol * top) return false;
    }
    return true;
}

// True iff every reduced state is proportional to the identity:
// ||rho_i - (tr rho_i / d_i) I||_F <= tol for each party.
inline bool is_critical(const state_tensor& s, double tol = 1e-9) {
    if (tol <= 0) throw precondition_violated("is_critical: tol must be positive");
    for (party p : {party::A, party::B, party::C}) {
        const cmat rho = reduced_density(s, p);
        const int d = static_cast<int>(rho.rows());
        const cmat dev = rho - (rho.trace() / static_cast<double>(d)) * cmat::Identity(d, d);
        if (dev.norm() > tol) return false;
    }
    return true;
}

// Frobenius deviation of the worst party from the maximally mixed state,
// normalized by the trace; the normal-form iteration monitors this.
inline double criticality_deviation(const state_tensor& s) {
    double worst = 0.0;
    for (party p : {party::A, party::B, party::C}) {
        const cmat rho = reduced_density(s, p);
        const int d = static_cast<int>(rho.rows());
        const double tr = rho.trace().real();
        if (tr <= 0.0) return std::numeric_limits<double>::infinity();
        const cmat dev = rho - (tr / d) * cmat::Identity(d, d);
        worst = std::max(worst, dev.norm() / tr);
    }
    return worst;
}

}  // namespace slocc
