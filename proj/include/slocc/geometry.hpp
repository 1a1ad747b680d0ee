#pragma once

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "slocc/classify.hpp"
#include "slocc/kronecker.hpp"
#include "slocc/state_tensor.hpp"

namespace slocc {

// Unit vector on the sphere in spherical coordinates, with the eigenvalue
// multiplicity it carries.
struct weighted_vector {
    double theta = 0.0;  // [0, pi]
    double phi = 0.0;    // [0, 2*pi)
    int mult = 1;

    std::array<double, 3> cartesian() const {
        return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                std::cos(theta)};
    }
};

// x = e^{i phi} tan(theta/2): north pole is the eigenvalue 0, south pole
// is the point at infinity.
inline weighted_vector eigenvalue_to_vector(const eigenvalue_locus& x, int mult = 1) {
    weighted_vector v;
    v.mult = mult;
    if (x.is_infinite()) {
        v.theta = M_PI;
        v.phi = 0.0;
        return v;
    }
    const cd z = x.value();
    v.theta = 2.0 * std::atan(std::abs(z));
    v.phi = std::abs(z) == 0.0 ? 0.0 : std::arg(z);
    if (v.phi < 0) v.phi += 2.0 * M_PI;
    return v;
}

inline eigenvalue_locus vector_to_eigenvalue(const weighted_vector& v) {
    // homogeneous form [sin(theta/2) e^{i phi} : cos(theta/2)] avoids the
    // tangent pole at theta = pi
    const cd u = std::polar(std::sin(v.theta / 2.0), v.phi);
    const double w = std::cos(v.theta / 2.0);
    return locus_from_homogeneous(u, w, 1e-12);
}

// theta -> 2 arctan(tan(theta/2) / (1 - alpha)); the poles are fixed and
// every other polar angle strictly increases with alpha.
inline weighted_vector hinging(const weighted_vector& v, double alpha) {
    if (alpha < 0.0 || alpha >= 1.0) throw precondition_violated("hinging: alpha in [0,1)");
    weighted_vector out = v;
    if (v.theta == 0.0 || v.theta == M_PI) return out;
    out.theta = 2.0 * std::atan(std::tan(v.theta / 2.0) / (1.0 - alpha));
    return out;
}

namespace geo_detail {

// Matrix elements of the hinging-plus-rotation operator; with
// 1/(1-alpha) = e^t these are entire in (t, Theta, Phi).
struct moebius_coeffs {
    cd a, b, c, d;
    cd da_t, db_t, dc_t, dd_t;
    cd da_T, db_T, dc_T, dd_T;
    cd da_P, db_P, dc_P, dd_P;
};

inline moebius_coeffs hinge_coeffs(double t, double Theta, double Phi) {
    const double ch = std::cos(Theta / 2.0), sh = std::sin(Theta / 2.0);
    const cd em = std::polar(1.0, -Phi / 2.0), ep = std::polar(1.0, Phi / 2.0);
    const double gp = std::exp(t / 2.0), gm = std::exp(-t / 2.0);
    moebius_coeffs k;
    k.a = gp * em * ch;
    k.b = -gp * ep * sh;
    k.c = gm * em * sh;
    k.d = gm * ep * ch;
    k.da_t = 0.5 * k.a;
    k.db_t = 0.5 * k.b;
    k.dc_t = -0.5 * k.c;
    k.dd_t = -0.5 * k.d;
    k.da_T = -0.5 * gp * em * sh;
    k.db_T = -0.5 * gp * ep * ch;
    k.dc_T = 0.5 * gm * em * ch;
    k.dd_T = -0.5 * gm * ep * sh;
    const cd ihalf{0.0, 0.5};
    k.da_P = -ihalf * k.a;
    k.db_P = ihalf * k.b;
    k.dc_P = -ihalf * k.c;
    k.dd_P = ihalf * k.d;
    return k;
}

struct vec3 {
    double x = 0, y = 0, z = 0;
    vec3& operator+=(const vec3& o) {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }
    vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double norm2() const { return x * x + y * y + z * z; }
};

// Bloch vector of the transformed point [u' : w'] and its derivative wrt a
// parameter p, given (u', w') and their p-derivatives.
inline void bloch_and_derivative(cd u, cd w, cd du, cd dw, vec3& v, vec3& dv) {
    const double X = 2.0 * (u * std::conj(w)).real();
    const double Y = 2.0 * (u * std::conj(w)).imag();
    const double Z = std::norm(w) - std::norm(u);
    const double D = std::norm(w) + std::norm(u);
    const cd cross = du * std::conj(w) + u * std::conj(dw);
    const double dX = 2.0 * cross.real();
    const double dY = 2.0 * cross.imag();
    const double dw2 = 2.0 * (std::conj(w) * dw).real();
    const double du2 = 2.0 * (std::conj(u) * du).real();
    const double dZ = dw2 - du2;
    const double dD = dw2 + du2;
    v = {X / D, Y / D, Z / D};
    dv = {(dX - v.x * dD) / D, (dY - v.y * dD) / D, (dZ - v.z * dD) / D};
}

struct fval_grad {
    double f;
    std::array<double, 3> grad;  // d/dt, d/dTheta, d/dPhi
};

// f(t,Theta,Phi) = |sum_i m_i v'_i|^2 with its analytic gradient.
inline fval_grad imbalance_tp(const std::vector<weighted_vector>& vecs, double t, double Theta,
                              double Phi) {
    const moebius_coeffs k = hinge_coeffs(t, Theta, Phi);
    vec3 total;
    std::array<vec3, 3> dtotal;
    for (const auto& wv : vecs) {
        const cd u0 = std::polar(std::sin(wv.theta / 2.0), wv.phi);
        const cd w0 = std::cos(wv.theta / 2.0);
        const cd u = k.a * u0 + k.b * w0;
        const cd w = k.c * u0 + k.d * w0;
        const std::array<std::array<cd, 4>, 3> dcoef = {
            std::array<cd, 4>{k.da_t, k.db_t, k.dc_t, k.dd_t},
            std::array<cd, 4>{k.da_T, k.db_T, k.dc_T, k.dd_T},
            std::array<cd, 4>{k.da_P, k.db_P, k.dc_P, k.dd_P}};
        vec3 v;
        for (int p = 0; p < 3; ++p) {
            const cd du = dcoef[p][0] * u0 + dcoef[p][1] * w0;
            const cd dw = dcoef[p][2] * u0 + dcoef[p][3] * w0;
            vec3 dv;
            bloch_and_derivative(u, w, du, dw, v, dv);
            dtotal[p] += dv * static_cast<double>(wv.mult);
        }
        total += v * static_cast<double>(wv.mult);
    }
    fval_grad out;
    out.f = total.norm2();
    for (int p = 0; p < 3; ++p)
        out.grad[p] = 2.0 * (total.x * dtotal[p].x + total.y * dtotal[p].y +
                             total.z * dtotal[p].z);
    return out;
}

}  // namespace geo_detail

// Squared norm of the multiplicity-weighted sum after rotating every vector
// by R_y(Theta) R_z(Phi) and hinging with alpha.  Value lies in [0, n^2].
inline double imbalance(const std::vector<weighted_vector>& vecs, double alpha, double Theta,
                        double Phi) {
    if (alpha < 0.0 || alpha >= 1.0) throw precondition_violated("imbalance: alpha in [0,1)");
    const double t = -std::log1p(-alpha);  // 1/(1-alpha) = e^t
    return geo_detail::imbalance_tp(vecs, t, Theta, Phi).f;
}

inline std::array<double, 3> imbalance_gradient(const std::vector<weighted_vector>& vecs,
                                                double alpha, double Theta, double Phi) {
    const double t = -std::log1p(-alpha);
    return geo_detail::imbalance_tp(vecs, t, Theta, Phi).grad;
}

struct balance_result {
    double alpha = 0.0, Theta = 0.0, Phi = 0.0;
    double residual = 0.0;  // norm of the weighted vector sum at the solution
    std::vector<weighted_vector> balanced;
};

namespace geo_detail {

inline void validate_balance_input(const std::vector<weighted_vector>& vecs) {
    if (vecs.size() < 2) throw precondition_violated("balance: need at least two vectors");
    for (std::size_t i = 0; i < vecs.size(); ++i) {
        if (vecs[i].mult < 1) throw precondition_violated("balance: multiplicities must be >= 1");
        for (std::size_t j = i + 1; j < vecs.size(); ++j) {
            const auto xi = vector_to_eigenvalue(vecs[i]);
            const auto xj = vector_to_eigenvalue(vecs[j]);
            if (chordal_distance(xi, xj) <= 1e-9)
                throw precondition_violated("balance: vectors must be pairwise distinct");
        }
    }
    int m1 = 0, total = 0;
    for (const auto& v : vecs) {
        m1 = std::max(m1, v.mult);
        total += v.mult;
    }
    if (m1 >= total - m1)
        throw precondition_violated(
            "balance: dominant multiplicity must be smaller than the rest combined");
}

// Transformed vectors at a solution point.
inline std::vector<weighted_vector> transform_all(const std::vector<weighted_vector>& vecs,
                                                  double t, double Theta, double Phi) {
    const moebius_coeffs k = hinge_coeffs(t, Theta, Phi);
    std::vector<weighted_vector> out;
    out.reserve(vecs.size());
    for (const auto& wv : vecs) {
        const cd u0 = std::polar(std::sin(wv.theta / 2.0), wv.phi);
        const cd w0 = std::cos(wv.theta / 2.0);
        const cd u = k.a * u0 + k.b * w0;
        const cd w = k.c * u0 + k.d * w0;
        const double D = std::sqrt(std::norm(u) + std::norm(w));
        weighted_vector tv;
        tv.mult = wv.mult;
        tv.theta = 2.0 * std::atan2(std::abs(u), std::abs(w));
        tv.phi = std::arg(u * std::conj(w));
        if (std::abs(u * std::conj(w)) / (D * D) < 1e-300) tv.phi = 0.0;
        if (tv.phi < 0) tv.phi += 2.0 * M_PI;
        out.push_back(tv);
    }
    return out;
}

}  // namespace geo_detail

// Finds (alpha, Theta, Phi) with imbalance <= tol.  Requires the dominant
// multiplicity to be strictly smaller than the sum of the others; for the
// two-vector equal split use balanced_eigenvalues, which places antipodes.
// Strategy: Fibonacci-sphere grid over the rotation axis, then L-BFGS on
// (t, Theta, Phi) with the analytic gradient, t unconstrained via
// alpha = 1 - e^{-t}.
inline balance_result balance(const std::vector<weighted_vector>& vecs, double tol = 1e-12,
                              std::uint64_t seed = 0xb41a4cedULL) {
    geo_detail::validate_balance_input(vecs);
    using geo_detail::imbalance_tp;
    // tol bounds the norm of the weighted sum; the objective is its square
    const double f_target = tol * tol;

    struct point {
        double t, Theta, Phi, f;
    };
    constexpr int grid_nodes = 512;
    std::vector<point> starts;
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < grid_nodes; ++i) {
        const double z = 1.0 - 2.0 * (i + 0.5) / grid_nodes;
        const double Theta = std::acos(z);
        const double Phi = std::fmod(i * golden, 2.0 * M_PI);
        for (double t : {0.0, 0.7, 2.0}) {
            const double f = imbalance_tp(vecs, t, Theta, Phi).f;
            starts.push_back({t, Theta, Phi, f});
        }
    }
    std::sort(starts.begin(), starts.end(), [](const point& a, const point& b) { return a.f < b.f; });

    auto lbfgs = [&](point p0) {
        // two-loop recursion, memory 6, Armijo backtracking
        constexpr int mem = 6;
        std::array<std::array<double, 3>, mem> s_hist{}, y_hist{};
        std::array<double, 3> x{p0.t, p0.Theta, p0.Phi};
        auto fg = imbalance_tp(vecs, x[0], x[1], x[2]);
        int hist = 0;
        for (int iter = 0; iter < 200; ++iter) {
            if (fg.f <= std::max(f_target * 1e-2, 1e-30)) break;
            // descent direction from stored curvature pairs
            std::array<double, 3> q = fg.grad;
            std::array<double, mem> alpha_c{};
            const int avail = std::min(hist, mem);
            double gamma = 1.0;
            for (int h = 0; h < avail; ++h) {
                const int idx = (hist - 1 - h) % mem;
                double sy = 0, sq = 0;
                for (int d = 0; d < 3; ++d) {
                    sy += s_hist[idx][d] * y_hist[idx][d];
                    sq += s_hist[idx][d] * q[d];
                }
                if (std::abs(sy) < 1e-300) continue;
                alpha_c[idx] = sq / sy;
                for (int d = 0; d < 3; ++d) q[d] -= alpha_c[idx] * y_hist[idx][d];
            }
            if (avail > 0) {
                const int last = (hist - 1) % mem;
                double sy = 0, yy = 0;
                for (int d = 0; d < 3; ++d) {
                    sy += s_hist[last][d] * y_hist[last][d];
                    yy += y_hist[last][d] * y_hist[last][d];
                }
                if (yy > 1e-300) gamma = sy / yy;
            }
            for (double& qi : q) qi *= gamma;
            for (int h = avail - 1; h >= 0; --h) {
                const int idx = (hist - 1 - h) % mem;
                double yq = 0, sy = 0;
                for (int d = 0; d < 3; ++d) {
                    yq += y_hist[idx][d] * q[d];
                    sy += s_hist[idx][d] * y_hist[idx][d];
                }
                if (std::abs(sy) < 1e-300) continue;
                const double beta = yq / sy;
                for (int d = 0; d < 3; ++d) q[d] += (alpha_c[idx] - beta) * s_hist[idx][d];
            }
            double descent = 0;
            for (int d = 0; d < 3; ++d) descent += q[d] * fg.grad[d];
            if (descent <= 0) {  // fall back to plain gradient
                q = fg.grad;
                descent = 0;
                for (int d = 0; d < 3; ++d) descent += q[d] * q[d];
                if (descent <= 1e-300) break;
            }
            double step = 1.0;
            std::array<double, 3> xn{};
            geo_detail::fval_grad fgn{};
            bool accepted = false;
            for (int ls = 0; ls < 40; ++ls, step *= 0.5) {
                for (int d = 0; d < 3; ++d) xn[d] = x[d] - step * q[d];
                fgn = imbalance_tp(vecs, xn[0], xn[1], xn[2]);
                if (fgn.f <= fg.f - 1e-4 * step * descent) {
                    accepted = true;
                    break;
                }
            }
            if (!accepted) break;
            const int idx = hist % mem;
            for (int d = 0; d < 3; ++d) {
                s_hist[idx][d] = xn[d] - x[d];
                y_hist[idx][d] = fgn.grad[d] - fg.grad[d];
            }
            ++hist;
            x = xn;
            fg = fgn;
        }
        return point{x[0], x[1], x[2], fg.f};
    };

    point best{0, 0, 0, std::numeric_limits<double>::infinity()};
    const int refine = static_cast<int>(std::min<std::size_t>(12, starts.size()));
    for (int i = 0; i < refine && best.f > f_target; ++i) best = std::min(
        best, lbfgs(starts[i]), [](const point& a, const point& b) { return a.f < b.f; });

    // randomized restarts if the deterministic starts all stalled
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ut(0.0, 3.0), uT(0.0, M_PI), uP(0.0, 2.0 * M_PI);
    for (int r = 0; r < 60 && best.f > f_target; ++r) {
        point p{ut(rng), uT(rng), uP(rng), 0};
        best = std::min(best, lbfgs(p), [](const point& a, const point& b) { return a.f < b.f; });
    }

    if (best.f > f_target)
        throw ill_conditioned("balance: no configuration below tolerance found (best " +
                              std::to_string(std::sqrt(best.f)) + ")");

    // normalize t >= 0: hinging with negative t equals hinging along the
    // antipodal axis with -t
    if (best.t < 0) {
        best.t = -best.t;
        best.Theta = M_PI - best.Theta;
        best.Phi = std::fmod(best.Phi + M_PI, 2.0 * M_PI);
        best.f = imbalance_tp(vecs, best.t, best.Theta, best.Phi).f;
    }
    balance_result out;
    out.alpha = 1.0 - std::exp(-best.t);
    out.Theta = best.Theta;
    out.Phi = best.Phi;
    out.residual = std::sqrt(best.f);
    out.balanced = geo_detail::transform_all(vecs, best.t, best.Theta, best.Phi);
    return out;
}

// 2 x n x n state of the standard diagonal form built from balanced
// (theta_i, phi_i); critical exactly when the weighted vectors sum to zero.
inline state_tensor critical_diag_state(const std::vector<weighted_vector>& vecs,
                                        double tol = 1e-10) {
    geo_detail::vec3 total;
    int n = 0;
    for (const auto& v : vecs) {
        const auto c = v.cartesian();
        total += geo_detail::vec3{c[0], c[1], c[2]} * static_cast<double>(v.mult);
        n += v.mult;
    }
    if (std::sqrt(total.norm2()) > tol)
        throw precondition_violated("critical_diag_state: weighted vector sum is not zero");
    Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(2 * n * n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    int slot = 0;
    for (const auto& v : vecs)
        for (int rep = 0; rep < v.mult; ++rep, ++slot) {
            amps((0 * n + slot) * n + slot) = scale * std::polar(std::sin(v.theta / 2.0), v.phi);
            amps((1 * n + slot) * n + slot) = scale * std::cos(v.theta / 2.0);
        }
    return state_tensor(n, n, amps);
}

// The unique critical state of the 2 x m x (m+1) system.
inline state_tensor critical_2m_mplus1(int m) {
    if (m < 2) throw precondition_violated("critical_2m_mplus1: needs m >= 2 (dims must be >= 2)");
    const int n = m + 1;
    Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(2 * m * n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(m + 1));
    for (int k = 0; k < m; ++k) {
        amps((0 * m + k) * n + k) = scale * std::sqrt(static_cast<double>(m - k) / m);
        amps((1 * m + k) * n + (k + 1)) = scale * std::sqrt(static_cast<double>(k + 1) / m);
    }
    return state_tensor(m, n, amps);
}

// Critical state of 2 x m x n for (n-m) | m: the 2 x m/(n-m) x (m/(n-m)+1)
// critical state tensored with a maximally entangled pair on the remaining
// factors, written on the merged B = (B1 B2), C = (C1 C2) legs.
inline state_tensor critical_tensor_product(int m, int n) {
    if (n <= m) throw precondition_violated("critical_tensor_product: needs n > m");
    const int d = n - m;
    if (m % d != 0) throw precondition_violated("critical_tensor_product: (n-m) must divide m");
    const int eps = m / d;
    if (eps < 2) {
        // m/(n-m) = 1: the inner factor is the 2 x 1 x 2 chain, handled inline
        Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(2 * m * n);
        const double scale = 1.0 / std::sqrt(2.0 * d);
        for (int j2 = 0; j2 < d; ++j2) {
            amps((0 * m + j2) * n + (1 * d + j2)) = scale;
            amps((1 * m + j2) * n + (0 * d + j2)) = scale;
        }
        return state_tensor(m, n, amps);
    }
    const state_tensor inner = critical_2m_mplus1(eps);
    Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(2 * m * n);
    const double pair_scale = 1.0 / std::sqrt(static_cast<double>(d));
    for (int i = 0; i < 2; ++i)
        for (int j1 = 0; j1 < eps; ++j1)
            for (int k1 = 0; k1 < eps + 1; ++k1) {
                const cd v = inner.amp(i, j1, k1);
                if (v == cd{0.0, 0.0}) continue;
                for (int j2 = 0; j2 < d; ++j2) {
                    const int j = j1 * d + j2;
                    const int k = k1 * d + j2;
                    amps((i * m + j) * n + k) = v * pair_scale;
                }
            }
    return state_tensor(m, n, amps);
}

// Eigenvalue loci (in multiplicity order) whose weighted Bloch vectors sum
// to zero, for any polystable multiplicity pattern.
inline std::vector<eigenvalue_locus> balanced_eigenvalues(const std::vector<int>& multiplicities,
                                                          double tol = 1e-10,
                                                          std::uint64_t seed = 0xb41a4cedULL) {
    std::vector<int> mults = multiplicities;
    std::sort(mults.rbegin(), mults.rend());
    const int l = static_cast<int>(mults.size());
    if (l < 2) throw precondition_violated("balanced_eigenvalues: need at least two loci");
    const int n = std::accumulate(mults.begin(), mults.end(), 0);
    const orbit_type t = classify_detail::diagonal_type(mults, n);
    if (!is_polystable(t))
        throw precondition_violated("balanced_eigenvalues: multiplicity pattern is not polystable");

    if (l == 2) {  // equal pair: antipodal solution
        return {eigenvalue_locus::finite_exact(gauss_rat(0)), eigenvalue_locus::infinity()};
    }
    // distinct starting directions on a Fibonacci spiral
    std::vector<weighted_vector> seeds;
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < l; ++i) {
        weighted_vector v;
        const double z = 1.0 - 2.0 * (i + 0.5) / l;
        v.theta = std::acos(z);
        v.phi = std::fmod(i * golden, 2.0 * M_PI);
        v.mult = mults[i];
        seeds.push_back(v);
    }
    const balance_result res = balance(seeds, tol, seed);
    std::vector<eigenvalue_locus> out;
    out.reserve(res.balanced.size());
    for (const auto& v : res.balanced) out.push_back(vector_to_eigenvalue(v));
    return out;
}

}  // namespace slocc
