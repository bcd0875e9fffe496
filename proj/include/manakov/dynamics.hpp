#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "manakov/core.hpp"

namespace manakov {

// dl/dt = L W - W L with W_ij = c_ij l_ij.
template <class T>
Momentum<T> euler_frahm_rhs(const Momentum<T>& l, const Mat4& c) {
    const auto L = l.matrix();
    Eigen::Matrix<T, 4, 4> W = L;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) W(i, j) *= c(i, j);
    const Eigen::Matrix<T, 4, 4> D = L * W - W * L;
    Momentum<T> out;
    for (int s = 0; s < 6; ++s) out[s] = D(kPairs[s].first, kPairs[s].second);
    return out;
}

enum class Method { rk4, midpoint };

inline std::string to_string(Method m) { return m == Method::rk4 ? "rk4" : "midpoint"; }

inline State rk4_step(const State& l, const Mat4& c, double dt) {
    const State k1 = euler_frahm_rhs(l, c);
    const State k2 = euler_frahm_rhs(l + (dt / 2) * k1, c);
    const State k3 = euler_frahm_rhs(l + (dt / 2) * k2, c);
    const State k4 = euler_frahm_rhs(l + dt * k3, c);
    return l + (dt / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Implicit midpoint by fixed-point iteration; contraction holds for dt * |c| * |l| << 1.
inline State midpoint_step(const State& l, const Mat4& c, double dt) {
    State next = rk4_step(l, c, dt);
    for (int it = 0; it < 100; ++it) {
        const State mid = 0.5 * (l + next);
        const State upd = l + dt * euler_frahm_rhs(mid, c);
        const double diff = (upd - next).norm_inf();
        next = upd;
        if (diff <= 1e-16 * std::max(1.0, next.norm_inf())) break;
    }
    return next;
}

struct Trajectory {
    std::vector<double> times;
    std::vector<State> states;
    double dt = 0;
    Method method = Method::rk4;

    std::size_t size() const { return times.size(); }
};

// Fixed-step integration; every `stride`-th step is stored.
inline Trajectory integrate(const State& l0, const Mat4& c, double t_end, double dt,
                            Method method = Method::rk4, int stride = 1) {
    if (!(dt > 0) || !(t_end > 0) || stride < 1)
        throw DomainError("integrate: need dt > 0, t_end > 0, stride >= 1");
    const auto steps = static_cast<long>(std::llround(t_end / dt));
    Trajectory tr;
    tr.dt = dt;
    tr.method = method;
    tr.times.reserve(steps / stride + 1);
    tr.states.reserve(steps / stride + 1);
    tr.times.push_back(0.0);
    tr.states.push_back(l0);
    State l = l0;
    for (long k = 1; k <= steps; ++k) {
        l = method == Method::rk4 ? rk4_step(l, c, dt) : midpoint_step(l, c, dt);
        if (!l.finite()) throw NonFiniteState("at step " + std::to_string(k));
        if (k % stride == 0) {
            tr.times.push_back(static_cast<double>(k) * dt);
            tr.states.push_back(l);
        }
    }
    return tr;
}

// max_k |H_k(t) - H_k(0)| / scale along the trajectory.
inline std::array<double, 4> integral_drift(const Trajectory& tr, const std::array<double, 4>& a) {
    const auto h0 = integrals(tr.states.front(), a);
    const double sc = h0.scale();
    const auto ref = h0.as_array();
    std::array<double, 4> out{};
    for (const auto& s : tr.states) {
        const auto h = integrals(s, a).as_array();
        for (int k = 0; k < 4; ++k) out[k] = std::max(out[k], std::abs(h[k] - ref[k]) / sc);
    }
    return out;
}

// ---- spectral parameter: l(s), m(s), f(s) and the 3x3 Lax pair ----

inline cplx s_pair(cplx s, const std::array<double, 4>& a, int j, int k) { return (s - a[j]) * (s - a[k]); }

inline cplx G_of(cplx s, const std::array<double, 4>& a) {
    return (s - a[0]) * (s - a[1]) * (s - a[2]) * (s - a[3]);
}

// Square-root factors at a fixed s: u_j = sqrt(s_j4) (principal), v_j = sqrt(G)/u_j,
// so that u_j v_j = sqrt(G) for every j and sign(sqrt G) = branch.
struct SpectralRoots {
    Vec3<cplx> u{}, v{};
};

// Factors for the Lax pair from w_i = sqrt(s - a_i), with w_4 carrying the sheet. The
// commutator identity holds only when an odd number of the u_j = +-w_j w_4 carry a minus
// sign (v_j = sqrt(G)/u_j); roots of the products taken independently get this wrong
// on part of the s-plane. We use u_j = -w_j w_4, v_j = -w_k w_l.
inline SpectralRoots lax_roots(cplx s, const std::array<double, 4>& a, int branch) {
    std::array<cplx, 4> w;
    for (int i = 0; i < 4; ++i) w[i] = std::sqrt(s - a[i]);
    w[3] *= static_cast<double>(branch);
    SpectralRoots r;
    for (const auto& [j, k, l] : kCyclic) {
        r.u[j] = -w[j] * w[3];
        r.v[j] = -w[k] * w[l];
    }
    return r;
}

inline SpectralRoots spectral_roots(cplx s, const std::array<double, 4>& a, int branch) {
    SpectralRoots r;
    const cplx sg = static_cast<double>(branch) * std::sqrt(G_of(s, a));
    for (int j = 0; j < 3; ++j) {
        r.u[j] = std::sqrt(s_pair(s, a, j, 3));
        r.v[j] = sg / r.u[j];
    }
    return r;
}

// l_j(s) = sqrt(s_j4) m_j + sqrt(s_kl) n_j.
template <class T>
Vec3<cplx> l_of_s(const SpectralRoots& r, const Momentum<T>& l) {
    const auto m = l.m();
    const auto n = l.n();
    Vec3<cplx> out;
    for (int j = 0; j < 3; ++j) out[j] = r.u[j] * cplx(m[j]) + r.v[j] * cplx(n[j]);
    return out;
}

// m_j(s) = sqrt(s_kl) m_j + sqrt(s_j4) n_j.
template <class T>
Vec3<cplx> m_of_s(const SpectralRoots& r, const Momentum<T>& l) {
    const auto m = l.m();
    const auto n = l.n();
    Vec3<cplx> out;
    for (int j = 0; j < 3; ++j) out[j] = r.v[j] * cplx(m[j]) + r.u[j] * cplx(n[j]);
    return out;
}

// f(s) = sum_j (s_j4 m_j^2 + s_kl n_j^2) + 2 branch h0 sqrt(G(s)).
inline cplx generating_function_f(cplx s, const State& l, const std::array<double, 4>& a, int branch) {
    const auto m = l.m();
    const auto n = l.n();
    cplx poly = 0;
    for (const auto& [j, k, q] : kCyclic) poly += s_pair(s, a, j, 3) * m[j] * m[j] + s_pair(s, a, k, q) * n[j] * n[j];
    const double h0 = integrals(l, a).h0;
    return poly + 2.0 * static_cast<double>(branch) * h0 * std::sqrt(G_of(s, a));
}

inline cplx generating_polynomial(cplx s, const IntegralLevels& h) { return h.h1 * s * s - h.h2 * s + h.h3; }

using CMat3 = Eigen::Matrix3cd;

// Antisymmetric matrix with X_12 = x_3, X_13 = -x_2, X_23 = x_1.
inline CMat3 lax_matrix(const Vec3<cplx>& x) {
    CMat3 X;
    X << 0.0, x[2], -x[1], -x[2], 0.0, x[0], x[1], -x[0], 0.0;
    return X;
}

struct LaxMatrices {
    CMat3 L, M;
};

inline LaxMatrices lax_pair(cplx s, const State& l, const std::array<double, 4>& a, int branch = 1) {
    const auto r = lax_roots(s, a, branch);
    return {lax_matrix(l_of_s(r, l)), lax_matrix(m_of_s(r, l))};
}

// max over interior samples of |dL/dt - [L, M]| with a centred five-point stencil.
// The square-root factors depend on s and a only, so they are fixed once for the
// whole trajectory; the check below only guards against a non-uniform time grid.
inline double lax_residual(const Trajectory& tr, const std::array<double, 4>& a, cplx s, int branch = 1) {
    const std::size_t n = tr.size();
    if (n < 5) throw DomainError("lax_residual: need at least five samples");
    const double h = tr.times[1] - tr.times[0];
    for (std::size_t k = 1; k < n; ++k)
        if (std::abs(tr.times[k] - tr.times[k - 1] - h) > 1e-9 * h)
            throw BranchDiscontinuity("non-uniform sampling breaks the finite-difference stencil");
    const auto r = lax_roots(s, a, branch);
    std::vector<CMat3> L(n), M(n);
    for (std::size_t k = 0; k < n; ++k) {
        L[k] = lax_matrix(l_of_s(r, tr.states[k]));
        M[k] = lax_matrix(m_of_s(r, tr.states[k]));
    }
    double worst = 0;
    for (std::size_t k = 2; k + 2 < n; ++k) {
        const CMat3 dL = (L[k - 2] - 8.0 * L[k - 1] + 8.0 * L[k + 1] - L[k + 2]) / (12.0 * h);
        const CMat3 res = dL - (L[k] * M[k] - M[k] * L[k]);
        worst = std::max(worst, res.cwiseAbs().maxCoeff());
    }
    return worst;
}

}  // namespace manakov
