#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "manakov/spectral.hpp"

namespace manakov {

// A point of y^2 = R(z); the sheet lives in y and is never recomputed from z.
struct CurvePoint {
    cplx z, y;
};

struct Divisor {
    CurvePoint p1, p2;

    Divisor swapped() const { return {p2, p1}; }
    Divisor involuted() const { return {{p1.z, -p1.y}, {p2.z, -p2.y}}; }
};

inline cplx curve_R(cplx z, const Moduli& m) {
    cplx r = 1.0;
    for (const auto& e : m.d) r *= z - e;
    return r;
}

inline CurvePoint point_on_curve(cplx z, const Moduli& m, int sheet = 1) {
    return {z, double(sheet) * std::sqrt(curve_R(z, m))};
}

// c~_j = 1/((d_j - d_k)(d_j - d_l)), c_j = (d_j - d_4) c~_j, j = 1..3 stored at 0..2.
struct ModuliConstants {
    Vec3<cplx> c{}, ct{}, sqrt_c{};

    explicit ModuliConstants(const Moduli& m) {
        for (const auto& [j, k, l] : kCyclic) {
            const cplx dj = m.d[j + 1];
            ct[j] = 1.0 / ((dj - m.d[k + 1]) * (dj - m.d[l + 1]));
            c[j] = (dj - m.d[4]) * ct[j];
            sqrt_c[j] = std::sqrt(c[j]);
        }
    }
};

// P_j = sqrt(z1 - d_j) sqrt(z2 - d_j), principal root of each factor.
inline cplx p_single(int j, const Divisor& D, const Moduli& m) {
    if (j < 0 || j > 4) throw IndexOutOfRange("p_single index " + std::to_string(j));
    return std::sqrt(D.p1.z - m.d[j]) * std::sqrt(D.p2.z - m.d[j]);
}

inline double diagonal_threshold(const Divisor& D) { return 1e-8 * std::max(1e-300, std::abs(D.p1.z)); }

inline cplx p_pair(int j, int k, const Divisor& D, const Moduli& m) {
    if (j < 0 || j > 4 || k < 0 || k > 4 || j == k) throw IndexOutOfRange("p_pair indices");
    const cplx z1 = D.p1.z, z2 = D.p2.z;
    if (std::abs(z1 - z2) < diagonal_threshold(D)) throw DiagonalDivisor("z1 == z2");
    const cplx t1 = D.p1.y / ((z1 - m.d[j]) * (z1 - m.d[k]));
    const cplx t2 = D.p2.y / ((z2 - m.d[j]) * (z2 - m.d[k]));
    return p_single(j, D, m) * p_single(k, D, m) / (z1 - z2) * (t1 - t2);
}

// The seven functions that enter the uniformisation. pkl[j] is P_kl for cyclic (j,k,l).
struct WurzelValues {
    cplx p0;
    Vec3<cplx> pj4{}, pkl{};

    // P_0 with the sign fixed by sum c~_j P_j4 P_kl = -P_0.
    cplx signed_p0(const ModuliConstants& mc) const {
        cplx s = 0;
        for (int j = 0; j < 3; ++j) s += mc.ct[j] * pj4[j] * pkl[j];
        return -s;
    }
};

inline WurzelValues wurzel_values(const Divisor& D, const Moduli& m) {
    WurzelValues w;
    w.p0 = p_single(0, D, m);
    for (const auto& [j, k, l] : kCyclic) {
        w.pj4[j] = p_pair(j + 1, 4, D, m);
        w.pkl[j] = p_pair(k + 1, l + 1, D, m);
    }
    return w;
}

// Residuals are |lhs - rhs| divided by the largest term magnitude.
struct IdentityReport {
    double probe_sum = 0;          // sum c_j (P_kl^2/((s-d_k)(s-d_l)) + P_j4^2/((s-d_j)(s-d_4)))
                                   //   = s prod_{j<4}(d_j - d_4) / prod_{j=1..4}(s - d_j)
    double probe_sum_literal = 0;  // same identity with the bare right side s / prod (s - d_j)
    double ct_pj4_sq = 0;          // sum c~_j P_j4^2 = d_4
    double d_ct_pkl_sq = 0;        // sum d_j c~_j P_kl^2 = P_0^2
    double c_cross = 0;            // sum c_j P_j4 P_kl = 0
    double ct_cross_abs = 0;       // |sum c~_j P_j4 P_kl| = |P_0|
    int ct_cross_sign = 0;         // +1 when sum c~_j P_j4 P_kl = -P_0, -1 when = +P_0
    double quadric_sum = 0;        // sum c_j (P_j4^2 / d_j + d_j P_kl^2) = 0
};

namespace detail {
struct RelSum {
    cplx sum = 0;
    double mag = 0;
    void add(cplx t) {
        sum += t;
        mag = std::max(mag, std::abs(t));
    }
    double residual(cplx rhs) const { return std::abs(sum - rhs) / std::max({mag, std::abs(rhs), 1e-300}); }
};
}  // namespace detail

inline IdentityReport identity_suite(const Divisor& D, const Moduli& m, cplx s) {
    const ModuliConstants mc(m);
    const auto w = wurzel_values(D, m);
    const auto& d = m.d;
    IdentityReport rep;

    detail::RelSum probe, a, b, c1, c2, q;
    for (const auto& [j, k, l] : kCyclic) {
        const int J = j + 1, K = k + 1, L = l + 1;
        probe.add(mc.c[j] * w.pkl[j] * w.pkl[j] / ((s - d[K]) * (s - d[L])));
        probe.add(mc.c[j] * w.pj4[j] * w.pj4[j] / ((s - d[J]) * (s - d[4])));
        a.add(mc.ct[j] * w.pj4[j] * w.pj4[j]);
        b.add(d[J] * mc.ct[j] * w.pkl[j] * w.pkl[j]);
        c1.add(mc.c[j] * w.pj4[j] * w.pkl[j]);
        c2.add(mc.ct[j] * w.pj4[j] * w.pkl[j]);
        q.add(mc.c[j] * (w.pj4[j] * w.pj4[j] / d[J] + d[J] * w.pkl[j] * w.pkl[j]));
    }
    cplx den = 1.0, norm = 1.0;
    for (int j = 1; j <= 4; ++j) den *= s - d[j];
    for (int j = 1; j <= 3; ++j) norm *= d[j] - d[4];
    rep.probe_sum = probe.residual(s * norm / den);
    rep.probe_sum_literal = probe.residual(s / den);
    rep.ct_pj4_sq = a.residual(d[4]);
    rep.d_ct_pkl_sq = b.residual(w.p0 * w.p0);
    rep.c_cross = c1.residual(0.0);
    const double r_minus = c2.residual(-w.p0), r_plus = c2.residual(w.p0);
    rep.ct_cross_sign = r_minus <= r_plus ? 1 : -1;
    rep.ct_cross_abs = std::min(r_minus, r_plus);
    rep.quadric_sum = q.residual(0.0);
    return rep;
}

// Forward map: xi_j = sqrt(c_j) g sigma_kl P_kl, eta_j = sqrt(c_j) g sigma_j4 P_j4, where the
// sigma are products of the per-index signs in `signs` (index 0 is d_1 ... index 3 is d_4).
struct SignPattern {
    std::array<int, 4> s{1, 1, 1, 1};

    int pair(int p, int q) const { return s[p - 1] * s[q - 1]; }
};

inline XiEta forward_map(const Divisor& D, const Moduli& m, cplx g, const SignPattern& sp = {}) {
    const ModuliConstants mc(m);
    const auto w = wurzel_values(D, m);
    XiEta x;
    for (const auto& [j, k, l] : kCyclic) {
        x.xi[j] = mc.sqrt_c[j] * g * double(sp.pair(k + 1, l + 1)) * w.pkl[j];
        x.eta[j] = mc.sqrt_c[j] * g * double(sp.pair(j + 1, 4)) * w.pj4[j];
    }
    return x;
}

struct Recovery {
    Divisor D;
    cplx g;
    SignPattern signs;
    double residual = 0;  // relative mismatch of the forward map
    int candidates = 1;   // distinct divisors that fit (involution pairs counted once)
};

namespace detail {

inline double forward_mismatch(const Divisor& D, const Moduli& m, cplx g, const SignPattern& sp, const XiEta& x) {
    const auto f = forward_map(D, m, g, sp);
    double num = 0, den = 0;
    for (int j = 0; j < 3; ++j) {
        num = std::max({num, std::abs(f.xi[j] - x.xi[j]), std::abs(f.eta[j] - x.eta[j])});
        den = std::max({den, std::abs(x.xi[j]), std::abs(x.eta[j])});
    }
    return num / std::max(den, 1e-300);
}

// Given z1, z2, g and a sign pattern the six equations are linear in (y1, y2).
inline std::optional<std::pair<cplx, cplx>> solve_y(cplx z1, cplx z2, cplx g, const Moduli& m,
                                                    const ModuliConstants& mc, const SignPattern& sp,
                                                    const XiEta& x) {
    Eigen::Matrix<cplx, 6, 2> A;
    Eigen::Matrix<cplx, 6, 1> b;
    auto Pj = [&](int j) { return std::sqrt(z1 - m.d[j]) * std::sqrt(z2 - m.d[j]); };
    int row = 0;
    for (const auto& [j, k, l] : kCyclic) {
        const std::array<std::pair<int, int>, 2> idx{{{k + 1, l + 1}, {j + 1, 4}}};
        const std::array<cplx, 2> val{x.xi[j] / mc.sqrt_c[j], x.eta[j] / mc.sqrt_c[j]};
        for (int t = 0; t < 2; ++t) {
            const auto [p, q] = idx[t];
            const cplx pre = g * double(sp.pair(p, q)) * Pj(p) * Pj(q) / (z1 - z2);
            A(row, 0) = pre / ((z1 - m.d[p]) * (z1 - m.d[q]));
            A(row, 1) = -pre / ((z2 - m.d[p]) * (z2 - m.d[q]));
            b(row) = val[t];
            ++row;
        }
    }
    if (!A.allFinite()) return std::nullopt;
    const Eigen::Vector2cd y = A.colPivHouseholderQr().solve(b);
    return std::pair{y(0), y(1)};
}

// Gauss-Newton on (z1, y1, z2, y2, g) using the six forward equations and both curve equations.
inline void polish(Recovery& r, const Moduli& m, const XiEta& x) {
    auto residual = [&](const Eigen::Matrix<cplx, 5, 1>& v) {
        Eigen::Matrix<cplx, 8, 1> out;
        const Divisor D{{v(0), v(1)}, {v(2), v(3)}};
        const auto f = forward_map(D, m, v(4), r.signs);
        for (int j = 0; j < 3; ++j) {
            out(2 * j) = f.xi[j] - x.xi[j];
            out(2 * j + 1) = f.eta[j] - x.eta[j];
        }
        out(6) = (v(1) * v(1) - curve_R(v(0), m)) / std::max(1.0, std::abs(curve_R(v(0), m)));
        out(7) = (v(3) * v(3) - curve_R(v(2), m)) / std::max(1.0, std::abs(curve_R(v(2), m)));
        return out;
    };
    Eigen::Matrix<cplx, 5, 1> v;
    v << r.D.p1.z, r.D.p1.y, r.D.p2.z, r.D.p2.y, r.g;
    double best = residual(v).norm();
    for (int it = 0; it < 8 && best > 0; ++it) {
        Eigen::Matrix<cplx, 8, 5> J;
        const auto f0 = residual(v);
        for (int c = 0; c < 5; ++c) {
            const double h = 1e-7 * std::max(1.0, std::abs(v(c)));
            auto vp = v;
            vp(c) += h;
            J.col(c) = (residual(vp) - f0) / h;
        }
        const Eigen::Matrix<cplx, 5, 1> step = J.colPivHouseholderQr().solve(-f0);
        const auto cand = v + step;
        const double nrm = residual(cand).norm();
        if (!(nrm < best)) break;
        v = cand;
        best = nrm;
    }
    r.D = {{v(0), v(1)}, {v(2), v(3)}};
    r.g = v(4);
}

}  // namespace detail

// Inverse of the forward map. The quadrics give z1 + z2 = sum c~ P_kl^2 + d_4 and
// z1 z2 = P_0^2 in closed form; y1, y2 follow from a linear solve; a Gauss-Newton
// pass removes rounding. `prev` seeds the g sign, point order and sheet by continuity.
inline Recovery recover_divisor(const XiEta& x, const Moduli& m, const Recovery* prev = nullptr,
                                double tol = 1e-8) {
    const ModuliConstants mc(m);
    Vec3<cplx> X, Y;
    for (int j = 0; j < 3; ++j) {
        X[j] = x.xi[j] / mc.sqrt_c[j];
        Y[j] = x.eta[j] / mc.sqrt_c[j];
    }
    cplx g2 = 0, S = 0, Pd = 0;
    for (int j = 0; j < 3; ++j) g2 += mc.ct[j] * Y[j] * Y[j];
    g2 /= m.d[4];
    if (std::abs(g2) == 0) throw NoConvergence("g^2 vanishes");
    cplx g = std::sqrt(g2);
    if (prev && std::abs(g - prev->g) > std::abs(g + prev->g)) g = -g;
    for (int j = 0; j < 3; ++j) {
        S += mc.ct[j] * X[j] * X[j] / g2;
        Pd += m.d[j + 1] * mc.ct[j] * X[j] * X[j] / g2;
    }
    S += m.d[4];
    const cplx disc = std::sqrt(S * S - 4.0 * Pd);
    cplx z1 = 0.5 * (S + disc), z2 = 0.5 * (S - disc);
    if (std::abs(z1 - z2) < 1e-8 * std::max(1e-300, std::abs(z1))) throw DiagonalDivisor("recovered z1 == z2");
    if (prev && std::abs(z1 - prev->D.p1.z) + std::abs(z2 - prev->D.p2.z) >
                    std::abs(z1 - prev->D.p2.z) + std::abs(z2 - prev->D.p1.z))
        std::swap(z1, z2);

    std::vector<Recovery> fits;
    for (int mask = 0; mask < 8; ++mask) {
        SignPattern sp{{1, (mask & 1) ? -1 : 1, (mask & 2) ? -1 : 1, (mask & 4) ? -1 : 1}};
        const auto y = detail::solve_y(z1, z2, g, m, mc, sp, x);
        if (!y) continue;
        Recovery r{{{z1, y->first}, {z2, y->second}}, g, sp, 0.0, 1};
        r.residual = detail::forward_mismatch(r.D, m, g, sp, x);
        if (std::isfinite(r.residual)) fits.push_back(r);
    }
    if (fits.empty()) throw NoConvergence("no sign pattern produced a finite solution");
    std::sort(fits.begin(), fits.end(), [](const auto& p, const auto& q) { return p.residual < q.residual; });

    Recovery best = fits.front();
    detail::polish(best, m, x);
    best.residual = detail::forward_mismatch(best.D, m, best.g, best.signs, x);
    if (!(best.residual <= tol)) throw NoConvergence("forward mismatch " + std::to_string(best.residual));

    // Other patterns fitting equally well but with a different divisor are a genuine ambiguity.
    int distinct = 1;
    for (std::size_t i = 1; i < fits.size(); ++i) {
        if (fits[i].residual > 1e3 * std::max(fits.front().residual, 1e-14)) break;
        const bool same = std::abs(fits[i].D.p1.y - best.D.p1.y) + std::abs(fits[i].D.p2.y - best.D.p2.y) <=
                          1e-6 * (std::abs(best.D.p1.y) + std::abs(best.D.p2.y));
        if (!same) ++distinct;
    }
    best.candidates = distinct;
    if (distinct > 1 && !prev) throw AmbiguousSolution(std::to_string(distinct) + " divisors fit the data");
    return best;
}

// Constants of H0 = C (1 - eps P_0)^2 g^2 on the quadrics, determined by evaluating the
// normal form on synthetic divisors (P_0 signed as in WurzelValues::signed_p0).
struct UniformizationConstants {
    cplx epsilon;
    cplx C;
    double square_defect = 0;  // |w2/w0 - eps^2| / |eps^2|; zero when the quadratic is a perfect square
    double fit_residual = 0;
};

inline UniformizationConstants uniformization_constants(const NormalForm& nf, const Moduli& m,
                                                        const std::vector<Divisor>& samples) {
    if (samples.size() < 3) throw DomainError("need at least three divisors");
    const ModuliConstants mc(m);
    Eigen::MatrixXcd A(samples.size(), 3);
    Eigen::VectorXcd y(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto w = wurzel_values(samples[i], m);
        cplx q = 0;
        for (int j = 0; j < 3; ++j)
            q += mc.c[j] * (nf.A[j] * (w.pkl[j] * w.pkl[j] - w.pj4[j] * w.pj4[j]) + nf.B[j] * w.pkl[j] * w.pj4[j]);
        const cplx p0 = w.signed_p0(mc);
        A(i, 0) = 1.0;
        A(i, 1) = p0;
        A(i, 2) = p0 * p0;
        y(i) = q;
    }
    const Eigen::Vector3cd w = A.colPivHouseholderQr().solve(y);
    UniformizationConstants u;
    u.C = w(0);
    u.epsilon = -w(1) / (2.0 * w(0));
    u.square_defect = std::abs(w(2) / w(0) - u.epsilon * u.epsilon) / std::max(1e-300, std::abs(u.epsilon * u.epsilon));
    u.fit_residual = (A * w - y).cwiseAbs().maxCoeff() / std::max(1e-300, y.cwiseAbs().maxCoeff());
    return u;
}

}  // namespace manakov
