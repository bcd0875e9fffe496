#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "manakov/core.hpp"
#include "manakov/dynamics.hpp"

namespace manakov {

// Monic quartic F(s) = [(h1 s^2 - h2 s + h3)^2 - 4 h0^2 G(s)] / (h1^2 - 4 h0^2),
// coefficients highest degree first.
inline std::array<double, 5> quartic_coefficients(const IntegralLevels& h, const std::array<double, 4>& a) {
    const double den = h.h1 * h.h1 - 4 * h.h0 * h.h0;
    if (std::abs(den) <= 1e-14 * std::max(1.0, h.h1 * h.h1))
        throw DegenerateLevel("h1^2 = 4 h0^2");
    // G(s) = s^4 - e1 s^3 + e2 s^2 - e3 s + e4
    double e1 = 0, e2 = 0, e3 = 0, e4 = a[0] * a[1] * a[2] * a[3];
    for (int i = 0; i < 4; ++i) {
        e1 += a[i];
        for (int j = i + 1; j < 4; ++j) {
            e2 += a[i] * a[j];
            for (int k = j + 1; k < 4; ++k) e3 += a[i] * a[j] * a[k];
        }
    }
    const double p2 = h.h1, p1 = -h.h2, p0 = h.h3;
    const double q0 = 4 * h.h0 * h.h0;
    std::array<double, 5> c{p2 * p2 - q0,          2 * p2 * p1 + q0 * e1, p1 * p1 + 2 * p2 * p0 - q0 * e2,
                            2 * p1 * p0 + q0 * e3, p0 * p0 - q0 * e4};
    for (auto& x : c) x /= den;
    return c;
}

template <std::size_t N>
cplx horner(const std::array<double, N>& c, cplx s) {
    cplx r = 0;
    for (double x : c) r = r * s + x;
    return r;
}

inline std::array<double, 4> derivative(const std::array<double, 5>& c) {
    return {4 * c[0], 3 * c[1], 2 * c[2], c[3]};
}

struct QuarticRoots {
    std::array<cplx, 4> s{};
    double residual = 0;  // max |F(s_p)|
};

// Companion-matrix eigenvalues, Newton polish, lexicographic sort, then the first
// conjugate pair is moved to the front with the upper-half-plane member first.
inline QuarticRoots quartic_roots(const IntegralLevels& h, const std::array<double, 4>& a,
                                  double separation = 1e-6) {
    const auto c = quartic_coefficients(h, a);
    const auto dc = derivative(c);
    Eigen::Matrix4cd comp = Eigen::Matrix4cd::Zero();
    for (int i = 0; i < 4; ++i) comp(0, i) = -c[i + 1] / c[0];
    for (int i = 1; i < 4; ++i) comp(i, i - 1) = 1.0;
    Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(comp, false);
    std::array<cplx, 4> r;
    for (int i = 0; i < 4; ++i) {
        cplx s = es.eigenvalues()(i);
        for (int it = 0; it < 8; ++it) {
            const cplx d = horner(dc, s);
            if (std::abs(d) == 0) break;
            const cplx step = horner(c, s) / d;
            s -= step;
            if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(s))) break;
        }
        r[i] = s;
    }
    std::sort(r.begin(), r.end(), [](cplx x, cplx y) {
        return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
    });
    double rscale = 1.0;
    for (const auto& x : r) rscale = std::max(rscale, std::abs(x));
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            if (std::abs(r[i] - r[j]) < separation * rscale) throw RepeatedRoot("roots closer than separation threshold");
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            if (std::abs(r[i] - std::conj(r[j])) > 1e-8 * rscale || std::abs(r[i].imag()) < 1e-8 * rscale) continue;
            std::array<cplx, 4> o;
            o[0] = r[i].imag() > 0 ? r[i] : r[j];
            o[1] = r[i].imag() > 0 ? r[j] : r[i];
            int n = 2;
            for (int k = 0; k < 4; ++k)
                if (k != i && k != j) o[n++] = r[k];
            r = o;
            i = j = 4;
        }
    // The second pair of a real quartic has equal real parts up to rounding, which the
    // lexicographic sort cannot order reliably; put its upper member first as well.
    if (std::abs(r[2] - std::conj(r[3])) <= 1e-8 * rscale && r[2].imag() < r[3].imag()) std::swap(r[2], r[3]);
    QuarticRoots out{r, 0.0};
    for (const auto& s : r) out.residual = std::max(out.residual, std::abs(horner(c, s)));
    return out;
}

// l^(p) = U[p] .* m + V[p] .* n, with U, V depending on the integrals only.
struct IsotropicFrame {
    std::array<Vec3<cplx>, 4> U{}, V{};
    std::array<int, 4> branch{};  // sign of sqrt(G(s_p)) that annihilates f(s_p)
    double isotropy = 0;          // max |l^(p) . l^(p)| at the construction state
};

template <class T>
Vec3<cplx> apply(const Vec3<cplx>& u, const Vec3<cplx>& v, const Momentum<T>& l) {
    const auto m = l.m();
    const auto n = l.n();
    Vec3<cplx> out;
    for (int j = 0; j < 3; ++j) out[j] = u[j] * cplx(m[j]) + v[j] * cplx(n[j]);
    return out;
}

inline cplx dot(const Vec3<cplx>& x, const Vec3<cplx>& y) { return x[0] * y[0] + x[1] * y[1] + x[2] * y[2]; }

inline IsotropicFrame isotropic_vectors(const State& l, const std::array<double, 4>& a, const QuarticRoots& roots,
                                        double tol) {
    const auto dc = derivative(quartic_coefficients(integrals(l, a), a));
    IsotropicFrame fr;
    for (int p = 0; p < 4; ++p) {
        const cplx s = roots.s[p];
        const cplx fp = horner(dc, s);
        if (std::abs(fp) == 0) throw RepeatedRoot("F'(s_p) = 0");
        const cplx sf = std::sqrt(fp);
        double best = INFINITY;
        for (int br : {1, -1}) {
            const auto r = spectral_roots(s, a, br);
            Vec3<cplx> u, v;
            for (int j = 0; j < 3; ++j) {
                u[j] = r.u[j] / sf;
                v[j] = r.v[j] / sf;
            }
            const auto lp = apply(u, v, l);
            const double iso = std::abs(dot(lp, lp));
            if (iso < best) {
                best = iso;
                fr.U[p] = u;
                fr.V[p] = v;
                fr.branch[p] = br;
            }
        }
        // |l.l| is |f(s_p)| / |F'(s_p)|; judge the branch on f itself so that nearly repeated
        // roots (small F') do not trip the test.
        if (best * std::abs(fp) > tol) throw BranchSelectionFailed("no branch of sqrt G annihilates f(s_p)");
        fr.isotropy = std::max(fr.isotropy, best);
    }
    return fr;
}

struct XiEta {
    Vec3<cplx> xi{}, eta{};
};

inline XiEta xi_eta(const Vec3<cplx>& l1, const Vec3<cplx>& l2) {
    XiEta out;
    for (int j = 0; j < 3; ++j) {
        out.xi[j] = l1[j] + I * l2[j];
        out.eta[j] = l1[j] - I * l2[j];
    }
    return out;
}

// m_j = alpha_j xi_j + beta_j eta_j, n_j = gamma_j xi_j + delta_j eta_j.
struct KoetterCoefficients {
    Vec3<cplx> alpha{}, beta{}, gamma{}, delta{};
    std::array<Vec3<cplx>, 3> Delta{};  // Delta[p][j], p over the first three roots
};

inline KoetterCoefficients koetter_coefficients(const IsotropicFrame& fr, double tol = 1e-12) {
    KoetterCoefficients k;
    for (const auto& [p, q, r] : kCyclic)
        for (int j = 0; j < 3; ++j) k.Delta[p][j] = fr.U[q][j] * fr.V[r][j] - fr.U[r][j] * fr.V[q][j];
    for (int j = 0; j < 3; ++j) {
        const cplx D3 = k.Delta[2][j];
        if (std::abs(D3) < tol) throw VanishingDelta("component " + std::to_string(j + 1));
        const cplx U0 = fr.U[0][j], U1 = fr.U[1][j], V0 = fr.V[0][j], V1 = fr.V[1][j];
        k.alpha[j] = (V1 + I * V0) / (2.0 * D3);
        k.beta[j] = (V1 - I * V0) / (2.0 * D3);
        k.gamma[j] = -(U1 + I * U0) / (2.0 * D3);
        k.delta[j] = -(U1 - I * U0) / (2.0 * D3);
    }
    return k;
}

// The five branch points 0, d1, d2, d3, d4 = d1 d2 d3 of the curve y^2 = prod (z - d_j).
struct Moduli {
    std::array<cplx, 5> d{};
    Vec3<cplx> sqrt_d{};
    double consistency = 0;  // max |sqrt(d_j) * (1/sqrt(d_j)) - 1| from the two formulas

    static Moduli from_d(const Vec3<cplx>& d3) {
        Moduli m;
        m.d = {0.0, d3[0], d3[1], d3[2], d3[0] * d3[1] * d3[2]};
        for (int j = 0; j < 3; ++j) m.sqrt_d[j] = std::sqrt(d3[j]);
        return m;
    }
    double scale() const {
        double s = 0;
        for (const auto& x : d) s = std::max(s, std::abs(x));
        return s;
    }
};

inline Moduli moduli(const std::array<Vec3<cplx>, 3>& Delta, double tol = 1e-9) {
    Moduli m;
    Vec3<cplx> d3;
    for (int j = 0; j < 3; ++j) {
        if (std::abs(Delta[2][j]) == 0) throw VanishingDelta("Delta^(3) = 0");
        const cplx sd = (Delta[0][j] - I * Delta[1][j]) / Delta[2][j];
        const cplx inv = -(Delta[0][j] + I * Delta[1][j]) / Delta[2][j];
        m.consistency = std::max(m.consistency, std::abs(sd * inv - 1.0));
        m.sqrt_d[j] = sd;
        d3[j] = sd * sd;
    }
    if (m.consistency > tol) throw InconsistentModulus("sqrt(d) * (1/sqrt(d)) deviates from 1");
    m.d = {0.0, d3[0], d3[1], d3[2], d3[0] * d3[1] * d3[2]};
    return m;
}

// Everything that depends on the integral levels only.
struct SpectralData {
    std::array<double, 4> a{};
    IntegralLevels levels;
    QuarticRoots roots;
    IsotropicFrame frame;
    KoetterCoefficients coeff;
    Moduli mod;

    template <class T>
    XiEta transform(const Momentum<T>& l) const {
        return xi_eta(apply(frame.U[0], frame.V[0], l), apply(frame.U[1], frame.V[1], l));
    }

    CState inverse(const XiEta& x) const {
        Vec3<cplx> m, n;
        for (int j = 0; j < 3; ++j) {
            m[j] = coeff.alpha[j] * x.xi[j] + coeff.beta[j] * x.eta[j];
            n[j] = coeff.gamma[j] * x.xi[j] + coeff.delta[j] * x.eta[j];
        }
        return CState::from_mn(m, n);
    }
};

inline SpectralData spectral_data(const State& l, const std::array<double, 4>& a) {
    SpectralData sd;
    sd.a = a;
    sd.levels = integrals(l, a);
    const double tol = 1e-10 * sd.levels.scale();
    sd.roots = quartic_roots(sd.levels, a);
    sd.frame = isotropic_vectors(l, a, sd.roots, tol);
    sd.coeff = koetter_coefficients(sd.frame);
    sd.mod = moduli(sd.coeff.Delta, 1e-7);  // a guard only; verify checks consistency at 1e-9
    return sd;
}

// The three quadrics: sum(xi^2 + eta^2), sum(xi eta), sum(d xi^2 + eta^2 / d).
inline std::array<cplx, 3> quadrics(const XiEta& x, const Moduli& m) {
    std::array<cplx, 3> q{};
    for (int j = 0; j < 3; ++j) {
        const cplx d = m.d[j + 1];
        q[0] += x.xi[j] * x.xi[j] + x.eta[j] * x.eta[j];
        q[1] += x.xi[j] * x.eta[j];
        q[2] += d * x.xi[j] * x.xi[j] + x.eta[j] * x.eta[j] / d;
    }
    return q;
}

// H0 = sum A_j (xi_j^2 - eta_j^2) + B_j xi_j eta_j on the quadrics, with
// A_j = alpha + beta d_j + gamma / d_j and B_j = delta (d_j + 1/d_j).
struct NormalForm {
    Vec3<cplx> A{}, B{};
    cplx alpha, beta, gamma, delta;
    cplx lambda, mu, nu;  // multipliers of the three quadrics
    double residual = 0;  // relative least-squares residual

    cplx evaluate(const XiEta& x) const {
        cplx h = 0;
        for (int j = 0; j < 3; ++j) h += A[j] * (x.xi[j] * x.xi[j] - x.eta[j] * x.eta[j]) + B[j] * x.xi[j] * x.eta[j];
        return h;
    }
};

// Raw form sum P xi^2 + Q eta^2 + Bc xi eta from m_j n_j, shifted by lambda, mu, nu
// times the quadrics; nine equations, seven unknowns.
inline NormalForm h0_normal_form(const SpectralData& sd, double tol = 1e-8) {
    const auto& k = sd.coeff;
    Eigen::Matrix<cplx, 9, 7> M = Eigen::Matrix<cplx, 9, 7>::Zero();
    Eigen::Matrix<cplx, 9, 1> rhs;
    for (int j = 0; j < 3; ++j) {
        const cplx d = sd.mod.d[j + 1];
        const cplx P = k.alpha[j] * k.gamma[j], Q = k.beta[j] * k.delta[j];
        const cplx Bc = k.alpha[j] * k.delta[j] + k.beta[j] * k.gamma[j];
        // unknowns: lambda, mu, nu, alpha, beta, gamma, delta
        M.row(3 * j) << 1.0, 0.0, d, -1.0, -d, -1.0 / d, 0.0;
        rhs(3 * j) = -P;
        M.row(3 * j + 1) << 1.0, 0.0, 1.0 / d, 1.0, d, 1.0 / d, 0.0;
        rhs(3 * j + 1) = -Q;
        M.row(3 * j + 2) << 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, -(d + 1.0 / d);
        rhs(3 * j + 2) = -Bc;
    }
    const Eigen::Matrix<cplx, 7, 1> x = M.colPivHouseholderQr().solve(rhs);
    NormalForm nf;
    nf.lambda = x(0);
    nf.mu = x(1);
    nf.nu = x(2);
    nf.alpha = x(3);
    nf.beta = x(4);
    nf.gamma = x(5);
    nf.delta = x(6);
    for (int j = 0; j < 3; ++j) {
        const cplx d = sd.mod.d[j + 1];
        nf.A[j] = nf.alpha + nf.beta * d + nf.gamma / d;
        nf.B[j] = nf.delta * (d + 1.0 / d);
    }
    nf.residual = (M * x - rhs).cwiseAbs().maxCoeff() / std::max(1e-300, rhs.cwiseAbs().maxCoeff());
    if (nf.residual > tol) throw FitResidualTooLarge("normal-form model residual " + std::to_string(nf.residual));
    return nf;
}

// The closed-form constant for the normalisation of H0, evaluated verbatim with a
// choice of signs for its two inner square roots (e2, e3 in {+1,-1}).
inline cplx epsilon_closed_form(const std::array<cplx, 4>& s, cplx d4, int e2 = 1, int e3 = 1) {
    const cplx t1 = std::sqrt((s[2] - s[0]) * (s[1] - s[3]));
    const cplx t2 = std::sqrt((s[1] - s[2]) * (s[0] - s[3]));
    return std::sqrt(d4) * (double(e2) * t1 - double(e3) * t2) / std::sqrt((s[0] - s[1]) * (s[2] - s[3]));
}

inline std::array<cplx, 4> epsilon_candidates(const std::array<cplx, 4>& s, cplx d4) {
    return {epsilon_closed_form(s, d4, 1, 1), epsilon_closed_form(s, d4, 1, -1), epsilon_closed_form(s, d4, -1, 1),
            epsilon_closed_form(s, d4, -1, -1)};
}

}  // namespace manakov
