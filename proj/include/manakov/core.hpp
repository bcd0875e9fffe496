#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "manakov/errors.hpp"

namespace manakov {

using cplx = std::complex<double>;
inline constexpr cplx I{0.0, 1.0};

template <class T>
using Vec3 = std::array<T, 3>;

// Storage order of the six upper-triangle components (zero-based index pairs).
inline constexpr std::array<std::pair<int, int>, 6> kPairs{
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

// Slot of l_ij in storage for i < j (zero-based).
constexpr int slot(int i, int j) {
    if (i > j) std::swap(i, j);
    constexpr int base[3] = {0, 3, 5};
    return base[i] + (j - i - 1);
}

// Complement {k,l} of a pair {i,j} in {0,1,2,3}.
constexpr std::pair<int, int> complement(int i, int j) {
    int out[2]{};
    int n = 0;
    for (int k = 0; k < 4; ++k)
        if (k != i && k != j) out[n++] = k;
    return {out[0], out[1]};
}

// Cyclic triples (j,k,l) of (1,2,3), zero-based.
inline constexpr std::array<std::array<int, 3>, 3> kCyclic{{{0, 1, 2}, {1, 2, 0}, {2, 0, 1}}};

// Six components l_12..l_34 of an so(4) element; T is double or cplx.
// m = (l23, l31, l12) = (l23, -l13, l12), n = (l14, l24, l34).
template <class T>
struct Momentum {
    std::array<T, 6> v{};

    T& operator[](std::size_t k) { return v[k]; }
    const T& operator[](std::size_t k) const { return v[k]; }

    // Antisymmetric entry with zero-based indices.
    T at(int i, int j) const {
        if (i == j) return T{};
        return i < j ? v[slot(i, j)] : -v[slot(i, j)];
    }

    Vec3<T> m() const { return {v[3], -v[1], v[0]}; }
    Vec3<T> n() const { return {v[2], v[4], v[5]}; }

    static Momentum from_mn(const Vec3<T>& m, const Vec3<T>& n) {
        return Momentum{{m[2], -m[1], n[0], m[0], n[1], n[2]}};
    }

    Eigen::Matrix<T, 4, 4> matrix() const {
        Eigen::Matrix<T, 4, 4> L;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) L(i, j) = at(i, j);
        return L;
    }

    double norm_inf() const {
        double r = 0;
        for (const auto& x : v) r = std::max(r, std::abs(x));
        return r;
    }

    bool finite() const {
        for (const auto& x : v)
            if (!std::isfinite(std::abs(x))) return false;
        return true;
    }

    friend Momentum operator+(Momentum a, const Momentum& b) {
        for (std::size_t k = 0; k < 6; ++k) a.v[k] += b.v[k];
        return a;
    }
    friend Momentum operator-(Momentum a, const Momentum& b) {
        for (std::size_t k = 0; k < 6; ++k) a.v[k] -= b.v[k];
        return a;
    }
    friend Momentum operator*(T s, Momentum a) {
        for (auto& x : a.v) x *= s;
        return a;
    }
};

using State = Momentum<double>;
using CState = Momentum<cplx>;

inline CState complexify(const State& s) {
    CState c;
    for (std::size_t k = 0; k < 6; ++k) c[k] = s[k];
    return c;
}

using Mat4 = Eigen::Matrix4d;

inline Mat4 derive_c(const std::array<double, 4>& a, const std::array<double, 4>& b) {
    Mat4 c = Mat4::Zero();
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            if (i == j) continue;
            if (a[i] == a[j])
                throw DuplicateModulus("a_" + std::to_string(i + 1) + " == a_" + std::to_string(j + 1));
            c(i, j) = (b[i] - b[j]) / (a[i] - a[j]);
        }
    return c;
}

// a (needed by the integrals H2, H3) together with the coupling matrix c.
struct InertiaParameters {
    std::array<double, 4> a{};
    std::array<double, 4> b{};
    Mat4 c = Mat4::Zero();
    bool manakov = true;

    static InertiaParameters from_ab(const std::array<double, 4>& a, const std::array<double, 4>& b) {
        return {a, b, derive_c(a, b), true};
    }

    // Arbitrary symmetric coupling; a is kept for the integrals and the spectral curve.
    static InertiaParameters from_c(const std::array<double, 4>& a, const Mat4& c) {
        derive_c(a, a);  // distinctness check only
        return {a, {}, c, false};
    }
};

// Fills in the antisymmetric partner for one-based index pairs.
inline double component(const State& l, int i, int j) {
    if (i < 1 || i > 4 || j < 1 || j > 4) throw IndexOutOfRange("index must lie in 1..4");
    return l.at(i - 1, j - 1);
}

// {l_ij, l_km} for one-based indices.
inline double poisson_bracket(int i, int j, int k, int m, const State& l) {
    for (int q : {i, j, k, m})
        if (q < 1 || q > 4) throw IndexOutOfRange("index " + std::to_string(q));
    if (i == j || k == m) throw IndexOutOfRange("repeated index inside a pair");
    auto d = [](int p, int q) { return p == q ? 1.0 : 0.0; };
    auto L = [&](int p, int q) { return p == q ? 0.0 : component(l, p, q); };
    return L(i, m) * d(j, k) - L(i, k) * d(j, m) + L(j, k) * d(i, m) - L(j, m) * d(i, k);
}

struct IntegralLevels {
    double h0 = 0, h1 = 0, h2 = 0, h3 = 0;

    std::array<double, 4> as_array() const { return {h0, h1, h2, h3}; }
    double scale() const { return std::max({1.0, std::abs(h1), std::abs(h2), std::abs(h3)}); }
};

// H2 and H3 weight l_ij^2 by the complementary moduli a_k, a_l: with that weighting
// they are conserved and f(s) has polynomial part h1 s^2 - h2 s + h3.
template <class T>
std::array<T, 4> integrals_of(const Momentum<T>& l, const std::array<double, 4>& a) {
    std::array<T, 4> h{};
    h[0] = l[0] * l[5] + l[3] * l[2] - l[1] * l[4];
    for (int s = 0; s < 6; ++s) {
        auto [i, j] = kPairs[s];
        auto [k, q] = complement(i, j);
        const T sq = l[s] * l[s];
        h[1] += sq;
        h[2] += (a[k] + a[q]) * sq;
        h[3] += (a[k] * a[q]) * sq;
    }
    return h;
}

inline IntegralLevels integrals(const State& l, const std::array<double, 4>& a) {
    auto h = integrals_of(l, a);
    return {h[0], h[1], h[2], h[3]};
}

// H = 1/2 sum c_ij l_ij^2.
inline double hamiltonian(const State& l, const Mat4& c) {
    double h = 0;
    for (int s = 0; s < 6; ++s) h += 0.5 * c(kPairs[s].first, kPairs[s].second) * l[s] * l[s];
    return h;
}

// {H, l_ij} assembled from the bracket through the chain rule.
inline State hamiltonian_field(const State& l, const Mat4& c) {
    State out;
    for (int s = 0; s < 6; ++s) {
        auto [i, j] = kPairs[s];
        double acc = 0;
        for (int r = 0; r < 6; ++r) {
            auto [k, m] = kPairs[r];
            acc += c(k, m) * l[r] * poisson_bracket(k + 1, m + 1, i + 1, j + 1, l);
        }
        out[s] = acc;
    }
    return out;
}

}  // namespace manakov
