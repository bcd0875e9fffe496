#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <queue>
#include <string>
#include <vector>

#include "manakov/parallel.hpp"
#include "manakov/wurzel.hpp"

namespace manakov {

using Vec2c = Eigen::Vector2cd;
using Mat2c = Eigen::Matrix2cd;

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod (7, 15) for C^2-valued integrands on a real interval.

struct QuadratureOptions {
    double rel_tol = 1e-14;
    int max_intervals = 4000;
};

namespace detail {

inline constexpr std::array<double, 8> kXgk{0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                            0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> kWgk{0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg{0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a, b;
    Vec2c value;
    double error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gk15(F& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const Vec2c fc = f(c);
    Vec2c k = kWgk[7] * fc, g = kWg[3] * fc;
    for (int i = 0; i < 7; ++i) {
        const Vec2c s = f(c - h * kXgk[i]) + f(c + h * kXgk[i]);
        k += kWgk[i] * s;
        if (i % 2 == 1) g += kWg[i / 2] * s;
    }
    return {a, b, h * k, h * (k - g).cwiseAbs().maxCoeff()};
}

}  // namespace detail

template <class F>
Vec2c integrate_gk(F f, double a, double b, const QuadratureOptions& opt = {}) {
    std::priority_queue<detail::Panel> heap;
    auto first = detail::gk15(f, a, b);
    Vec2c total = first.value;
    double err = first.error;
    heap.push(first);
    int panels = 1;
    while (err > opt.rel_tol * std::max(total.cwiseAbs().maxCoeff(), 1e-300)) {
        if (panels >= opt.max_intervals) throw QuadratureFailure("adaptive refinement exhausted");
        const auto worst = heap.top();
        heap.pop();
        const double m = 0.5 * (worst.a + worst.b);
        if (!(m > worst.a && m < worst.b)) throw QuadratureFailure("interval underflow");
        const auto l = detail::gk15(f, worst.a, m), r = detail::gk15(f, m, worst.b);
        total += l.value + r.value - worst.value;
        err += l.error + r.error - worst.error;
        heap.push(l);
        heap.push(r);
        ++panels;
        if (!total.allFinite()) throw QuadratureFailure("non-finite integrand");
    }
    // re-sum to shed accumulated cancellation in the running total
    Vec2c sum = Vec2c::Zero();
    while (!heap.empty()) {
        sum += heap.top().value;
        heap.pop();
    }
    return sum;
}

// ---------------------------------------------------------------------------
// Curve y^2 = prod_{j=0}^{4} (z - e_j) with e = (0, d1, d2, d3, d4); infinity is the sixth branch point.

struct HyperellipticCurve {
    std::array<cplx, 5> e{};
    double scale = 1;       // max |e_j|, at least 1
    double separation = 0;  // min |e_i - e_j|

    explicit HyperellipticCurve(const Moduli& m) : e(m.d) {
        scale = std::max(1.0, m.scale());
        separation = INFINITY;
        for (int i = 0; i < 5; ++i)
            for (int j = i + 1; j < 5; ++j) separation = std::min(separation, std::abs(e[i] - e[j]));
        if (separation < 1e-10 * scale) throw BranchPointCollision("two branch points coincide");
    }
};

// Straight segment p -> q on which y is one analytic function: every factor sqrt(x - e_j)
// has its cut rotated to point away from the segment midpoint.
class Segment {
public:
    Segment(const HyperellipticCurve& c, cplx p, cplx q, int pb = -1, int qb = -1)
        : c_(c), p_(p), q_(q), pb_(pb), qb_(qb) {
        const cplx mid = 0.5 * (p + q);
        const double len = std::abs(q - p);
        for (int j = 0; j < 5; ++j) {
            if (j != pb && j != qb) {
                const double t = std::clamp(((c.e[j] - p) * std::conj(q - p)).real() / (len * len), 0.0, 1.0);
                if (std::abs(p + t * (q - p) - c.e[j]) < 1e-12 * c.scale)
                    throw PathNearBranchPoint("segment passes through a branch point");
            }
            const cplx ref = mid - c.e[j];
            rot_[j] = std::abs(ref) > 0 ? ref / std::abs(ref) : (q - p) / len;
            sqrt_rot_[j] = std::sqrt(rot_[j]);
        }
    }

    // y at x = p + t (q - p), excluding the factors listed in skip (or none).
    cplx y(cplx x, int skip_a = -1, int skip_b = -1) const {
        cplx r = 1.0;
        for (int j = 0; j < 5; ++j) {
            if (j == skip_a || j == skip_b) continue;
            r *= sqrt_rot_[j] * std::sqrt((x - c_.e[j]) / rot_[j]);
        }
        return r;
    }

    // Integral of (1, x) dx / y along the segment.
    Vec2c integral(const QuadratureOptions& opt) const {
        const cplx dq = q_ - p_;
        const double len = std::abs(dq);
        auto regular = [&](double t) -> Vec2c {
            const cplx x = p_ + t * dq;
            const cplx w = dq / y(x);
            return {w, w * x};
        };
        // x - e = s^2 (q - p) near a branch-point start: the 1/s singularity cancels dt = 2 s ds.
        auto from_p = [&](double s) -> Vec2c {
            const cplx x = p_ + (s * s) * dq;
            const cplx w = 2.0 * dq / (std::sqrt(len) * sqrt_rot_[pb_] * y(x, pb_));
            return {w, w * x};
        };
        auto from_q = [&](double s) -> Vec2c {
            const cplx x = q_ - (s * s) * dq;
            const cplx w = 2.0 * dq / (std::sqrt(len) * sqrt_rot_[qb_] * y(x, qb_));
            return {w, w * x};
        };
        if (pb_ < 0 && qb_ < 0) return integrate_gk(regular, 0.0, 1.0, opt);
        if (qb_ < 0) return integrate_gk(from_p, 0.0, 1.0, opt);
        if (pb_ < 0) return integrate_gk(from_q, 0.0, 1.0, opt);
        const double h = std::sqrt(0.5);
        return integrate_gk(from_p, 0.0, h, opt) + integrate_gk(from_q, 0.0, h, opt);
    }

private:
    const HyperellipticCurve& c_;
    cplx p_, q_;
    int pb_, qb_;
    std::array<cplx, 5> rot_{}, sqrt_rot_{};
};

struct PeriodData {
    Mat2c A, B, tau, Ainv;
    std::array<int, 5> order{};  // branch points sorted along their principal direction
    double asymmetry = 0;        // |tau_12 - tau_21| / max |tau|
};

// A-cycles around (e_0, e_1) and (e_2, e_3), B-cycles across, in the order given by the
// projection of the branch points onto their principal axis. Segment sheets are independent,
// so a sign search picks the combination with symmetric tau and Im tau > 0.
inline PeriodData period_matrix(const Moduli& m, const QuadratureOptions& opt = {}) {
    const HyperellipticCurve curve(m);
    cplx cen = 0;
    for (const auto& x : curve.e) cen += x / 5.0;
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    for (const auto& x : curve.e) {
        const Eigen::Vector2d z{(x - cen).real(), (x - cen).imag()};
        cov += z * z.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
    const Eigen::Vector2d ax = es.eigenvectors().col(1);
    const cplx dir{ax(0), ax(1)};
    PeriodData pd;
    for (int i = 0; i < 5; ++i) pd.order[i] = i;
    std::sort(pd.order.begin(), pd.order.end(), [&](int i, int j) {
        return ((curve.e[i] - cen) * std::conj(dir)).real() < ((curve.e[j] - cen) * std::conj(dir)).real();
    });
    std::array<Vec2c, 4> cyc;
    for (int i = 0; i < 4; ++i) {
        const int a = pd.order[i], b = pd.order[i + 1];
        cyc[i] = 2.0 * Segment(curve, curve.e[a], curve.e[b], a, b).integral(opt);
    }
    for (int s3 : {1, -1})
        for (int s2 : {1, -1})
            for (int s24 : {1, -1})
                for (int s4 : {1, -1}) {
                    Mat2c A, B;
                    A.col(0) = cyc[0];
                    A.col(1) = double(s3) * cyc[2];
                    B.col(0) = double(s2) * cyc[1] + double(s24) * cyc[3];
                    B.col(1) = double(s4) * cyc[3];
                    const Mat2c tau = A.partialPivLu().solve(B);
                    const double asym = std::abs(tau(0, 1) - tau(1, 0)) / tau.cwiseAbs().maxCoeff();
                    const Eigen::Matrix2d Y = (0.5 * (tau + tau.transpose())).imag();
                    if (asym < 1e-8 && Y(0, 0) > 0 && Y.determinant() > 0) {
                        pd.A = A;
                        pd.B = B;
                        pd.tau = tau;
                        pd.Ainv = A.inverse();
                        pd.asymmetry = asym;
                        return pd;
                    }
                }
    throw QuadratureFailure("no sign assignment yields a Riemann matrix");
}

// ---------------------------------------------------------------------------
// Abel map with the branch point z = 0 as base.

namespace detail {

// Polyline from p to q that keeps a margin from branch points other than the endpoints.
inline std::vector<cplx> route(const HyperellipticCurve& c, cplx p, cplx q, int pb, int qb, int depth = 0) {
    const double len = std::abs(q - p);
    const double margin = 0.05 * std::min(len, c.separation);
    for (int j = 0; j < 5; ++j) {
        if (j == pb || j == qb) continue;
        const double t = ((c.e[j] - p) * std::conj(q - p)).real() / (len * len);
        if (t <= 0 || t >= 1) continue;
        const cplx foot = p + t * (q - p);
        if (std::abs(foot - c.e[j]) >= margin) continue;
        if (depth > 8) throw PathNearBranchPoint("could not route around branch points");
        cplx nrm = I * (q - p) / len;
        if (((foot - c.e[j]) * std::conj(nrm)).real() < 0) nrm = -nrm;
        double r = 0.5 * c.separation;
        r = std::min(r, 0.5 * std::abs(q - c.e[j]));
        const cplx w = c.e[j] + r * nrm;
        auto first = route(c, p, w, pb, -1, depth + 1);
        auto second = route(c, w, q, -1, qb, depth + 1);
        first.insert(first.end(), second.begin() + 1, second.end());
        return first;
    }
    return {p, q};
}

}  // namespace detail

// Integral of (dx/y, x dx/y) from the base branch point to the point pt on its sheet.
inline Vec2c abel_leg(const HyperellipticCurve& c, const CurvePoint& pt, const QuadratureOptions& opt = {}) {
    int qb = -1;
    for (int j = 0; j < 5; ++j)
        if (std::abs(pt.z - c.e[j]) < 1e-14 * c.scale) qb = j;
    if (qb == 0) return Vec2c::Zero();
    const auto path = detail::route(c, c.e[0], pt.z, 0, qb);
    Vec2c total = Vec2c::Zero();
    cplx y_prev = 0;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        const bool last = i + 2 == path.size();
        const Segment seg(c, path[i], path[i + 1], i == 0 ? 0 : -1, last ? qb : -1);
        double sign = 1.0;
        if (i > 0) {
            const cplx y_here = seg.y(path[i]);
            sign = std::abs(y_here - y_prev) <= std::abs(y_here + y_prev) ? 1.0 : -1.0;
        }
        total += sign * seg.integral(opt);
        if (!(last && qb >= 0)) y_prev = sign * seg.y(path[i + 1]);
    }
    if (qb < 0 && std::abs(y_prev - pt.y) > std::abs(y_prev + pt.y)) total = -total;
    return total;
}

inline Vec2c abel_map(const Divisor& D, const Moduli& m, const PeriodData& pd, const QuadratureOptions& opt = {}) {
    const HyperellipticCurve c(m);
    return pd.Ainv * (abel_leg(c, D.p1, opt) + abel_leg(c, D.p2, opt));
}

// Removes lattice jumps between consecutive samples: u_k - u_{k-1} is reduced by tau n + m.
inline std::vector<Vec2c> unwrap(const std::vector<Vec2c>& us, const Mat2c& tau) {
    std::vector<Vec2c> out;
    if (us.empty()) return out;
    const Eigen::Matrix2d Yinv = tau.imag().inverse();
    out.push_back(us.front());
    for (std::size_t k = 1; k < us.size(); ++k) {
        Vec2c diff = us[k] - out.back();
        const Eigen::Vector2d n = (Yinv * diff.imag()).array().round().matrix();
        diff -= tau * n.cast<cplx>();
        const Eigen::Vector2d mm = diff.real().array().round().matrix();
        diff -= mm.cast<cplx>();
        out.push_back(out.back() + diff);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Theta functions with half-integer characteristics [g; h], g, h in {0,1}^2.

struct Characteristic {
    std::array<int, 2> g{0, 0}, h{0, 0};

    bool operator==(const Characteristic&) const = default;
    int parity() const { return (g[0] * h[0] + g[1] * h[1]) % 2; }
    std::string str() const {
        return "[" + std::to_string(g[0]) + std::to_string(g[1]) + ";" + std::to_string(h[0]) + std::to_string(h[1]) + "]";
    }
    static Characteristic from_index(int k) { return {{(k >> 3) & 1, (k >> 2) & 1}, {(k >> 1) & 1, k & 1}}; }
};

struct ThetaContext {
    Mat2c tau;
    Eigen::Matrix2d Y, Yinv;
    int N = 0;

    explicit ThetaContext(const Mat2c& t, int n_override = 0) : tau(0.5 * (t + t.transpose())) {
        Y = tau.imag();
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(Y);
        const double lmin = es.eigenvalues().minCoeff();
        if (!(lmin > 0)) throw NumericError("Im tau is not positive definite");
        Yinv = Y.inverse();
        N = n_override > 0 ? n_override : static_cast<int>(std::ceil(std::sqrt(14.0 / (std::numbers::pi * lmin)))) + 2;
    }

    // u + tau g/2 + h/2
    Vec2c shift(const Vec2c& u, const Characteristic& c) const {
        const Eigen::Vector2d g{c.g[0] * 0.5, c.g[1] * 0.5};
        const Eigen::Vector2d h{c.h[0] * 0.5, c.h[1] * 0.5};
        return u + tau * g.cast<cplx>() + h.cast<cplx>();
    }
};

// theta[c](u) * exp(-pi Im(u)^T Y^{-1} Im(u)); the factor is common to all characteristics at
// the same u, so ratios can be taken directly and nothing overflows.
inline cplx theta_scaled(const Vec2c& u, const ThetaContext& ctx, const Characteristic& ch = {}) {
    const Eigen::Vector2d y = u.imag();
    const double gauge = std::numbers::pi * y.dot(ctx.Yinv * y);
    const Eigen::Vector2d g{ch.g[0] * 0.5, ch.g[1] * 0.5};
    const Eigen::Vector2d h{ch.h[0] * 0.5, ch.h[1] * 0.5};
    const Eigen::Vector2d centre = -ctx.Yinv * y - g;
    const long c0 = std::lround(centre(0)), c1 = std::lround(centre(1));
    const double pi = std::numbers::pi;
    cplx sum = 0;
    for (long n1 = c0 - ctx.N; n1 <= c0 + ctx.N; ++n1)
        for (long n2 = c1 - ctx.N; n2 <= c1 + ctx.N; ++n2) {
            const Eigen::Vector2cd n = (Eigen::Vector2d{double(n1), double(n2)} + g).cast<cplx>();
            const cplx ex = I * pi * (n.dot(ctx.tau * n) + 2.0 * n.dot(u + h.cast<cplx>()));
            sum += std::exp(ex - gauge);
        }
    return sum;
}

inline cplx theta(const Vec2c& u, const ThetaContext& ctx, const Characteristic& ch = {}) {
    const Eigen::Vector2d y = u.imag();
    return theta_scaled(u, ctx, ch) * std::exp(std::numbers::pi * y.dot(ctx.Yinv * y));
}

// ---------------------------------------------------------------------------
// Theta / Wurzel correspondence.

enum class Label { k0, k14, k24, k34, k23, k31, k12 };
inline constexpr std::array<Label, 7> kLabels{Label::k0, Label::k14, Label::k24, Label::k34,
                                              Label::k23, Label::k31, Label::k12};

inline const char* label_name(Label l) {
    static constexpr const char* names[] = {"0", "14", "24", "34", "23", "31", "12"};
    return names[static_cast<int>(l)];
}

inline cplx label_value(const WurzelValues& w, Label l) {
    switch (l) {
        case Label::k0: return w.p0;
        case Label::k14: return w.pj4[0];
        case Label::k24: return w.pj4[1];
        case Label::k34: return w.pj4[2];
        case Label::k23: return w.pkl[0];
        case Label::k31: return w.pkl[1];
        case Label::k12: return w.pkl[2];
    }
    return 0;
}

// The textbook table, columns (g1 g2 ; h1 h2), denominator with zero characteristic.
inline std::array<Characteristic, 7> literal_table() {
    return {Characteristic{{1, 1}, {0, 0}}, Characteristic{{1, 1}, {1, 1}}, Characteristic{{0, 1}, {1, 1}},
            Characteristic{{0, 1}, {0, 0}}, Characteristic{{0, 0}, {1, 1}}, Characteristic{{1, 0}, {1, 1}},
            Characteristic{{1, 0}, {0, 0}}};
}

struct CalibrationSample {
    Divisor D;
    Vec2c u;  // Abel image, base point 0
};

// P_label = kappa * theta[table](u~) / theta(u~) with u~ = u + tau shift.g/2 + shift.h/2.
struct Calibration {
    Characteristic shift;
    std::array<Characteristic, 7> table{};
    std::array<cplx, 7> kappa{};
    std::array<double, 7> spread{};
    bool literal = false;  // true when the textbook table worked without search

    double worst_spread() const { return *std::max_element(spread.begin(), spread.end()); }

    std::array<cplx, 7> ratios(const Vec2c& u, const ThetaContext& ctx) const {
        const Vec2c ut = ctx.shift(u, shift);
        const cplx den = theta_scaled(ut, ctx);
        std::array<cplx, 7> r{};
        for (int k = 0; k < 7; ++k) r[k] = theta_scaled(ut, ctx, table[k]) / den;
        return r;
    }
};

namespace detail {

inline cplx complex_median(std::vector<cplx> v) {
    std::vector<double> re, im;
    for (const auto& x : v) {
        re.push_back(x.real());
        im.push_back(x.imag());
    }
    auto med = [](std::vector<double>& a) {
        std::sort(a.begin(), a.end());
        const std::size_t n = a.size();
        return n % 2 ? a[n / 2] : 0.5 * (a[n / 2 - 1] + a[n / 2]);
    };
    return {med(re), med(im)};
}

// Squared ratios P^2 theta^2 / theta_c^2 are free of the sheet sign conventions.
inline std::pair<double, cplx> squared_spread(const std::vector<cplx>& P, const std::vector<cplx>& den,
                                              const std::vector<cplx>& num) {
    std::vector<cplx> r(P.size());
    for (std::size_t i = 0; i < P.size(); ++i) r[i] = P[i] * P[i] * den[i] * den[i] / (num[i] * num[i]);
    const cplx med = complex_median(r);
    double s = 0;
    for (const auto& x : r) s = std::max(s, std::abs(x - med));
    s /= std::max(std::abs(med), 1e-300);
    return {std::isfinite(s) ? s : INFINITY, med};
}

}  // namespace detail

inline Calibration calibrate(const ThetaContext& ctx, const std::vector<CalibrationSample>& samples, const Moduli& m,
                             double tol = 1e-6) {
    if (samples.size() < 10) throw DomainError("calibration needs at least ten divisors");
    const std::size_t n = samples.size();
    std::vector<WurzelValues> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = wurzel_values(samples[i].D, m);

    auto assess = [&](const Characteristic& shift, const std::array<Characteristic, 7>* fixed) {
        Calibration cal;
        cal.shift = shift;
        std::vector<Vec2c> ut(n);
        std::vector<cplx> den(n);
        std::array<std::vector<cplx>, 16> num;
        for (std::size_t i = 0; i < n; ++i) {
            ut[i] = ctx.shift(samples[i].u, shift);
            den[i] = theta_scaled(ut[i], ctx);
        }
        for (int k = 0; k < 16; ++k) {
            num[k].resize(n);
            for (std::size_t i = 0; i < n; ++i) num[k][i] = theta_scaled(ut[i], ctx, Characteristic::from_index(k));
        }
        for (int lab = 0; lab < 7; ++lab) {
            std::vector<cplx> P(n);
            for (std::size_t i = 0; i < n; ++i) P[i] = label_value(w[i], kLabels[lab]);
            double best = INFINITY;
            cplx best_med = 0;
            for (int k = 0; k < 16; ++k) {
                const auto ch = Characteristic::from_index(k);
                if (fixed && !(ch == (*fixed)[lab])) continue;
                const auto [s, med] = detail::squared_spread(P, den, num[k]);
                if (s < best) {
                    best = s;
                    best_med = med;
                    cal.table[lab] = ch;
                }
            }
            cal.spread[lab] = best;
            // sign of kappa follows the first sample under the principal-root conventions
            cplx kap = std::sqrt(best_med);
            int kidx = 0;
            for (int k = 0; k < 16; ++k)
                if (Characteristic::from_index(k) == cal.table[lab]) kidx = k;
            const cplx direct = P[0] * den[0] / num[kidx][0];
            if (std::abs(direct - kap) > std::abs(direct + kap)) kap = -kap;
            cal.kappa[lab] = kap;
        }
        return cal;
    };

    const auto lit = literal_table();
    Calibration cal = assess(Characteristic{}, &lit);
    cal.literal = true;
    if (cal.worst_spread() < tol) return cal;
    Calibration best = cal;
    for (int s = 0; s < 16; ++s) {
        auto c = assess(Characteristic::from_index(s), nullptr);
        c.literal = false;
        if (c.worst_spread() < best.worst_spread()) best = c;
    }
    if (!(best.worst_spread() < tol))
        throw CalibrationSpreadTooLarge("best characteristic assignment spread " + std::to_string(best.worst_spread()));
    return best;
}

// ---------------------------------------------------------------------------
// Linear flow on the Jacobian.

struct LinearFit {
    Vec2c u0 = Vec2c::Zero(), v = Vec2c::Zero();
    double residual = 0;

    Vec2c at(double t) const { return u0 + t * v; }
};

inline LinearFit linear_flow_fit(const std::vector<double>& t, const std::vector<Vec2c>& u) {
    if (t.size() != u.size() || t.size() < 2) throw DomainError("linear_flow_fit: need matching series of length >= 2");
    const double n = double(t.size());
    double st = 0, stt = 0;
    for (double x : t) {
        st += x;
        stt += x * x;
    }
    LinearFit f;
    for (int c = 0; c < 2; ++c) {
        cplx su = 0, stu = 0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            su += u[i](c);
            stu += t[i] * u[i](c);
        }
        const double det = n * stt - st * st;
        f.v(c) = det != 0 ? (n * stu - st * su) / det : 0.0;
        f.u0(c) = (su - f.v(c) * st) / n;
    }
    for (std::size_t i = 0; i < t.size(); ++i) f.residual = std::max(f.residual, (f.at(t[i]) - u[i]).cwiseAbs().maxCoeff());
    return f;
}

// ---------------------------------------------------------------------------
// Closed-form solution: theta ratios -> Wurzel values -> (xi, eta) -> l.

struct Reconstructor {
    SpectralData spectral;
    ThetaContext ctx;
    Calibration cal;
    UniformizationConstants uc;
    LinearFit flow;
    std::array<cplx, 7> kappa{};  // signed to match the trajectory's own Wurzel values at t = 0
    cplx K = 1;                   // g (1 - eps f_0), constant along the flow

    // f-values (kappa-scaled theta ratios) at a Jacobian point.
    std::array<cplx, 7> f_values(const Vec2c& u) const {
        const Vec2c ut = ctx.shift(u, cal.shift);
        const cplx den = theta_scaled(ut, ctx);
        double mag = 0;
        std::array<cplx, 7> out{};
        for (int k = 0; k < 7; ++k) {
            const cplx num = theta_scaled(ut, ctx, cal.table[k]);
            mag = std::max(mag, std::abs(num));
            out[k] = kappa[k] * num / den;
        }
        if (std::abs(den) < 1e-12 * std::max(mag, 1e-300)) throw ThetaZeroDenominator("theta(u) vanishes");
        return out;
    }

    XiEta xi_eta_at(const Vec2c& u) const {
        const auto f = f_values(u);
        const ModuliConstants mc(spectral.mod);
        const cplx g = K / (1.0 - uc.epsilon * f[0]);
        XiEta x;
        for (int j = 0; j < 3; ++j) {
            x.xi[j] = g * mc.sqrt_c[j] * f[4 + j];
            x.eta[j] = g * mc.sqrt_c[j] * f[1 + j];
        }
        return x;
    }

    CState reconstruct(const Vec2c& u) const { return spectral.inverse(xi_eta_at(u)); }
    CState at_time(double t) const { return reconstruct(flow.at(t)); }
};

// The trajectory's Wurzel values at a recovered sample: P_kl = X_j / g, P_j4 = Y_j / g and the
// signed P_0; these carry the sign pattern of the recovery rather than the principal branches.
inline WurzelValues data_wurzel(const XiEta& x, const Moduli& m, cplx g) {
    const ModuliConstants mc(m);
    WurzelValues w;
    for (int j = 0; j < 3; ++j) {
        w.pkl[j] = x.xi[j] / (mc.sqrt_c[j] * g);
        w.pj4[j] = x.eta[j] / (mc.sqrt_c[j] * g);
    }
    w.p0 = w.signed_p0(mc);
    return w;
}

}  // namespace manakov
