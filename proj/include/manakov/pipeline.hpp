#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "manakov/abelian.hpp"

namespace manakov {

using Rng = std::mt19937_64;

inline State random_unit_state(Rng& rng) {
    std::normal_distribution<double> N;
    State l;
    double nrm = 0;
    for (auto& x : l.v) {
        x = N(rng);
        nrm += x * x;
    }
    nrm = std::sqrt(nrm);
    for (auto& x : l.v) x /= nrm;
    return l;
}

// Random divisor with both points in a disc around the origin, clear of the branch
// points and of each other, on random sheets.
inline Divisor random_divisor(const Moduli& m, Rng& rng, double radius) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const HyperellipticCurve c(m);
    auto draw = [&] {
        for (;;) {
            const cplx z{radius * U(rng), radius * U(rng)};
            bool ok = std::abs(z) <= radius;
            for (const auto& e : c.e) ok = ok && std::abs(z - e) > 1e-3 * c.scale;
            if (ok) return point_on_curve(z, m, U(rng) > 0 ? 1 : -1);
        }
    };
    for (;;) {
        Divisor D{draw(), draw()};
        if (std::abs(D.p1.z - D.p2.z) > 1e-3 * radius) return D;
    }
}

inline double default_divisor_radius(const Moduli& m) { return 0.25 * HyperellipticCurve(m).scale; }

// Trajectory, divisor path and Abel images for one initial state.
struct Uniformization {
    SpectralData spectral;
    PeriodData periods;
    Trajectory trajectory;
    std::vector<XiEta> xe;
    std::vector<Recovery> recovery;
    std::vector<Vec2c> u_raw, u;
    LinearFit fit;
};

struct UniformizeOptions {
    double t_end = 0.98;
    double dt = 1e-3;
    int stride = 20;
    QuadratureOptions quad{};
};

inline Uniformization uniformize(const State& l0, const InertiaParameters& in, const UniformizeOptions& opt = {}) {
    Uniformization run;
    run.spectral = spectral_data(l0, in.a);
    run.periods = period_matrix(run.spectral.mod, opt.quad);
    run.trajectory = integrate(l0, in.c, opt.t_end, opt.dt, Method::rk4, opt.stride);
    const std::size_t n = run.trajectory.size();
    for (std::size_t k = 0; k < n; ++k) {
        run.xe.push_back(run.spectral.transform(run.trajectory.states[k]));
        run.recovery.push_back(recover_divisor(run.xe.back(), run.spectral.mod, k ? &run.recovery.back() : nullptr));
    }
    run.u_raw.resize(n);
    parallel_for(n, [&](std::size_t k) {
        run.u_raw[k] = abel_map(run.recovery[k].D, run.spectral.mod, run.periods, opt.quad);
    });
    run.u = unwrap(run.u_raw, run.periods.tau);
    run.fit = linear_flow_fit(run.trajectory.times, run.u);
    return run;
}

inline std::vector<CalibrationSample> calibration_samples(const Moduli& m, const PeriodData& pd, std::size_t count,
                                                          Rng& rng, const QuadratureOptions& quad = {}) {
    std::vector<CalibrationSample> s(count);
    const double radius = default_divisor_radius(m);
    for (auto& x : s) x.D = random_divisor(m, rng, radius);
    parallel_for(count, [&](std::size_t k) { s[k].u = abel_map(s[k].D, m, pd, quad); });
    return s;
}

struct TheoremSetup {
    Reconstructor rec;
    NormalForm normal_form;
    std::vector<CalibrationSample> samples;
    std::array<double, 7> kappa_consistency{};  // | kappa_t0^2 / kappa_cal^2 - 1 |
};

// Calibration on random divisors, the H0 constants, and the t = 0 anchoring of signs and of g.
inline TheoremSetup build_reconstructor(const Uniformization& run, Rng& rng, std::size_t n_samples = 12) {
    const auto& m = run.spectral.mod;
    TheoremSetup ts{Reconstructor{run.spectral, ThetaContext(run.periods.tau), {}, {}, run.fit}, {}, {}, {}};
    ts.samples = calibration_samples(m, run.periods, n_samples, rng);
    ts.rec.cal = calibrate(ts.rec.ctx, ts.samples, m);
    ts.normal_form = h0_normal_form(run.spectral);
    std::vector<Divisor> divs;
    for (const auto& s : ts.samples) divs.push_back(s.D);
    ts.rec.uc = uniformization_constants(ts.normal_form, m, divs);

    const auto w0 = data_wurzel(run.xe.front(), m, run.recovery.front().g);
    const auto raw = ts.rec.cal.ratios(run.fit.u0, ts.rec.ctx);
    for (int k = 0; k < 7; ++k) {
        ts.rec.kappa[k] = label_value(w0, kLabels[k]) / raw[k];
        const cplx kc = ts.rec.cal.kappa[k];
        ts.kappa_consistency[k] = std::abs(ts.rec.kappa[k] * ts.rec.kappa[k] / (kc * kc) - 1.0);
    }
    ts.rec.K = run.recovery.front().g * (1.0 - ts.rec.uc.epsilon * w0.p0);
    return ts;
}

}  // namespace manakov
