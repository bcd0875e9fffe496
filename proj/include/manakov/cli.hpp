#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "manakov/verify.hpp"

namespace manakov::cli {

using json = nlohmann::json;

class ConfigError : public DomainError {
public:
    explicit ConfigError(const std::string& what) : DomainError("ConfigError: " + what) {}
};

enum Exit : int { kOk = 0, kConfig = 2, kNumeric = 3, kRecovery = 4 };

struct RunConfig {
    InertiaParameters inertia;
    State l0;
    double t_end = 20.0;
    double dt = 1e-3;
    int stride = 1;
    Method method = Method::rk4;
    double fit_window = 0.98;
    double compare_t_end = 5.0;
    int identity_samples = 1000;
    std::uint64_t seed = 1;
    Tolerances tol;
    std::string out;  // default output path; --out wins
};

namespace detail {

template <std::size_t N>
std::array<double, N> real_array(const json& j, const char* key) {
    if (!j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
    const auto& v = j.at(key);
    if (!v.is_array() || v.size() != N)
        throw ConfigError(std::string("'") + key + "' must be an array of " + std::to_string(N) + " numbers");
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) {
        if (!v[i].is_number()) throw ConfigError(std::string("'") + key + "' holds a non-number");
        out[i] = v[i].get<double>();
        if (!std::isfinite(out[i])) throw ConfigError(std::string("'") + key + "' holds a non-finite value");
    }
    return out;
}

inline double positive(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
    const double x = j.at(key).get<double>();
    if (!(x > 0) || !std::isfinite(x)) throw ConfigError(std::string("'") + key + "' must be positive and finite");
    return x;
}

}  // namespace detail

// Parses and validates; `seed` from the command line overrides the file.
inline RunConfig parse_config(const json& j, std::optional<std::uint64_t> seed = {}) {
    if (!j.is_object()) throw ConfigError("top level must be an object");
    RunConfig cfg;
    const auto a = detail::real_array<4>(j, "a");
    try {
        if (j.contains("c")) {
            const auto& cj = j.at("c");
            if (!cj.is_array() || cj.size() != 4) throw ConfigError("'c' must be a 4x4 array");
            Mat4 c;
            for (int i = 0; i < 4; ++i) {
                if (!cj[i].is_array() || cj[i].size() != 4) throw ConfigError("'c' must be a 4x4 array");
                for (int k = 0; k < 4; ++k) {
                    if (!cj[i][k].is_number()) throw ConfigError("'c' holds a non-number");
                    c(i, k) = cj[i][k].get<double>();
                }
            }
            if (!c.allFinite() || (c - c.transpose()).cwiseAbs().maxCoeff() > 0 || c.diagonal().cwiseAbs().maxCoeff() > 0)
                throw ConfigError("'c' must be finite, symmetric, with zero diagonal");
            cfg.inertia = InertiaParameters::from_c(a, c);
        } else {
            cfg.inertia = InertiaParameters::from_ab(a, detail::real_array<4>(j, "b"));
        }
    } catch (const DuplicateModulus& e) {
        throw ConfigError(e.what());
    }
    cfg.seed = seed ? *seed : j.value("seed", std::uint64_t{1});
    if (j.contains("l0")) {
        const auto l = detail::real_array<6>(j, "l0");
        std::copy(l.begin(), l.end(), cfg.l0.v.begin());
    } else {
        Rng rng(cfg.seed);
        cfg.l0 = random_unit_state(rng);
    }
    cfg.t_end = detail::positive(j, "t_end", cfg.t_end);
    cfg.dt = detail::positive(j, "dt", cfg.dt);
    cfg.fit_window = detail::positive(j, "fit_window", cfg.fit_window);
    cfg.compare_t_end = detail::positive(j, "compare_t_end", cfg.compare_t_end);
    cfg.stride = static_cast<int>(detail::positive(j, "stride", cfg.stride));
    cfg.identity_samples = static_cast<int>(detail::positive(j, "identity_samples", cfg.identity_samples));
    if (j.contains("method")) {
        const auto m = j.at("method").get<std::string>();
        if (m == "rk4") cfg.method = Method::rk4;
        else if (m == "midpoint") cfg.method = Method::midpoint;
        else throw ConfigError("unknown method '" + m + "'");
    }
    if (j.contains("tolerances")) {
        auto fields = cfg.tol.fields();
        for (const auto& [k, v] : j.at("tolerances").items()) {
            auto it = fields.find(k);
            if (it == fields.end()) throw ConfigError("unknown tolerance '" + k + "'");
            if (!v.is_number() || !(v.get<double>() > 0)) throw ConfigError("tolerance '" + k + "' must be positive");
            *it->second = v.get<double>();
        }
    }
    cfg.out = j.value("out", std::string{});
    return cfg;
}

inline RunConfig load_config(const std::string& path, std::optional<std::uint64_t> seed = {}) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open '" + path + "'");
    json j;
    try {
        j = json::parse(f);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
    try {
        return parse_config(j, seed);
    } catch (const json::exception& e) {
        throw ConfigError(e.what());
    }
}

inline VerifyInput verify_input(const RunConfig& c) {
    VerifyInput in;
    in.inertia = c.inertia;
    in.l0 = c.l0;
    in.t_end = c.t_end;
    in.dt = c.dt;
    in.fit_window = c.fit_window;
    in.compare_t_end = c.compare_t_end;
    in.identity_samples = c.identity_samples;
    in.seed = c.seed;
    in.tol = c.tol;
    return in;
}

// %.17g: every double survives a text round trip.
inline std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr, const std::array<double, 4>& a) {
    os << "t,l12,l13,l14,l23,l24,l34,H0,H1,H2,H3\n";
    for (std::size_t k = 0; k < tr.size(); ++k) {
        os << num(tr.times[k]);
        for (double x : tr.states[k].v) os << ',' << num(x);
        for (double h : integrals(tr.states[k], a).as_array()) os << ',' << num(h);
        os << '\n';
    }
}

inline void write_uniformization_csv(std::ostream& os, const Uniformization& run) {
    os << "t,z1_re,z1_im,z2_re,z2_im,u1_re,u1_im,u2_re,u2_im\n";
    for (std::size_t k = 0; k < run.u.size(); ++k) {
        const auto& D = run.recovery[k].D;
        os << num(run.trajectory.times[k]);
        for (cplx z : {D.p1.z, D.p2.z, run.u[k](0), run.u[k](1)}) os << ',' << num(z.real()) << ',' << num(z.imag());
        os << '\n';
    }
}

inline json to_json(const Check& c) {
    json j{{"check", c.check}, {"residual", c.residual}, {"threshold", c.threshold}, {"pass", c.pass}};
    if (c.informational) j["informational"] = true;
    if (!c.note.empty()) j["note"] = c.note;
    return j;
}

inline json report(const std::string& suite, const std::vector<Check>& checks) {
    json arr = json::array();
    for (const auto& c : checks) arr.push_back(to_json(c));
    return {{"suite", suite}, {"pass", all_pass(checks)}, {"checks", arr}};
}

inline json cplx_json(cplx z) { return json::array({z.real(), z.imag()}); }

// Sidecar for the uniformisation CSV: fitted line and the two path checks.
inline json uniformization_json(const Uniformization& run, const Tolerances& tol) {
    double jump = 0;
    for (std::size_t k = 1; k < run.u.size(); ++k) jump = std::max(jump, (run.u[k] - run.u[k - 1]).cwiseAbs().maxCoeff());
    const double dt = run.trajectory.times.size() > 1 ? run.trajectory.times[1] - run.trajectory.times[0] : 0.0;
    const double bound = 10.0 * run.fit.v.cwiseAbs().maxCoeff() * dt;
    std::vector<Check> checks{below("linearity", run.fit.residual, tol.linearity),
                              Check{"continuity", jump, bound, jump <= bound, false, "max sample-to-sample jump"}};
    json arr = json::array();
    for (const auto& c : checks) arr.push_back(to_json(c));
    return {{"u0", {cplx_json(run.fit.u0(0)), cplx_json(run.fit.u0(1))}},
            {"v", {cplx_json(run.fit.v(0)), cplx_json(run.fit.v(1))}},
            {"residual", run.fit.residual},
            {"samples", run.u.size()},
            {"pass", all_pass(checks)},
            {"checks", arr}};
}

}  // namespace manakov::cli
