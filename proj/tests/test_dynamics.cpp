#include "support.hpp"

using namespace manakov;

namespace {

Mat4 random_symmetric_c(std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> U(1.0, 8.0);
    Mat4 c = Mat4::Zero();
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) c(i, j) = c(j, i) = U(rng);
    return c;
}

}  // namespace

TEST_SUITE("dynamics") {
    TEST_CASE("vector field special cases") {
        const auto in = testing::canonical();
        CHECK(euler_frahm_rhs(State{}, in.c).norm_inf() == 0);
        const auto ones = derive_c({1, 2, 3, 4}, {1, 2, 3, 4});
        CHECK(euler_frahm_rhs(testing::unit_state(1), ones).norm_inf() < 1e-15);
        CHECK(euler_frahm_rhs(testing::equilibrium(), in.c).norm_inf() == 0);
    }

    TEST_CASE("vector field against an entrywise commutator") {
        const auto in = testing::canonical();
        const auto l = testing::unit_state(7);
        const auto d = euler_frahm_rhs(l, in.c);
        for (int s = 0; s < 6; ++s) {
            auto [i, j] = kPairs[s];
            double acc = 0;
            for (int k = 0; k < 4; ++k)
                acc += l.at(i, k) * in.c(k, j) * l.at(k, j) - in.c(i, k) * l.at(i, k) * l.at(k, j);
            CHECK(d[s] == doctest::Approx(acc).epsilon(1e-13));
        }
    }

    TEST_CASE("equilibrium stays put") {
        const auto tr = integrate(testing::equilibrium(), testing::canonical().c, 2.0, 1e-3);
        for (const auto& s : tr.states) CHECK((s - testing::equilibrium()).norm_inf() == 0);
        CHECK(tr.size() == 2001);
    }

    TEST_CASE("fourth-order convergence") {
        const auto in = testing::canonical();
        const auto l0 = testing::unit_state(2);
        const double T = 1.0;
        const auto ref = integrate(l0, in.c, T, 0.1 / 8).states.back();
        const double e1 = (integrate(l0, in.c, T, 0.1).states.back() - ref).norm_inf();
        const double e2 = (integrate(l0, in.c, T, 0.05).states.back() - ref).norm_inf();
        CHECK(e1 / e2 > 12.0);
        CHECK(e1 / e2 < 20.0);
    }

    TEST_CASE("conservation and the non-Manakov discriminator") {
        const auto in = testing::canonical();
        const auto l0 = testing::unit_state(4);
        const auto drift = integral_drift(integrate(l0, in.c, 20.0, 1e-3), in.a);
        for (double d : drift) CHECK(d < 1e-8);

        const auto bad = integral_drift(integrate(l0, random_symmetric_c(9), 20.0, 1e-3), in.a);
        CHECK(bad[0] < 1e-8);
        CHECK(bad[1] < 1e-8);
        CHECK(std::max(bad[2], bad[3]) > 1e-3);
    }

    TEST_CASE("H3 with same-pair weights is not conserved") {
        const auto in = testing::canonical();
        const auto tr = integrate(testing::unit_state(4), in.c, 5.0, 1e-3, Method::rk4, 100);
        auto literal = [&](const State& l) {
            double h = 0;
            for (int s = 0; s < 6; ++s) h += in.a[kPairs[s].first] * in.a[kPairs[s].second] * l[s] * l[s];
            return h;
        };
        double spread = 0;
        for (const auto& s : tr.states) spread = std::max(spread, std::abs(literal(s) - literal(tr.states[0])));
        CHECK(spread > 1e-3);
    }

    TEST_CASE("implicit midpoint preserves the quadratic Casimirs") {
        const auto in = testing::canonical();
        const auto l0 = testing::unit_state(5);
        const auto drift = integral_drift(integrate(l0, in.c, 5.0, 1e-2, Method::midpoint), in.a);
        CHECK(drift[0] < 1e-13);
        CHECK(drift[1] < 1e-13);
    }

    TEST_CASE("integrator errors") {
        const auto in = testing::canonical();
        CHECK_THROWS_AS(integrate(testing::unit_state(1), in.c, 1.0, 0.0), DomainError);
        CHECK_THROWS_AS(integrate(testing::unit_state(1), in.c, -1.0, 1e-3), DomainError);
        CHECK_THROWS_AS(integrate(1e200 * testing::unit_state(1), in.c, 1.0, 1e-3), NonFiniteState);
    }

    TEST_CASE("generating function") {
        const auto in = testing::canonical();
        const auto l = testing::unit_state(6);
        const auto h = integrals(l, in.a);
        for (const cplx s : {cplx(0.3, 0.7), cplx(-2.1, 0.4), cplx(5.5, -1.0)}) {
            const cplx poly = 0.5 * (generating_function_f(s, l, in.a, 1) + generating_function_f(s, l, in.a, -1));
            const cplx expect = generating_polynomial(s, h);
            CHECK(std::abs(poly - expect) < 1e-12 * std::abs(expect));
            CHECK(std::abs(generating_function_f(s, State{}, in.a, 1)) == 0);
        }
        const cplx at_a1 = generating_function_f(in.a[0], l, in.a, 1);
        CHECK(std::abs(at_a1 - generating_polynomial(in.a[0], h)) < 1e-13);
        // f(s) is the squared length of l(s)
        const auto r = spectral_roots(cplx(0.3, 0.7), in.a, 1);
        const auto ls = l_of_s(r, l);
        const cplx sq = ls[0] * ls[0] + ls[1] * ls[1] + ls[2] * ls[2];
        CHECK(std::abs(sq - generating_function_f(cplx(0.3, 0.7), l, in.a, 1)) < 1e-13);
    }

    TEST_CASE("Lax residual") {
        const auto in = testing::canonical();
        const auto eq = integrate(testing::equilibrium(), in.c, 0.2, 1e-3);
        CHECK(lax_residual(eq, in.a, cplx(0.5, 0.5)) < 1e-12);

        const auto tr = integrate(testing::unit_state(8), in.c, 1.0, 1e-3);
        for (const cplx s : {cplx(0.4, 1.3), cplx(2.5, -0.7), cplx(-1.0, 0.2)}) CHECK(lax_residual(tr, in.a, s) < 1e-6);

        const auto bad = integrate(testing::unit_state(8), random_symmetric_c(3), 1.0, 1e-3);
        CHECK(lax_residual(bad, in.a, cplx(0.4, 1.3)) > 1e-3);

        const auto L = lax_pair(cplx(0.4, 1.3), testing::unit_state(8), in.a);
        CHECK((L.L + L.L.transpose()).cwiseAbs().maxCoeff() == 0);
        CHECK((L.M + L.M.transpose()).cwiseAbs().maxCoeff() == 0);
    }
}
