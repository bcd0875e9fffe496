#include "support.hpp"
#include "manakov/verify.hpp"

using namespace manakov;

namespace {

struct Sample {
    Moduli m;
    Divisor D;
};

Sample sample(std::uint64_t seed) {
    Rng rng(seed);
    const auto m = random_moduli(rng);
    return {m, random_divisor(m, rng, default_divisor_radius(m))};
}

}  // namespace

TEST_SUITE("wurzel") {
    TEST_CASE("single root functions") {
        const auto [m, D] = sample(1);
        Divisor at{{m.d[2], 0.0}, D.p2};
        CHECK(std::abs(p_single(2, at, m)) == 0);
        CHECK(std::abs(p_single(0, D, m) - std::sqrt(D.p1.z) * std::sqrt(D.p2.z)) == 0);
        for (int j = 0; j <= 4; ++j) {
            const cplx p = p_single(j, D, m);
            CHECK(std::abs(p - p_single(j, D.swapped(), m)) < 1e-14 * std::abs(p));
            CHECK(std::abs(p * p - (D.p1.z - m.d[j]) * (D.p2.z - m.d[j])) < 1e-13 * std::norm(p));
        }
        CHECK_THROWS_AS(p_single(5, D, m), IndexOutOfRange);
    }

    TEST_CASE("pair functions: swap, sheet flip, diagonal") {
        const auto [m, D] = sample(2);
        for (int j = 0; j <= 4; ++j)
            for (int k = j + 1; k <= 4; ++k) {
                const cplx p = p_pair(j, k, D, m);
                CHECK(std::abs(p - p_pair(j, k, D.swapped(), m)) < 1e-12 * std::abs(p));
                CHECK(std::abs(p + p_pair(j, k, D.involuted(), m)) < 1e-12 * std::abs(p));
                CHECK(std::abs(p - p_pair(k, j, D, m)) < 1e-12 * std::abs(p));
            }
        CHECK(std::abs(curve_R(D.p1.z, m) - D.p1.y * D.p1.y) < 1e-12 * std::norm(D.p1.y));
        const Divisor diag{D.p1, D.p1};
        CHECK_THROWS_AS(p_pair(1, 2, diag, m), DiagonalDivisor);
        CHECK_THROWS_AS(p_pair(1, 1, D, m), IndexOutOfRange);
    }

    TEST_CASE("identities at random divisors") {
        Rng rng(11);
        for (int i = 0; i < 200; ++i) {
            const auto m = random_moduli(rng);
            const auto D = random_divisor(m, rng, default_divisor_radius(m));
            const cplx s(0.37 + 0.01 * i, -1.3);
            const auto r = identity_suite(D, m, s);
            CHECK(r.probe_sum < 1e-10);
            CHECK(r.ct_pj4_sq < 1e-10);
            CHECK(r.d_ct_pkl_sq < 1e-10);
            CHECK(r.c_cross < 1e-10);
            CHECK(r.ct_cross_abs < 1e-10);
            CHECK(r.quadric_sum < 1e-10);
            // the bare right side is off by the constant prod (d_j - d_4)
            CHECK(r.probe_sum_literal > 1e-6);
        }
    }

    TEST_CASE("signed P0 agrees with P0 up to sign") {
        const auto [m, D] = sample(3);
        const ModuliConstants mc(m);
        const auto w = wurzel_values(D, m);
        const cplx sp = w.signed_p0(mc);
        CHECK(std::min(std::abs(sp - w.p0), std::abs(sp + w.p0)) < 1e-10 * std::abs(w.p0));
    }

    TEST_CASE("recovery round trip on synthetic divisors") {
        for (std::uint64_t seed = 20; seed < 40; ++seed) {
            const auto [m, D] = sample(seed);
            const cplx g(0.8, -0.3);
            const auto x = forward_map(D, m, g);
            const auto r = recover_divisor(x, m, nullptr, 1e-9);
            const double same = std::abs(r.D.p1.z - D.p1.z) + std::abs(r.D.p2.z - D.p2.z);
            const double swap = std::abs(r.D.p1.z - D.p2.z) + std::abs(r.D.p2.z - D.p1.z);
            CHECK(std::min(same, swap) < 1e-9 * m.scale());
            CHECK(r.residual < 1e-9);
            // g is fixed up to the sign that pairs with the involution
            CHECK(std::min(std::abs(r.g - g), std::abs(r.g + g)) < 1e-9);
        }
    }

    TEST_CASE("g from the quadric agrees with every component") {
        const auto [m, D] = sample(5);
        const cplx g(1.7, 0.4);
        const auto x = forward_map(D, m, g);
        const auto r = recover_divisor(x, m);
        const ModuliConstants mc(m);
        const auto w = wurzel_values(r.D, m);
        for (const auto& [j, k, l] : kCyclic) {
            const cplx gx = x.xi[j] / (mc.sqrt_c[j] * double(r.signs.pair(k + 1, l + 1)) * w.pkl[j]);
            const cplx ge = x.eta[j] / (mc.sqrt_c[j] * double(r.signs.pair(j + 1, 4)) * w.pj4[j]);
            CHECK(std::abs(gx - r.g) < 1e-8 * std::abs(g));
            CHECK(std::abs(ge - r.g) < 1e-8 * std::abs(g));
        }
    }

    TEST_CASE("continuity seeding keeps point order and g sign") {
        const auto [m, D] = sample(6);
        const cplx g(0.5, 0.5);
        const auto first = recover_divisor(forward_map(D, m, g), m);
        const Divisor moved{point_on_curve(D.p1.z + cplx(1e-3, 0), m, 1), point_on_curve(D.p2.z + cplx(0, 1e-3), m, 1)};
        // keep the sheets of D
        Divisor near = moved;
        if (std::abs(near.p1.y - D.p1.y) > std::abs(near.p1.y + D.p1.y)) near.p1.y = -near.p1.y;
        if (std::abs(near.p2.y - D.p2.y) > std::abs(near.p2.y + D.p2.y)) near.p2.y = -near.p2.y;
        const auto next = recover_divisor(forward_map(near, m, g), m, &first);
        CHECK(std::abs(next.D.p1.z - first.D.p1.z) < 1e-2);
        CHECK(std::abs(next.D.p2.z - first.D.p2.z) < 1e-2);
        CHECK(std::abs(next.g - first.g) < 1e-6);
    }

    TEST_CASE("recovery along a trajectory") {
        const auto in = testing::canonical();
        const auto run = uniformize(testing::unit_state(1), in, {0.98, 1e-3, 20, {}});
        REQUIRE(run.recovery.size() == 50);
        const ModuliConstants mc(run.spectral.mod);
        for (std::size_t k = 0; k < run.recovery.size(); ++k) {
            CHECK(run.recovery[k].residual < 1e-9);
            const auto w = wurzel_values(run.recovery[k].D, run.spectral.mod);
            CHECK(std::abs(std::abs(w.signed_p0(mc)) - std::abs(w.p0)) < 1e-9 * std::abs(w.p0));
            if (k > 0) {
                const auto& a = run.recovery[k - 1].D;
                const auto& b = run.recovery[k].D;
                CHECK(std::abs(a.p1.z - b.p1.z) + std::abs(a.p2.z - b.p2.z) < 0.25 * run.spectral.mod.scale());
                CHECK(std::abs(run.recovery[k].g - run.recovery[k - 1].g) <
                      std::abs(run.recovery[k].g + run.recovery[k - 1].g));
            }
        }
    }

    TEST_CASE("uniformisation constants from the normal form") {
        const auto in = testing::canonical();
        const auto sd = spectral_data(testing::unit_state(2), in.a);
        const auto nf = h0_normal_form(sd);
        Rng rng(4);
        std::vector<Divisor> ds;
        for (int i = 0; i < 12; ++i) ds.push_back(random_divisor(sd.mod, rng, default_divisor_radius(sd.mod)));
        const auto uc = uniformization_constants(nf, sd.mod, ds);
        CHECK(uc.fit_residual < 1e-9);
        CHECK(uc.square_defect < 1e-8);
        CHECK(std::abs(uc.C) > 0);
        CHECK_THROWS_AS(uniformization_constants(nf, sd.mod, {ds[0], ds[1]}), DomainError);
    }
}
