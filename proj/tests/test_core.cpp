#include "support.hpp"
#include "manakov/verify.hpp"

using namespace manakov;

TEST_SUITE("core") {
    TEST_CASE("Manakov couplings from a and b") {
        const auto c = derive_c({1, 2, 3, 4}, {1, 4, 9, 16});
        CHECK(c(0, 1) == doctest::Approx(3));
        CHECK(c(2, 3) == doctest::Approx(7));
        for (int i = 0; i < 4; ++i) {
            CHECK(c(i, i) == 0);
            for (int j = 0; j < 4; ++j)
                if (i != j) CHECK(c(i, j) == doctest::Approx(i + 1 + j + 1));
        }
        const auto ones = derive_c({1, 2, 3, 4}, {1, 2, 3, 4});
        const auto zero = derive_c({1, 2, 3, 4}, {5, 5, 5, 5});
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                CHECK(ones(i, j) == (i == j ? 0.0 : 1.0));
                CHECK(zero(i, j) == 0.0);
            }
        CHECK((c - c.transpose()).cwiseAbs().maxCoeff() == 0);
    }

    TEST_CASE("repeated modulus is rejected") {
        CHECK_THROWS_AS(derive_c({1, 2, 2, 4}, {1, 4, 9, 16}), DuplicateModulus);
        CHECK_THROWS_AS(InertiaParameters::from_c({1, 1, 3, 4}, Mat4::Zero()), DuplicateModulus);
    }

    TEST_CASE("storage order and the cyclic m, n views") {
        const State l{{1, 2, 3, 4, 5, 6}};  // l12 l13 l14 l23 l24 l34
        const auto m = l.m();
        const auto n = l.n();
        CHECK(m[0] == 4);
        CHECK(m[1] == -2);  // m2 = l31 = -l13
        CHECK(m[2] == 1);
        CHECK(n == Vec3<double>{3, 5, 6});
        CHECK(State::from_mn(m, n).v == l.v);
        CHECK(l.at(1, 0) == -1);
        CHECK(l.at(3, 2) == -6);
        CHECK(slot(2, 1) == slot(1, 2));
    }

    TEST_CASE("bracket on coordinate functions") {
        const auto l = testing::unit_state(3);
        CHECK(poisson_bracket(1, 2, 2, 3, l) == doctest::Approx(l[slot(0, 2)]));  // {l12, l23} = l13
        CHECK(poisson_bracket(1, 2, 3, 4, l) == 0);
        CHECK(poisson_bracket(1, 2, 2, 1, l) == 0);
        for (int a = 0; a < 6; ++a)
            for (int b = 0; b < 6; ++b) {
                auto [i, j] = kPairs[a];
                auto [k, m] = kPairs[b];
                CHECK(poisson_bracket(i + 1, j + 1, k + 1, m + 1, l) ==
                      doctest::Approx(-poisson_bracket(k + 1, m + 1, i + 1, j + 1, l)));
            }
        CHECK_THROWS_AS(poisson_bracket(0, 2, 3, 4, l), IndexOutOfRange);
        CHECK_THROWS_AS(poisson_bracket(1, 5, 3, 4, l), IndexOutOfRange);
        CHECK_THROWS_AS(poisson_bracket(1, 1, 3, 4, l), IndexOutOfRange);
    }

    TEST_CASE("Jacobi identity and Casimirs at random states") {
        for (std::uint64_t s = 1; s <= 5; ++s) {
            const auto l = testing::unit_state(s);
            CHECK(jacobi_defect(l) < 1e-14);
            CHECK(bracket_with_gradient(grad_h0(l), l).norm_inf() < 1e-14);
            CHECK(bracket_with_gradient(grad_h1(l), l).norm_inf() < 1e-14);
        }
    }

    TEST_CASE("integral levels") {
        const std::array<double, 4> a{1, 2, 3, 4};
        const auto z = integrals(State{}, a);
        CHECK(z.as_array() == std::array<double, 4>{0, 0, 0, 0});

        // l12 = 1, l34 = 2: weights come from the complementary pair (a3 + a4, a3 a4 for l12).
        const auto h = integrals(State{{1, 0, 0, 0, 0, 2}}, a);
        CHECK(h.h0 == 2);
        CHECK(h.h1 == 5);
        CHECK(h.h2 == 7 * 1 + 3 * 4);
        CHECK(h.h3 == 12 * 1 + 2 * 4);
        CHECK(h.scale() == 20);
    }

    TEST_CASE("the right-hand side is the Hamiltonian vector field") {
        const auto in = testing::canonical();
        for (std::uint64_t s = 1; s <= 20; ++s) {
            const auto l = testing::unit_state(s);
            CHECK((euler_frahm_rhs(l, in.c) - hamiltonian_field(l, in.c)).norm_inf() < 1e-13);
        }
    }
}
