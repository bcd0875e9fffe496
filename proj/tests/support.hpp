#pragma once

#include <doctest.h>

#include "manakov/pipeline.hpp"

namespace testing {

inline manakov::InertiaParameters canonical() { return manakov::InertiaParameters::from_ab({1, 2, 3, 4}, {1, 4, 9, 16}); }

inline manakov::State unit_state(std::uint64_t seed) {
    manakov::Rng rng(seed);
    return manakov::random_unit_state(rng);
}

// Equilibrium: only l12 and l34 nonzero.
inline manakov::State equilibrium() { return manakov::State{{1.0, 0, 0, 0, 0, 2.0}}; }

}  // namespace testing
