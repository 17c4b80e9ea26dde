// Shared fixed instances used across the suites.
#pragma once

#include "tsdp/types.hpp"

namespace fixtures {

// 4-node ring network, doubly stochastic, uniform stationary distribution.
inline tsdp::StochasticMatrix ring4() {
    return tsdp::StochasticMatrix::from_triplets(
        4, {{0, 0, 0.5},  {0, 1, 0.25}, {0, 3, 0.25},
            {1, 0, 0.25}, {1, 1, 0.5},  {1, 2, 0.25},
            {2, 1, 0.25}, {2, 2, 0.5},  {2, 3, 0.25},
            {3, 0, 0.25}, {3, 2, 0.25}, {3, 3, 0.5}});
}

inline tsdp::Distribution ring4_target() {
    return tsdp::Distribution({0.125, 0.125, 0.25, 0.5});
}

// Zero-diagonal 3-node cycle.
inline tsdp::StochasticMatrix cycle3() {
    return tsdp::StochasticMatrix::from_triplets(3, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 0, 1.0}});
}

inline tsdp::Distribution cycle3_target() {
    return tsdp::Distribution({0.5, 0.25, 0.25});
}

// The perturbed ring with stationary distribution [2/5, 1/5, 1/5, 1/5].
inline tsdp::StochasticMatrix ring4_boosted() {
    return tsdp::StochasticMatrix::from_triplets(
        4, {{0, 0, 0.75}, {0, 1, 0.125}, {0, 3, 0.125},
            {1, 0, 0.25}, {1, 1, 0.5},   {1, 2, 0.25},
            {2, 1, 0.25}, {2, 2, 0.5},   {2, 3, 0.25},
            {3, 0, 0.25}, {3, 2, 0.25},  {3, 3, 0.5}});
}

inline tsdp::Distribution ring4_boosted_mu() {
    return tsdp::Distribution({0.4, 0.2, 0.2, 0.2});
}

}  // namespace fixtures
