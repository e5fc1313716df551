// Copyright 2026 The qtur Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file
 * Seed hierarchy for reproducible parallel Monte Carlo.
 *
 * A stream is identified by a 64-bit seed. Child streams are derived from
 * (parent, index) by a stateless hash, so the stream used by trajectory i does
 * not depend on which worker runs it or in which order.
 */

#pragma once

#include <cstdint>
#include <random>

namespace qtur {

using Engine = std::mt19937_64;

/// SplitMix64 finalizer.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

[[nodiscard]] constexpr std::uint64_t child_seed(std::uint64_t parent,
                                                 std::uint64_t index) noexcept {
    return mix64(parent ^ mix64(index ^ 0xD1B54A32D192ED03ULL));
}

/// Named sub-streams of a master seed.
enum class Stream : std::uint64_t {
    trajectories = 1,
    parameters = 2,
    points = 3,
};

[[nodiscard]] constexpr std::uint64_t child_seed(std::uint64_t parent,
                                                 Stream stream) noexcept {
    return child_seed(parent, static_cast<std::uint64_t>(stream) << 56);
}

[[nodiscard]] inline Engine make_engine(std::uint64_t seed) {
    return Engine(mix64(seed));
}

/// Uniform double in [0, 1) from the top 53 bits.
[[nodiscard]] inline double uniform01(Engine &eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

} // namespace qtur
