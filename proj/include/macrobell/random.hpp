// Copyright 2026 The macrobell Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Counter-keyed random streams.
//
// Every random draw in the library comes from an Rng obtained by
// Rng::stream(master_seed, domain, index). The stream depends only on those
// three numbers, so trial i produces the same outcomes no matter which
// worker generates it or in what order.

#include <array>
#include <cstdint>
#include <limits>

namespace macrobell {

/// splitmix64 finalizer.
constexpr uint64_t mix64(uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Stream domains. Keeping them distinct keeps e.g. bootstrap resamples
/// independent of the trials they resample.
enum class Domain : uint64_t {
    kTrial = 0x7472,
    kNoise = 0x6e6f,
    kBootstrap = 0x6273,
    kGameRound = 0x6772,
    kStrategy = 0x7374,
    kTest = 0x7465,
};

/// xoshiro256++ engine; satisfies UniformRandomBitGenerator.
class Rng {
   public:
    using result_type = uint64_t;

    explicit Rng(uint64_t seed = 0) {
        uint64_t z = seed;
        for (auto &w : s_) {
            z = mix64(z);
            w = z;
        }
    }

    static Rng stream(uint64_t master_seed, Domain domain, uint64_t index) {
        uint64_t key = mix64(master_seed);
        key = mix64(key ^ static_cast<uint64_t>(domain));
        key = mix64(key ^ index);
        return Rng(key);
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound); Lemire's multiply-shift, bias < 2^-32 for
    /// the bounds used here.
    uint64_t below(uint64_t bound) {
        return static_cast<uint64_t>((static_cast<unsigned __int128>((*this)()) * bound) >> 64);
    }

   private:
    static constexpr uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::array<uint64_t, 4> s_{};
};

}  // namespace macrobell
