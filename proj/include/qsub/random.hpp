// Copyright 2026 The qsub Authors
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

#ifndef QSUB_RANDOM_HPP
#define QSUB_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace qsub {

using Rng = std::mt19937_64;

/// One round of the SplitMix64 finalizer.
constexpr uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Folds a list of coordinates into a base seed. Order matters.
inline uint64_t derive_seed(uint64_t base, std::initializer_list<uint64_t> coords) {
    uint64_t h = splitmix64(base);
    for (uint64_t c : coords) {
        h = splitmix64(h ^ splitmix64(c + 0x632be59bd9b4e019ULL));
    }
    return h;
}

/// Standard normal draws. std::normal_distribution is implementation defined,
/// so a fixed Box-Muller keeps streams identical across standard libraries.
class NormalSource {
   public:
    explicit NormalSource(uint64_t seed) : rng_(seed) {}

    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform_open();
        double u2 = uniform_open();
        double mag = std::sqrt(-2.0 * std::log(u1));
        constexpr double kTwoPi = 6.283185307179586476925286766559;
        spare_ = mag * std::sin(kTwoPi * u2);
        has_spare_ = true;
        return mag * std::cos(kTwoPi * u2);
    }

    /// Uniform in (0, 1).
    double uniform_open() {
        return (static_cast<double>(rng_() >> 11) + 0.5) * 0x1.0p-53;
    }

    Rng &engine() { return rng_; }

   private:
    Rng rng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Uniform in [0, 1) from 53 random bits.
inline double uniform01(Rng &rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace qsub

#endif
