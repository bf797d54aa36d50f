#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace drm {

// Seeded, forkable random stream. Every consumer of randomness owns an
// explicit Rng value; there is no global state. Forking derives an
// independent substream from a label, so the draw order of one consumer
// never perturbs another (common random numbers across runs rely on this).
class Rng {
public:
    explicit Rng(uint64_t seed) : seed_(seed), eng_(splitmix(seed)) {}

    // Independent substream identified by a label (and optional index).
    Rng fork(std::string_view label, uint64_t index = 0) const {
        uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a over the label
        for (char c : label) {
            h ^= static_cast<uint8_t>(c);
            h *= 0x100000001b3ull;
        }
        return Rng(seed_ ^ splitmix(h ^ (0x9e3779b97f4a7c15ull * (index + 1))));
    }

    uint64_t next_u64() { return eng_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

    // Index drawn from a probability vector (inverse CDF walk).
    int pick(std::span<const double> probs) {
        double u = uniform01();
        double cum = 0.0;
        for (size_t k = 0; k + 1 < probs.size(); ++k) {
            cum += probs[k];
            if (u < cum) return static_cast<int>(k);
        }
        return static_cast<int>(probs.size()) - 1;
    }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(uniform01() * (hi - lo + 1));
    }

private:
    uint64_t seed_ = 0;
    std::mt19937_64 eng_;

    static uint64_t splitmix(uint64_t x) {
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }
};

}  // namespace drm
