#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace uvtex {

// Deterministic RNG. mt19937_64 is fully specified by the standard; the
// uniform/normal mappings are hand-rolled because std distributions are
// implementation-defined.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t bits() { return gen_(); }

    // [0, 1)
    double uniform() { return (gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller, pair cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - uniform(); // (0, 1]
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // Uniform integer in [lo, hi], inclusive. Rejection sampling, unbiased.
    int64_t randint(int64_t lo, int64_t hi) {
        uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
        uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return lo + static_cast<int64_t>(x % span);
    }

    // splitmix64 finalizer; derives independent stream seeds.
    static uint64_t mix(uint64_t a, uint64_t b) {
        uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace uvtex
