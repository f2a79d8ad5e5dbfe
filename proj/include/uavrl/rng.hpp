#pragma once

#include <cstdint>
#include <random>

namespace uavrl {

// Deterministic random stream. All draws are built from raw 64-bit engine
// output so identical seeds reproduce identical runs bit-for-bit, independent
// of the standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n), rejection-sampled to avoid modulo bias.
    std::uint64_t uniform_int(std::uint64_t n) {
        const std::uint64_t limit = (UINT64_MAX / n) * n;
        std::uint64_t r;
        do {
            r = gen_();
        } while (r >= limit);
        return r % n;
    }

    // Uniform in [-bound, bound].
    double uniform_sym(double bound) { return (2.0 * uniform01() - 1.0) * bound; }

    // Keyed mixer for deriving independent job streams; the result depends
    // only on the inputs, never on scheduling order.
    static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
        std::uint64_t x = a ^ (0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2));
        x ^= x >> 30;
        x *= 0xbf58476d1ce4e5b9ULL;
        x ^= x >> 27;
        x *= 0x94d049bb133111ebULL;
        x ^= x >> 31;
        return x;
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace uavrl
