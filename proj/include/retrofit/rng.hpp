#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace retrofit {

// Seeded random stream. All sampling goes through explicit transforms of the
// raw 64-bit output so that a given seed produces the same values on every
// platform, independent of the standard library's distribution internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0,1) with 53 bits of mantissa.
    double uniform01() { return std::ldexp(static_cast<double>(engine_() >> 11), -53); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Box-Muller; one value per call, no cached spare.
    double normal(double mean = 0.0, double stddev = 1.0) {
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        return mean + stddev * r * std::cos(2.0 * M_PI * u2);
    }

    // Uniform integer in [0, n).
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform01() * static_cast<double>(n)); }

    // Fisher-Yates.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    // Derive an independent stream, e.g. per epoch or per example.
    Rng fork(std::uint64_t salt) const {
        std::uint64_t s = seed_ ^ (0x9E3779B97F4A7C15ull * (salt + 0x632BE59BD9B4E019ull));
        return Rng(s);
    }

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace retrofit
