#pragma once

#include <cstdint>
#include <random>

namespace mlr {

// Fixed-algorithm generator; std distributions are implementation-defined,
// so draws are derived from raw 64-bit output.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    // Unbiased enough for small ranges used here.
    long integer(long lo, long hi) {
        auto span = static_cast<std::uint64_t>(hi - lo + 1);
        return lo + static_cast<long>(eng_() % span);
    }
    double normal() {
        // Box-Muller, one value per call.
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }
    std::uint64_t raw() { return eng_(); }

private:
    std::mt19937_64 eng_;
};

// Derive independent stream seeds from a base seed and labels (splitmix64).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    auto step = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return step(step(step(seed) ^ a) ^ (b * 0x632be59bd9b4e019ULL));
}

} // namespace mlr
