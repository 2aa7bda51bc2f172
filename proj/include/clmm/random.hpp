#ifndef CLMM_RANDOM_HPP
#define CLMM_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace clmm {

// Noise streams are keyed by (master seed, stream tag, path index) so that a
// path draws the same numbers whichever worker simulates it.
enum class Stream : std::uint64_t { Rate = 1, FeeRate = 2, Drift = 3, Events = 4, Auxiliary = 5 };

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t stream_seed(std::uint64_t master, Stream stream, std::uint64_t path) {
    return splitmix64(splitmix64(master ^ splitmix64(static_cast<std::uint64_t>(stream))) + path);
}

/// Standard normal draws via Box-Muller on a 64-bit Mersenne twister. Kept
/// explicit instead of std::normal_distribution so output does not depend on
/// the standard library implementation.
class NormalStream {
public:
    NormalStream(std::uint64_t master, Stream stream, std::uint64_t path) : engine_(stream_seed(master, stream, path)) {}

    double operator()() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double angle = 6.283185307179586476925 * u2;
        spare_ = r * std::sin(angle);
        has_spare_ = true;
        return r * std::cos(angle);
    }

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    double spare_{0};
    bool has_spare_{false};
};

}  // namespace clmm

#endif  // CLMM_RANDOM_HPP
