#pragma once

#include <cmath>
#include <cstdint>

namespace telesim {

// Counter-based deterministic RNG. Streams are derived from (seed, point,
// stream) keys so results do not depend on execution order or thread count.
inline std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class RngStream {
  public:
    RngStream(std::uint64_t seed, std::uint64_t point, std::uint64_t stream) {
        std::uint64_t x = seed;
        splitmix64(x);
        x ^= 0x5851f42d4c957f2dULL * (point + 1);
        splitmix64(x);
        x ^= 0x14057b7ef767814fULL * (stream + 1);
        state_ = x;
    }

    std::uint64_t next_u64() { return splitmix64(state_); }

    // uniform in (0, 1)
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    // Poisson sample; Knuth's product method for small means, rounded
    // normal approximation above that (means there are >= 50).
    long long poisson(double mean) {
        if (mean <= 0.0) return 0;
        if (mean < 50.0) {
            const double limit = std::exp(-mean);
            long long k = 0;
            double p = 1.0;
            do {
                ++k;
                p *= uniform();
            } while (p > limit);
            return k - 1;
        }
        double x = mean + std::sqrt(mean) * normal();
        return x < 0.0 ? 0 : static_cast<long long>(std::llround(x));
    }

  private:
    std::uint64_t state_;
};

}  // namespace telesim
