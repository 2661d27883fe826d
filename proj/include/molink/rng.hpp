#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace molink {

// Deterministic random source. All randomness in the project flows through
// explicitly seeded instances of this class; nothing reads ambient entropy.
//
// Independent streams are derived with fork(): the child seed is a hash of
// the parent's construction seed and the stream index, so forking does not
// depend on how much the parent has already consumed. Gaussians come from a
// hand-rolled Box-Muller transform because the standard library's
// normal_distribution is not bit-stable across implementations.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : base_(seed), engine_(scramble(seed)) {}

    Rng fork(std::uint64_t stream) const {
        return Rng(mix(base_, stream));
    }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    int bit() { return static_cast<int>(engine_() >> 63); }

    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u = 0.0;
        do {
            u = uniform();
        } while (u <= 0.0);
        const double v = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u));
        const double angle = 6.28318530717958647692528676655900577 * v;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    std::uint64_t base_seed() const { return base_; }

  private:
    static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
        std::uint64_t x = a + 0x9e3779b97f4a7c15ULL * (b + 0x632be59bd9b4e019ULL);
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    static std::uint64_t scramble(std::uint64_t s) { return mix(s, 0); }

    std::uint64_t base_;
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace molink
