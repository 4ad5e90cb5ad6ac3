#ifndef BREWVEC_RANDOM_HPP
#define BREWVEC_RANDOM_HPP

#include <cstdint>
#include <random>

namespace brewvec {

/**
 * @brief Seeded generator whose derived draws are identical on every platform.
 *
 * std::uniform_*_distribution is implementation-defined, so bounded integers
 * and unit doubles are derived from the raw mt19937_64 stream here.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform double strictly inside (0, 1).
    double open_unit() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

    /// Uniform double in [0, 1).
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound). bound must be positive.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x = next();
        while (x >= limit) x = next();
        return x % bound;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace brewvec

#endif  // BREWVEC_RANDOM_HPP
