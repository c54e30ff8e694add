#pragma once

#include <cstdint>
#include <random>

#include <boost/math/distributions/normal.hpp>

namespace fragility {

/// Deterministic random stream addressed by (master seed, stream index).
///
/// Every consumer derives its engine from the pair, so a realization depends
/// only on its index and never on scheduling or thread count. Child streams
/// give independent sub-sequences (e.g. parameters vs. noise of one motion).
class RandomStream {
public:
    constexpr RandomStream(std::uint64_t seed, std::uint64_t index = 0) noexcept
        : seed_(seed), index_(index) {}

    constexpr std::uint64_t seed() const noexcept { return seed_; }
    constexpr std::uint64_t index() const noexcept { return index_; }

    /// Stream for sub-task `k` of this stream.
    constexpr RandomStream child(std::uint64_t k) const noexcept {
        return RandomStream(seed_, mix(index_ + 0x9e3779b97f4a7c15ULL * (k + 1)));
    }

    std::mt19937_64 engine() const {
        std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                          static_cast<std::uint32_t>(index_), static_cast<std::uint32_t>(index_ >> 32)};
        return std::mt19937_64(seq);
    }

    friend constexpr bool operator==(const RandomStream&, const RandomStream&) = default;

private:
    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        // splitmix64 finalizer
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
    std::uint64_t index_;
};

/// Uniform variate on the open interval (0, 1) built from the top 53 bits.
/// Independent of the standard library's distribution implementations, so
/// draws are identical across toolchains.
inline double open_uniform(std::mt19937_64& eng) {
    return (static_cast<double>(eng() >> 11) + 0.5) * 0x1.0p-53;
}

inline double standard_normal_quantile(double u) {
    static const boost::math::normal_distribution<double> unit{};
    return boost::math::quantile(unit, u);
}

/// Standard normal variate by inversion.
inline double standard_normal(std::mt19937_64& eng) {
    return standard_normal_quantile(open_uniform(eng));
}

}  // namespace fragility
