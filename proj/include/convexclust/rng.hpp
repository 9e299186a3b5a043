#pragma once

// Counter-based generator: output k is SplitMix64's finalizer applied to
// key + (k + 1) * golden_gamma, with the key derived from (seed, stream).
// Every draw is a pure function of (seed, stream, counter), so streams are
// reproducible bit for bit on any platform. Distributions are implemented
// here rather than taken from <random>, whose algorithms are unspecified.

#include <cstdint>
#include <limits>
#include <string_view>

namespace convexclust {

class CounterRng {
public:
    using result_type = std::uint64_t;
    static constexpr std::string_view algorithm = "splitmix64-counter/v1";

    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }
    result_type operator()() noexcept;

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept;
    /// Uniform integer on [0, n), n >= 1, without modulo bias.
    std::uint64_t below(std::uint64_t n) noexcept;
    /// Standard normal (Box-Muller).
    double normal() noexcept;

    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

std::uint64_t mix64(std::uint64_t x) noexcept;

/// Child seed for a labelled sub-task, e.g. derive_seed(seed, test, restart).
template <typename... Parts>
std::uint64_t derive_seed(std::uint64_t seed, Parts... parts) noexcept {
    std::uint64_t h = mix64(seed ^ 0x6a09e667f3bcc909ULL);
    ((h = mix64(h ^ (static_cast<std::uint64_t>(parts) + 0x9e3779b97f4a7c15ULL))), ...);
    return h;
}

}  // namespace convexclust
