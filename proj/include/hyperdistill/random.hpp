// random.hpp - named, splittable, seeded random streams
//
// Every stochastic operation takes a RandomStream explicitly. Child streams
// are derived from (parent seed, child path) only, so splitting never
// perturbs the parent's sequence and the same path always yields the same
// child.

#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hyperdistill {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

}  // namespace detail

class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed, std::string name = "root")
        : seed_(seed), name_(std::move(name)), engine_(detail::splitmix64(seed ^ detail::fnv1a(name_))) {}

    RandomStream split(std::string_view child) const {
        const std::string path = name_ + '/' + std::string(child);
        return RandomStream(detail::splitmix64(seed_ ^ detail::fnv1a(path)), path);
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    // Uniform integer in [0, n), rejection-sampled to avoid modulo bias.
    std::size_t uniform_index(std::size_t n) {
        if (n == 0) throw std::invalid_argument("RandomStream::uniform_index: n must be positive");
        const std::uint64_t bound = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return static_cast<std::size_t>(x % bound);
    }

    std::uint64_t seed() const { return seed_; }
    const std::string& name() const { return name_; }

private:
    std::uint64_t seed_;
    std::string name_;
    std::mt19937_64 engine_;
};

}  // namespace hyperdistill
