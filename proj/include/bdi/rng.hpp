#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace bdi {

// Seeded generator with platform-independent draws. std::mt19937_64's output
// sequence is fixed by the standard, but the std distributions are not, so
// every draw goes through the helpers below.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Stream derived from a base seed and a tuple of small integers; used to
    // give each sweep cell and each forest tree its own sequence.
    static Rng derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

    std::uint64_t next() { return engine_(); }

    // Uniform integer in [0, bound). bound must be > 0.
    std::uint64_t below(std::uint64_t bound);

    // Uniform real in [0, 1) with 53 bits of precision.
    double unit();

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[below(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace bdi
