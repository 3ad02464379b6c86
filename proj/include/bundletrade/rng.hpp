#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>

namespace bundletrade {

/// splitmix64 finalizer. Used to derive independent stream seeds from a
/// master seed and a cell index.
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return mix_seed(master ^ mix_seed(index + 1));
}

/// Seeded generator with a fully specified output sequence: std::mt19937_64
/// has its values fixed by the standard, and the conversions below avoid the
/// implementation-defined std distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next() { return gen_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer on [lo, hi], by rejection.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        if (hi < lo) throw std::invalid_argument("uniform_int: empty range");
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        if (span == 0) return static_cast<std::int64_t>(gen_());
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        std::uint64_t draw;
        do {
            draw = gen_();
        } while (draw >= limit);
        return lo + static_cast<std::int64_t>(draw % span);
    }

    bool bernoulli(double p) { return uniform01() < p; }

private:
    std::mt19937_64 gen_;
};

}  // namespace bundletrade
