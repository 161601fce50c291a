#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

namespace finprep {

// SplitMix64 finalizer. Full-period 64-bit mixer, the usual constants.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Counter-based generator: output i is splitmix64(key + i * gamma).
// Substreams are derived by folding stream ids into the key, so
// Rng(seed).substream(a).substream(b) is a pure function of (seed, a, b).
// Independent substreams make parallel generation reproducible: each unit
// of work owns a stream addressed by its position, not by execution order.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : key_(splitmix64(seed ^ 0x5851F42D4C957F2DULL)) {}

    Rng substream(std::uint64_t id) const {
        Rng child(*this);
        child.key_ = splitmix64(key_ ^ splitmix64(id ^ 0xD1342543DE82EF95ULL));
        child.counter_ = 0;
        return child;
    }

    Rng substream(std::initializer_list<std::uint64_t> path) const {
        Rng child(*this);
        for (std::uint64_t id : path) child = child.substream(id);
        return child;
    }

    std::uint64_t next_u64() { return splitmix64(key_ + ++counter_ * 0x9E3779B97F4A7C15ULL); }

    // Uniform in [0, n) without modulo bias (masked rejection).
    std::uint64_t next_below(std::uint64_t n) {
        if (n <= 1) return 0;
        std::uint64_t mask = ~0ULL >> __builtin_clzll((n - 1) | 1);
        for (;;) {
            std::uint64_t v = next_u64() & mask;
            if (v < n) return v;
        }
    }

    // Uniform in [0, 1) with 53 bits of precision.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return next_double() < p; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // k distinct indices drawn from [0, n), in random order.
    std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k) {
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        shuffle(idx);
        idx.resize(k < n ? k : n);
        return idx;
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace finprep
