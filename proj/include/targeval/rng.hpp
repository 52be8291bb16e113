#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <thread>
#include <vector>

namespace targeval {

/// SplitMix64 generator with a per-stream odd increment.
///
/// Streams derived via `stream(seed, i)` are decorrelated and fully
/// determined by (seed, i). Simulators assign one stream per replicate, so
/// the draws of replicate i are identical no matter how replicates are
/// distributed over threads.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t state, std::uint64_t gamma = kDefaultGamma)
        : state_(state), gamma_(gamma | 1ULL) {}

    static SplitMix64 stream(std::uint64_t seed, std::uint64_t stream_index) {
        const std::uint64_t s = mix(seed + kDefaultGamma * (stream_index + 1));
        const std::uint64_t g = mix(s + kDefaultGamma);
        return SplitMix64(s, g);
    }

    std::uint64_t next() {
        state_ += gamma_;
        return mix(state_);
    }

    /// Uniform integer in [0, n) without modulo bias (Lemire's method).
    std::uint64_t below(std::uint64_t n) {
        unsigned __int128 m = static_cast<unsigned __int128>(next()) * n;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            const std::uint64_t threshold = -n % n;
            while (lo < threshold) {
                m = static_cast<unsigned __int128>(next()) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Uniform double in [0, 1).
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    static constexpr std::uint64_t kDefaultGamma = 0x9E3779B97F4A7C15ULL;

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
    std::uint64_t gamma_;
};

/// Fills `scratch` with 0..n-1 and partially Fisher-Yates shuffles it so that
/// its first `take` entries are a uniform random `take`-subset in random order.
inline void partial_shuffle(std::vector<std::uint32_t>& scratch, std::size_t n,
                            std::size_t take, SplitMix64& rng) {
    scratch.resize(n);
    std::iota(scratch.begin(), scratch.end(), 0U);
    for (std::size_t i = 0; i < take; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(scratch[i], scratch[j]);
    }
}

/// Runs fn(lo, hi) over a partition of [0, total) using up to `threads`
/// worker threads. fn must only touch state indexed inside its own range.
template <typename Fn>
void parallel_chunks(std::int64_t total, int threads, Fn&& fn) {
    if (threads <= 1 || total < 2) {
        fn(std::int64_t{0}, total);
        return;
    }
    const int workers = static_cast<int>(std::min<std::int64_t>(threads, total));
    const std::int64_t chunk = (total + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        const std::int64_t lo = static_cast<std::int64_t>(w) * chunk;
        const std::int64_t hi = std::min(total, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
    }
    for (auto& worker : pool) worker.join();
}

} // namespace targeval
