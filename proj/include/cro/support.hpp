#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

namespace cro {

// Stateless 64-bit mixer (splitmix64 finalizer). Used to derive independent
// seed substreams so that parallel execution order never changes results.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Seed for substream (lane, index) of a master seed. lane separates purposes
// (setting sampling vs shot sampling vs replication), index separates units
// of work within a purpose.
inline std::uint64_t substream(std::uint64_t master, std::uint64_t lane, std::uint64_t index) {
    return mix64(mix64(master ^ mix64(lane)) ^ mix64(index ^ 0xa5a5a5a5a5a5a5a5ULL));
}

// Thin RNG wrapper: all randomness in the library flows through explicit
// seeds, never a shared generator.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Uniform double in [0, 1).
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n).
    std::uint64_t uniform_int(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("uniform_int: n must be positive");
        // Rejection sampling to avoid modulo bias.
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % n;
    }

    double normal() { return normal_(gen_); }

    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

// Compensated (Kahan) accumulator so that fold results do not depend on
// thread scheduling when combined in a fixed order.
class KahanSum {
public:
    void add(double x) {
        const double y = x - c_;
        const double t = sum_ + y;
        c_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double c_ = 0.0;
};

// Runs fn(i) for i in [0, count) on up to `threads` threads. Callers must
// write results into per-index slots; the helper gives no ordering guarantees
// beyond completion.
inline void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const std::size_t n_workers = std::min<std::size_t>(static_cast<std::size_t>(threads), count);
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    std::atomic<std::size_t> next{0};
    for (std::size_t w = 0; w < n_workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                fn(i);
            }
        });
    }
    for (auto& t : pool) t.join();
}

inline int default_thread_count() {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

}  // namespace cro
