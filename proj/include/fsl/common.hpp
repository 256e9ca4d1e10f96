#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace fsl {

/// Thrown when an operation is called with arguments violating its contract.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a computation cannot proceed numerically (e.g. a quantity
/// required to be finite is flagged divergent).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Small counter-based generator. Seeding is explicit everywhere so that
/// results never depend on thread scheduling; derive independent streams
/// with derive().
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    static Rng derive(std::uint64_t seed, std::uint64_t stream) {
        return Rng(splitmix64(seed ^ splitmix64(stream + 0x51ED2701)));
    }

    std::uint64_t u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0,1).
    double uniform() { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    std::size_t index(std::size_t n) { return static_cast<std::size_t>(u64() % n); }

private:
    std::uint64_t state_;
};

/// Process-wide default worker count used by the parallel helpers.
inline int& default_threads() {
    static int n = std::max(1u, std::thread::hardware_concurrency());
    return n;
}

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    return std::max(1, default_threads());
}

/// Runs fn(block_index) for block_index in [0, n_blocks) on a small worker
/// pool. Each block writes only its own slot, so the result is identical for
/// any thread count.
inline void parallel_blocks(std::size_t n_blocks, int threads,
                            const std::function<void(std::size_t)>& fn) {
    threads = resolve_threads(threads);
    if (threads == 1 || n_blocks <= 1) {
        for (std::size_t b = 0; b < n_blocks; ++b) fn(b);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t b = next.fetch_add(1);
            if (b >= n_blocks) return;
            fn(b);
        }
    };
    std::vector<std::thread> pool;
    int n = std::min<std::size_t>(threads, n_blocks);
    pool.reserve(n);
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
}

inline double sqr(double x) { return x * x; }

}  // namespace fsl
