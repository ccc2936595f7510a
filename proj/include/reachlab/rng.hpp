#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <thread>
#include <vector>

#include "reachlab/common.hpp"

namespace reachlab {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}
}  // namespace detail

// Counter-derived random stream: stream k of a given seed is obtained by
// hashing (seed, k), so any chunk of work can be re-keyed independently of
// how many threads execute it.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0) {
        std::uint64_t s = seed;
        std::uint64_t h = detail::splitmix64(s);
        s = h ^ (0xD1B54A32D192ED03ULL * (stream + 1));
        state_ = detail::splitmix64(s) ^ stream;
    }

    std::uint64_t next_u64() { return detail::splitmix64(state_); }

    // Uniform in [0,1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    // Standard normal via Box-Muller; explicit formulas keep the byte stream
    // independent of the standard library implementation.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do {
            u1 = uniform01();
        } while (u1 <= 0.0);
        u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::uint64_t state_ = 0;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Result of a Monte-Carlo mean estimate.
struct McEstimate {
    double mean = 0.0;
    double stderr_of_mean = 0.0;
    std::uint64_t samples = 0;
};

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("REACHLAB_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 1;
}

// Chunked deterministic Monte-Carlo driver.  Work is split into fixed-size
// chunks; chunk c draws from RngStream(seed, c) and partial sums are reduced
// in chunk order, so the result is bitwise independent of the thread count.
template <class SampleFn>  // double(RngStream&)
McEstimate mc_mean(std::uint64_t n, std::uint64_t seed, int threads, SampleFn&& sample) {
    if (n == 0) throw ValidationError("mc_mean: sample count must be >= 1");
    constexpr std::uint64_t kChunk = 1u << 15;
    const std::uint64_t n_chunks = (n + kChunk - 1) / kChunk;
    struct Partial {
        double sum = 0.0, sum_sq = 0.0;
    };
    std::vector<Partial> partials(n_chunks);

    const int nt = std::min<std::uint64_t>(std::max(1, resolve_threads(threads)), n_chunks);
    std::atomic<std::uint64_t> next{0};
    auto worker = [&]() {
        for (;;) {
            std::uint64_t c = next.fetch_add(1);
            if (c >= n_chunks) break;
            RngStream rng(seed, c);
            std::uint64_t lo = c * kChunk, hi = std::min(n, lo + kChunk);
            Partial p;
            for (std::uint64_t i = lo; i < hi; ++i) {
                double v = sample(rng);
                p.sum += v;
                p.sum_sq += v * v;
            }
            partials[c] = p;
        }
    };
    if (nt <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(nt);
        for (int i = 0; i < nt; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    double sum = 0.0, sum_sq = 0.0;
    for (const auto& p : partials) {  // fixed order: deterministic reduction
        sum += p.sum;
        sum_sq += p.sum_sq;
    }
    McEstimate est;
    est.samples = n;
    est.mean = sum / static_cast<double>(n);
    double var = sum_sq / static_cast<double>(n) - est.mean * est.mean;
    if (var < 0.0) var = 0.0;
    est.stderr_of_mean = std::sqrt(var / static_cast<double>(n));
    return est;
}

}  // namespace reachlab
