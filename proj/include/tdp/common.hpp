#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace tdp {

// Input files or netlist/device contents that violate the data model.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Solver or training blow-ups (NaN loss, singular systems).
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Rng = std::mt19937_64;

// Derives an independent stream from a base seed. Streams must not be
// correlated across ids, hence the splitmix-style mixing.
inline uint64_t split_seed(uint64_t seed, uint64_t stream) {
    uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Deterministic chunked parallel-for: each worker writes only to its own
// index range, so results never depend on the thread count.
template <typename Fn>
void parallel_for(size_t n, int threads, Fn&& fn) {
    if (threads <= 1 || n < 2048) {
        for (size_t i = 0; i < n; i++) fn(i);
        return;
    }
    size_t workers = std::min<size_t>(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    size_t chunk = (n + workers - 1) / workers;
    for (size_t w = 0; w < workers; w++) {
        size_t lo = w * chunk, hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (size_t i = lo; i < hi; i++) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace tdp
