#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace gmwb {

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// Static partition of [0, n) into contiguous chunks, one per thread.  Each
// index is written by exactly one worker and no reductions cross chunks, so
// results do not depend on the thread count.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    threads = resolve_threads(threads);
    if (threads <= 1 || n < 2) {
        fn(static_cast<std::size_t>(0), n);
        return;
    }
    const std::size_t nt = std::min<std::size_t>(threads, n);
    const std::size_t chunk = (n + nt - 1) / nt;
    std::vector<std::thread> pool;
    pool.reserve(nt - 1);
    for (std::size_t t = 1; t < nt; ++t) {
        const std::size_t lo = t * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
    }
    fn(0, std::min(n, chunk));
    for (auto& th : pool) th.join();
}

} // namespace gmwb
