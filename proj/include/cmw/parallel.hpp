#pragma once

// Data-parallel loops over disjoint index ranges. The thread count comes
// from CMW_THREADS (default 1); results never depend on it because every
// index is written by exactly one worker.

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace cmw {

inline unsigned thread_count() {
    static const unsigned n = [] {
        const char* env = std::getenv("CMW_THREADS");
        if (!env) return 1u;
        try {
            const long v = std::stol(env);
            if (v <= 0) return std::max(1u, std::thread::hardware_concurrency());
            return static_cast<unsigned>(v);
        } catch (...) {
            return 1u;
        }
    }();
    return n;
}

template <class F>
void parallel_for(std::size_t n, F&& body) {
    const unsigned workers = std::min<std::size_t>(thread_count(), n == 0 ? 1 : n);
    if (workers <= 1 || n < 4096) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk, hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (std::size_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace cmw
