#pragma once

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace qdet {

/// Statically strided parallel loop (worker w takes indices w, w+W, ...),
/// which balances load when cost varies systematically along the index.
/// Callers write results into preallocated per-index slots and reduce
/// sequentially afterwards, so outputs do not depend on the worker count.
inline void parallel_for(int count, int workers, const std::function<void(int)>& fn) {
    workers = std::max(1, std::min(workers, count));
    if (workers == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([w, workers, count, &fn]() {
            for (int i = w; i < count; i += workers) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

inline int default_workers() {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

}  // namespace qdet
