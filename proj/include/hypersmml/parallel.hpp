#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace hypersmml {

/// Worker cap: HYPERSMML_THREADS if set (clamped to [1, 64]), else the
/// hardware concurrency.
inline int thread_cap() {
    if (const char* env = std::getenv("HYPERSMML_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return std::min(v, 64);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(std::min(hw, 64u));
}

/// Run body(i) for i in [0, count) on up to thread_cap() threads. Each index
/// is processed exactly once and results must be written to index-addressed
/// storage, so the outcome does not depend on the number of workers.
inline void parallel_for_index(int count, const std::function<void(int)>& body) {
    const int workers = std::min(thread_cap(), count);
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace hypersmml
