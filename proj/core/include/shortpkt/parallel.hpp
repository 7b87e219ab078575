#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace shortpkt {

// Worker count: min(jobs, hardware threads), capped by SHORTPKT_THREADS.
inline int max_threads(int jobs) {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw < 1) hw = 1;
    if (const char* env = std::getenv("SHORTPKT_THREADS")) {
        int cap = std::atoi(env);
        if (cap >= 1 && cap < hw) hw = cap;
    }
    return jobs < hw ? jobs : hw;
}

// Run fn(0..count-1) across worker threads. Caller owns result ordering:
// workers write to disjoint slots, so the outcome is thread-count invariant.
inline void parallel_for_index(int count, const std::function<void(int)>& fn) {
    int workers = max_threads(count);
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace shortpkt
