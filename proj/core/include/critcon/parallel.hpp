#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace critcon {

/// Worker count used by per-pixel loops. 0 means hardware concurrency.
void set_thread_count(int n);
[[nodiscard]] int thread_count();

/// Runs fn(i) for i in [0, n) split into contiguous chunks. Every index is
/// written by exactly one worker, so results do not depend on the schedule.
template <class Fn>
void parallel_for(int n, Fn&& fn) {
    const int workers = std::min(thread_count(), std::max(1, n / 16));
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        const int lo = n * w / workers, hi = n * (w + 1) / workers;
        pool.emplace_back([lo, hi, &fn] {
            for (int i = lo; i < hi; ++i) fn(i);
        });
    }
}

}  // namespace critcon
