#include "critcon/parallel.hpp"

#include <atomic>

namespace critcon {

namespace {
std::atomic<int> g_threads{0};
}

void set_thread_count(int n) { g_threads = std::max(0, n); }

int thread_count() {
    const int n = g_threads.load();
    if (n > 0) return n;
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace critcon
