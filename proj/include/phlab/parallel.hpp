#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace phlab {

/// Thread count used by grid scans; 1 selects the sequential reference mode.
int default_threads();
void set_default_threads(int n);

/// Evaluates out[i] = fn(i) for i in [0, n). Results are stored by index, so
/// any later reduction in index order is independent of scheduling. The first
/// exception thrown by any task is rethrown on the calling thread.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t n, Fn&& fn, int threads = default_threads()) {
    std::vector<T> out(n);
    const std::size_t workers = std::min<std::size_t>(std::max(threads, 1), std::max<std::size_t>(n, 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                out[i] = fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(n);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
    return out;
}

}  // namespace phlab
