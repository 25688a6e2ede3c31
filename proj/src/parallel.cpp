#include "phlab/parallel.hpp"

namespace phlab {

namespace {
std::atomic<int> g_threads{0};
}

int default_threads() {
    const int n = g_threads.load();
    if (n > 0) return n;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void set_default_threads(int n) { g_threads.store(std::max(n, 0)); }

}  // namespace phlab
