#include "gcoerce/util.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace gcoerce {

int thread_count() {
    static const int count = [] {
        if (const char* env = std::getenv("GCOERCE_THREADS")) {
            const int v = std::atoi(env);
            if (v >= 1) return v;
        }
        const unsigned hw = std::thread::hardware_concurrency();
        return hw == 0 ? 1 : static_cast<int>(hw);
    }();
    return count;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
    const int workers = std::min<std::size_t>(thread_count(), n == 0 ? 1 : n);
    if (workers <= 1 || n < 2) {
        fn(0, n);
        return;
    }
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace gcoerce
