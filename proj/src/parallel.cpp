#include "fracmem/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace fracmem {

int max_threads() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    const char* env = std::getenv("FRACMEM_THREADS");
    if (env == nullptr) return static_cast<int>(hw);
    long v = std::strtol(env, nullptr, 10);
    if (v <= 0) return static_cast<int>(hw);
    return static_cast<int>(std::min<long>(v, 512));
}

void parallel_for(int n, const std::function<void(int)>& fn) {
    if (n <= 0) return;
    int workers = std::min(max_threads(), n);
    if (workers <= 1 || n < 4) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    int chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        int lo = w * chunk;
        int hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (int i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace fracmem
