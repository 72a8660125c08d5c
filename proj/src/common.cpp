#include "gvg/common.hpp"

#include <cstdlib>
#include <thread>

namespace gvg {

int max_threads() {
    static int cached = [] {
        const char* env = std::getenv("GVG_THREADS");
        if (!env) return 1;
        int n = std::atoi(env);
        return n < 1 ? 1 : n;
    }();
    return cached;
}

void parallel_for(int64_t n, const std::function<void(int64_t)>& f) {
    int nt = max_threads();
    if (nt <= 1 || n < 2) {
        for (int64_t i = 0; i < n; i++) f(i);
        return;
    }
    if (nt > n) nt = static_cast<int>(n);
    std::vector<std::thread> workers;
    workers.reserve(nt);
    for (int t = 0; t < nt; t++) {
        workers.emplace_back([&, t] {
            for (int64_t i = t; i < n; i += nt) f(i);
        });
    }
    for (auto& w : workers) w.join();
}

}  // namespace gvg
