#include "hbl/threads.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace hbl {

namespace {
std::atomic<int> g_override{0};
}

int max_threads() {
    const int ov = g_override.load(std::memory_order_relaxed);
    if (ov > 0) return ov;
    if (const char* env = std::getenv("HBL_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void set_max_threads_override(int n) {
    g_override.store(n, std::memory_order_relaxed);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    const std::size_t nw = std::min<std::size_t>(static_cast<std::size_t>(max_threads()), n);
    if (nw <= 1) {
        fn(0, n);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(nw);
    const std::size_t chunk = (n + nw - 1) / nw;
    std::vector<std::exception_ptr> errors(nw);
    for (std::size_t w = 0; w < nw; ++w) {
        const std::size_t b = w * chunk;
        const std::size_t e = std::min(n, b + chunk);
        if (b >= e) break;
        workers.emplace_back([&fn, &errors, w, b, e] {
            try {
                fn(b, e);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : workers) t.join();
    for (const auto& err : errors)
        if (err) std::rethrow_exception(err);
}

} // namespace hbl
