#include "levyfluct/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace lf {

unsigned worker_count() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* s = std::getenv("LEVYFLUCT_THREADS")) {
        try {
            long v = std::stol(s);
            // an explicit setting wins even above the core count, so schedules can be varied in tests
            if (v >= 1) hw = unsigned(std::min(v, 256L));
        } catch (...) {
        }
    }
    return hw;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    unsigned w = std::min<std::size_t>(worker_count(), n);
    if (w <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex mu;
    auto body = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> g(mu);
                if (!err) err = std::current_exception();
                next = n;
            }
        }
    };
    std::vector<std::thread> ts;
    for (unsigned k = 1; k < w; ++k) ts.emplace_back(body);
    body();
    for (auto& t : ts) t.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace lf
