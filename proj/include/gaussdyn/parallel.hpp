#pragma once

// Static work partitioning: item i always goes to worker i % n and writes only its
// own output slot, so results never depend on the worker count.

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace gaussdyn {

template <class F>
void parallel_for(std::size_t count, unsigned workers, F&& body) {
    const std::size_t n = std::max<std::size_t>(1, std::min<std::size_t>(workers, count));
    if (n == 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    // First failure by item index is rethrown, independent of scheduling.
    std::vector<std::exception_ptr> errors(count);
    std::vector<std::thread> pool;
    pool.reserve(n);
    for (std::size_t w = 0; w < n; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < count; i += n) {
                try {
                    body(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace gaussdyn
