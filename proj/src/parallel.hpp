#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace stabledom::detail {

inline unsigned worker_count() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : std::min(hw, 32u);
}

/// Calls body(i) for i in [0, n) on contiguous chunks. Each index is handled exactly once, so
/// results that only write slot i are independent of the partition.
template <class Body>
void parallel_for(std::size_t n, Body&& body, std::size_t min_chunk = 64) {
    const unsigned workers = worker_count();
    if (n < 2 * min_chunk || workers == 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    const std::size_t chunks = std::min<std::size_t>(workers, (n + min_chunk - 1) / min_chunk);
    const std::size_t per = (n + chunks - 1) / chunks;
    std::vector<std::thread> pool;
    pool.reserve(chunks);
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (std::size_t c = 0; c < chunks; ++c) {
        const std::size_t lo = c * per, hi = std::min(n, lo + per);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body, &first_error, &error_mutex] {
            try {
                for (std::size_t i = lo; i < hi; ++i) body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace stabledom::detail
