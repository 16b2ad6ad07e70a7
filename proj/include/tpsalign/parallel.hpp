#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace tpsalign {

/// 0 means "all hardware threads".
inline std::size_t resolve_threads(std::size_t threads) {
    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    return threads;
}

/// Calls fn(begin, end) on contiguous, disjoint row ranges covering [0, rows).
/// Each row is handled by exactly one call, so outputs written per row do
/// not depend on the thread count.
template <class Fn>
void parallel_rows(std::size_t rows, std::size_t threads, Fn&& fn) {
    threads = std::min(resolve_threads(threads), std::max<std::size_t>(rows, 1));
    if (threads <= 1) {
        fn(std::size_t{0}, rows);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads - 1);
    const std::size_t chunk = (rows + threads - 1) / threads;
    for (std::size_t t = 1; t < threads; ++t) {
        const std::size_t begin = std::min(rows, t * chunk);
        const std::size_t end = std::min(rows, begin + chunk);
        if (begin < end) {
            pool.emplace_back([&fn, begin, end] { fn(begin, end); });
        }
    }
    fn(std::size_t{0}, std::min(rows, chunk));
    for (auto& th : pool) {
        th.join();
    }
}

} // namespace tpsalign
