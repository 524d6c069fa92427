#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace inplay::detail {

// Runs fn(i) for i in [0, n) over contiguous chunks. Callers write results by
// index, so any reduction afterwards happens in a fixed order.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    const auto nt = static_cast<std::size_t>(std::max(1, threads));
    if (nt == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + nt - 1) / nt;
    for (std::size_t begin = 0; begin < n; begin += chunk) {
        const std::size_t end = std::min(begin + chunk, n);
        pool.emplace_back([&fn, begin, end] {
            for (std::size_t i = begin; i < end; ++i) fn(i);
        });
    }
}

}  // namespace inplay::detail
