#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace omslab {

// Runs fn(begin, end) over contiguous blocks of [0, n). With workers == 1 the
// call happens inline. Callers are responsible for making per-index work
// independent so the result does not depend on the partitioning.
template <typename Fn>
void parallel_blocks(std::size_t n, int workers, Fn&& fn) {
    if (workers <= 1 || n == 0) {
        fn(static_cast<std::size_t>(0), n);
        return;
    }
    std::size_t nw = static_cast<std::size_t>(workers);
    if (nw > n) nw = n;
    std::vector<std::thread> threads;
    threads.reserve(nw);
    std::size_t chunk = (n + nw - 1) / nw;
    for (std::size_t w = 0; w < nw; ++w) {
        std::size_t b = w * chunk;
        std::size_t e = b + chunk < n ? b + chunk : n;
        if (b >= e) break;
        threads.emplace_back([&fn, b, e] { fn(b, e); });
    }
    for (auto& t : threads) t.join();
}

}  // namespace omslab
