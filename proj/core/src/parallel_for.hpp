#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace noonsim::detail {

// Static block partition over [0, count).  Each index is processed exactly
// once by exactly one thread; callers must make body(i) independent of any
// other index, which keeps results identical to a serial loop.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
    const std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    const std::size_t workers = std::min({hw, count, std::size_t{16}});
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < count; i += workers) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace noonsim::detail
