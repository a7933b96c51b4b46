#pragma once

#include <algorithm>
#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace permclust {

/// Runs fn(block) for block = 0..num_blocks-1 across `workers` threads.
/// Blocks are claimed dynamically; callers keep per-block outputs and reduce
/// them in block order, which makes results independent of the worker count.
inline void run_blocks(int workers, long long num_blocks,
                       const std::function<void(long long)>& fn) {
    if (workers <= 1 || num_blocks <= 1) {
        for (long long b = 0; b < num_blocks; ++b) fn(b);
        return;
    }
    std::atomic<long long> next{0};
    const int pool_size = static_cast<int>(std::min<long long>(workers, num_blocks));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(pool_size));
    for (int i = 0; i < pool_size; ++i) {
        pool.emplace_back([&] {
            for (;;) {
                const long long b = next.fetch_add(1);
                if (b >= num_blocks) return;
                fn(b);
            }
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace permclust
