#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "crflab/common.hpp"

namespace crflab {

/// Runs fn(i) for i in [0, n). Work is split into contiguous blocks over at
/// most worker_count() threads; falls back to a plain loop below `grain`.
/// The first exception thrown by any block is rethrown on the caller.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, std::size_t grain = 2048) {
    const unsigned workers = worker_count();
    if (workers <= 1 || n < 2 * grain) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t blocks = std::min<std::size_t>(workers, n / grain);
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(blocks);
    for (std::size_t b = 0; b < blocks; ++b) {
        const std::size_t lo = n * b / blocks;
        const std::size_t hi = n * (b + 1) / blocks;
        pool.emplace_back([&, lo, hi] {
            try {
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace crflab
