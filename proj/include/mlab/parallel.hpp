#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

#include "mlab/error.hpp"
#include "mlab/summation.hpp"

namespace mlab {

/// Execution policy. Results never depend on `workers`.
struct Exec {
    unsigned workers = 1;
};

/// Runs f(i) for i in [0, count) on up to exec.workers threads. Exceptions
/// are rethrown on the calling thread (the one from the lowest index wins).
template <class F>
void parallel_for(std::size_t count, const Exec& exec, F&& f) {
    unsigned workers = std::max(1u, exec.workers);
    if (workers == 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::exception_ptr error;
    std::size_t error_index = count;
    auto body = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= count)
                return;
            try {
                f(i);
            } catch (...) {
                std::lock_guard lock(mu);
                if (i < error_index) {
                    error_index = i;
                    error = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    unsigned spawn = static_cast<unsigned>(std::min<std::size_t>(workers, count));
    pool.reserve(spawn);
    for (unsigned w = 0; w < spawn; ++w)
        pool.emplace_back(body);
    for (auto& t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

/// Blocks per work unit in blocked_sum. Fixed so that chunk boundaries (and
/// therefore any per-chunk warm-up) are independent of the worker count.
inline constexpr std::size_t kChunkBlocks = 64;

/// Sums a term sequence indexed by n in [first, last] with the grouping of
/// deterministic_sum. `chunk(lo, hi, acc)` must feed the terms for n = lo..hi
/// in order into `acc` (a BlockAccumulator<T>&).
template <class T, class ChunkFn>
T blocked_sum(std::uint64_t first, std::uint64_t last, const Exec& exec, ChunkFn&& chunk) {
    if (last < first)
        return T{};
    std::uint64_t count = last - first + 1;
    std::size_t blocks = static_cast<std::size_t>((count + kSumBlock - 1) / kSumBlock);
    std::vector<T> sums(blocks);
    std::size_t chunks = (blocks + kChunkBlocks - 1) / kChunkBlocks;
    parallel_for(chunks, exec, [&](std::size_t c) {
        std::uint64_t lo = first + static_cast<std::uint64_t>(c) * kChunkBlocks * kSumBlock;
        std::uint64_t hi = std::min<std::uint64_t>(last, lo + kChunkBlocks * kSumBlock - 1);
        BlockAccumulator<T> acc(std::span<T>(sums), c * kChunkBlocks);
        chunk(lo, hi, acc);
        acc.finish();
    });
    return pairwise_reduce(std::span<const T>(sums));
}

} // namespace mlab
