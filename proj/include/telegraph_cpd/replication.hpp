#pragma once

#include "telegraph_cpd/random.hpp"

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <type_traits>
#include <vector>

namespace telegraph {

/// Number of workers to use when the caller passes 0.
inline unsigned default_workers() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1U : hw;
}

/// Runs fn(r, stream) for r in [0, count), where stream is derived from
/// (seed, r). Results are stored by replication index, so the output does not
/// depend on the number of workers or on scheduling. The first exception
/// thrown by any replication is rethrown after all workers stop.
template <class Fn>
auto run_replications(std::size_t count, std::uint64_t seed, unsigned workers, Fn&& fn)
    -> std::vector<std::invoke_result_t<Fn&, std::size_t, RandomStream&>> {
    using Result = std::invoke_result_t<Fn&, std::size_t, RandomStream&>;
    std::vector<Result> results(count);
    if (count == 0) {
        return results;
    }
    if (workers == 0) {
        workers = default_workers();
    }
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));

    constexpr std::size_t chunk = 16;
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto work = [&] {
        while (!failed.load(std::memory_order_relaxed)) {
            const std::size_t begin = next.fetch_add(chunk);
            if (begin >= count) {
                return;
            }
            const std::size_t end = std::min(begin + chunk, count);
            try {
                for (std::size_t r = begin; r < end; ++r) {
                    RandomStream stream = RandomStream::derived(seed, r);
                    results[r] = fn(r, stream);
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
                failed = true;
                return;
            }
        }
    };

    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back(work);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }
    return results;
}

} // namespace telegraph
