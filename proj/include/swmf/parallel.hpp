#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace swmf {

/// Runs body(i) for i in [0, count) on up to `threads` worker threads.
/// Work is handed out by an atomic counter; callers write results into
/// slots indexed by i so the outcome does not depend on scheduling. The
/// first exception thrown by any task is rethrown after all workers join.
template <class Body>
void parallel_for(std::int64_t count, unsigned threads, Body&& body)
{
    if (count <= 0) return;
    if (threads <= 1 || count == 1) {
        for (std::int64_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::int64_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::int64_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(count);
                return;
            }
        }
    };
    const auto workers = static_cast<unsigned>(std::min<std::int64_t>(threads, count));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

/// Default worker count: hardware concurrency, at least 1.
inline unsigned default_threads()
{
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

}  // namespace swmf
