// parallel.hpp — parallel map over independent indices with deterministic
// per-index results (each index writes its own slot; reductions stay ordered).

#pragma once

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace tfim {

// 0 -> all hardware threads; always at least 1.
inline int resolve_jobs(int jobs) noexcept {
    if (jobs > 0) return jobs;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

template <class Fn>
void parallel_for(int jobs, int count, Fn&& fn) {
    jobs = std::min(resolve_jobs(jobs), count);
    if (jobs <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(jobs));
    for (int w = 0; w < jobs; ++w) {
        workers.emplace_back([&] {
            try {
                for (;;) {
                    const int i = next.fetch_add(1, std::memory_order_relaxed);
                    if (i >= count) return;
                    fn(i);
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : workers) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace tfim
