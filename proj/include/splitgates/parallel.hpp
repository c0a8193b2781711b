#pragma once

#include <atomic>
#include <cstddef>
#include <ctime>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace splitgates {

// CPU time of the calling thread, in seconds. Summing this per task keeps
// compute-cost comparisons unaffected by how tasks are scheduled.
inline double thread_cpu_seconds() {
#if defined(CLOCK_THREAD_CPUTIME_ID)
    timespec ts{};
    if (clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts) == 0)
        return static_cast<double>(ts.tv_sec) + 1e-9 * static_cast<double>(ts.tv_nsec);
#endif
    return static_cast<double>(std::clock()) / CLOCKS_PER_SEC;
}

struct ThreadCpuTimer {
    double start = thread_cpu_seconds();
    double elapsed() const { return thread_cpu_seconds() - start; }
};

inline unsigned default_thread_count() {
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : hc;
}

// Runs fn(i) for i in [0, n_tasks). Tasks are claimed from a shared counter;
// each task must write only to its own slot of any output, so the result is
// independent of scheduling. The first exception is rethrown on the caller.
inline void parallel_for(std::size_t n_tasks, unsigned n_threads,
                         const std::function<void(std::size_t)>& fn) {
    if (n_tasks == 0) return;
    if (n_threads == 0) n_threads = 1;
    if (n_threads > n_tasks) n_threads = static_cast<unsigned>(n_tasks);
    if (n_threads == 1) {
        for (std::size_t i = 0; i < n_tasks; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n_tasks) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

} // namespace splitgates
