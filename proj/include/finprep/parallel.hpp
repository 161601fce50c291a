#pragma once

#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace finprep {

// Runs fn(i) for i in [0, n) across at most `workers` threads in contiguous
// blocks. Callers must write only to slots addressed by i so results are
// identical for any worker count. The first exception thrown is rethrown.
template <typename Fn>
inline void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
    if (n == 0) return;
    std::size_t nthreads = workers == 0 ? 1 : workers;
    if (nthreads > n) nthreads = n;
    if (nthreads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(nthreads);
    std::vector<std::thread> threads;
    threads.reserve(nthreads);
    std::size_t chunk = (n + nthreads - 1) / nthreads;
    for (std::size_t t = 0; t < nthreads; ++t) {
        std::size_t lo = t * chunk;
        std::size_t hi = lo + chunk < n ? lo + chunk : n;
        threads.emplace_back([&, t, lo, hi] {
            try {
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : threads) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace finprep
